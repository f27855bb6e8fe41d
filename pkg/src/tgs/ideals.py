"""Ideals, primes, radicals, congruences and the prime spectrum.

Subsets of the carrier are int bitmasks (bit ``a`` set iff ``a`` is a member).
Two absorption rules are supported:

``literal``
    ``{a, b, c}_g`` lies in ``I`` whenever ``a`` and ``b`` do (any ``c``).
``strict``
    ``{a, b, c}_g`` lies in ``I`` whenever ``a`` does (any ``b``, ``c``, any slot).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import PreconditionError
from .model import GammaSemiring

MODES = ("literal", "strict")


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"absorption mode must be one of {MODES}, got {mode!r}")


@dataclass(frozen=True, order=True)
class Ideal:
    """A subset of a carrier of size ``n`` stored as a bitmask."""

    mask: int
    n: int

    @classmethod
    def of(cls, members, n: int) -> "Ideal":
        mask = 0
        for a in members:
            mask |= 1 << a
        return cls(mask, n)

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(a for a in range(self.n) if self.mask >> a & 1)

    def __contains__(self, a: int) -> bool:
        return bool(self.mask >> a & 1)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def issubset(self, other: "Ideal") -> bool:
        return self.mask & ~other.mask == 0

    @property
    def is_proper(self) -> bool:
        return self.mask != (1 << self.n) - 1

    @property
    def key(self) -> str:
        return f"{self.mask:x}"

    def indicator(self) -> np.ndarray:
        return np.array([bool(self.mask >> a & 1) for a in range(self.n)])

    def __repr__(self) -> str:
        return "{" + ",".join(map(str, self.members)) + "}"


def whole(model: GammaSemiring) -> Ideal:
    return Ideal((1 << model.n) - 1, model.n)


def zero_ideal(model: GammaSemiring) -> Ideal:
    return Ideal(1, model.n)


def _mask(arr) -> int:
    out = 0
    for v in set(int(x) for x in np.ravel(arr)):
        out |= 1 << v
    return out


class _Absorption:
    """Precomputed product masks for one model and one absorption rule."""

    def __init__(self, model: GammaSemiring, mode: str):
        _check_mode(mode)
        T = model.tern
        n = model.n
        self.mode = mode
        if mode == "strict":
            # everything reachable from a in any slot
            self.single = [_mask(np.concatenate([T[:, a].ravel(), T[:, :, a].ravel(), T[:, :, :, a].ravel()])) for a in range(n)]
        else:
            self.pair = [[_mask(T[:, a, b, :]) for b in range(n)] for a in range(n)]

    def products(self, members: tuple[int, ...]) -> int:
        out = 0
        if self.mode == "strict":
            for a in members:
                out |= self.single[a]
        else:
            for a in members:
                row = self.pair[a]
                for b in members:
                    out |= row[b]
        return out


_ABSORB_CACHE: dict = {}


def _absorption(model: GammaSemiring, mode: str) -> _Absorption:
    key = (model.encoding(), mode)
    ab = _ABSORB_CACHE.get(key)
    if ab is None:
        if len(_ABSORB_CACHE) > 4096:
            _ABSORB_CACHE.clear()
        ab = _ABSORB_CACHE[key] = _Absorption(model, mode)
    return ab


def _members(mask: int, n: int) -> tuple[int, ...]:
    return tuple(a for a in range(n) if mask >> a & 1)


def _close_mask(model: GammaSemiring, mask: int, mode: str) -> int:
    ab = _absorption(model, mode)
    A = model.add
    mask |= 1
    while True:
        mem = _members(mask, model.n)
        new = mask | ab.products(mem)
        for a, b in itertools.combinations_with_replacement(mem, 2):
            new |= 1 << int(A[a, b])
        if new == mask:
            return mask
        mask = new


def ideal_closure(model: GammaSemiring, generators=(), mode: str = "literal") -> Ideal:
    """Least ideal containing ``generators`` and 0 under the given absorption rule."""
    for g in generators:
        if not 0 <= g < model.n:
            raise PreconditionError(f"generator {g} is outside 0..{model.n - 1}")
    return Ideal(_close_mask(model, Ideal.of(generators, model.n).mask, mode), model.n)


def ideal_violation(model: GammaSemiring, subset: Ideal, mode: str = "literal") -> tuple | None:
    """First reason ``subset`` is not an ideal, or ``None``.

    Witnesses: ``("zero",)``, ``("add", a, b, a+b)`` or
    ``("absorb", g, a, b, c, {a,b,c}_g)``.
    """
    _check_mode(mode)
    if 0 not in subset:
        return ("zero",)
    mem = subset.members
    for a, b in itertools.product(mem, repeat=2):
        s = int(model.add[a, b])
        if s not in subset:
            return ("add", a, b, s)
    T = model.tern
    n = model.n
    for g in range(model.m):
        if mode == "literal":
            for a, b in itertools.product(mem, repeat=2):
                for c in range(n):
                    v = int(T[g, a, b, c])
                    if v not in subset:
                        return ("absorb", g, a, b, c, v)
        else:
            for a in mem:
                for b, c in itertools.product(range(n), repeat=2):
                    for args in ((a, b, c), (b, a, c), (b, c, a)):
                        v = int(T[(g,) + args])
                        if v not in subset:
                            return ("absorb", g) + args + (v,)
    return None


def is_ideal(model: GammaSemiring, subset: Ideal, mode: str = "literal") -> bool:
    return ideal_violation(model, subset, mode) is None


def all_ideals(model: GammaSemiring, mode: str = "literal") -> list[Ideal]:
    """Every ideal (the whole carrier included), ordered by bitmask.

    Generated as the join-closure of the least ideal under adjoining single
    elements, so no subset enumeration is involved.
    """
    n = model.n
    start = _close_mask(model, 1, mode)
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for mask in frontier:
            for x in range(n):
                if not mask >> x & 1:
                    j = _close_mask(model, mask | 1 << x, mode)
                    if j not in seen:
                        seen.add(j)
                        nxt.append(j)
        frontier = nxt
    return [Ideal(mask, n) for mask in sorted(seen)]


def all_proper_ideals(model: GammaSemiring, mode: str = "literal") -> list[Ideal]:
    return [I for I in all_ideals(model, mode) if I.is_proper]


def prime_violation(model: GammaSemiring, I: Ideal) -> tuple[int, int, int, int] | None:
    """First ``(g, a, b, c)`` with ``{a,b,c}_g`` in ``I`` but none of ``a, b, c`` in ``I``."""
    ind = I.indicator()
    hit = ind[model.tern]
    out = ~ind
    bad = hit & out[None, :, None, None] & out[None, None, :, None] & out[None, None, None, :]
    idx = np.argwhere(bad)
    if len(idx):
        return tuple(int(v) for v in idx[0])
    return None


def is_prime(model: GammaSemiring, I: Ideal, mode: str = "literal", check: bool = True) -> tuple[bool, tuple | None]:
    """Primality with a witness on failure.

    With ``check=False`` the proper-ideal precondition is waived so that the
    prime condition can be tested on an arbitrary proper subset.
    """
    if not I.is_proper:
        raise PreconditionError(f"{I} is not a proper subset")
    if check:
        v = ideal_violation(model, I, mode)
        if v is not None:
            raise PreconditionError(f"{I} is not an ideal ({mode})", witness=v)
    w = prime_violation(model, I)
    return w is None, w


def radical(model: GammaSemiring, I: Ideal) -> Ideal:
    """Elements some iterated self-power ``p_{k+1} = {p_k, a, a}_g`` of which lies in ``I``.

    The parameter may change at every step.
    """
    T = model.tern
    mask = 0
    for a in range(model.n):
        reach = {a}
        frontier = [a]
        while frontier:
            nxt = []
            for p in frontier:
                for g in range(model.m):
                    q = int(T[g, p, a, a])
                    if q not in reach:
                        reach.add(q)
                        nxt.append(q)
            frontier = nxt
        if any(p in I for p in reach):
            mask |= 1 << a
    return Ideal(mask, model.n)


def is_semiprime(model: GammaSemiring, I: Ideal) -> bool:
    return radical(model, I) == I


def ideal_product(model: GammaSemiring, I: Ideal, J: Ideal, mode: str = "literal") -> Ideal:
    """Ideal generated by ``{a, b, c}_g`` with ``a`` in ``I``, ``b`` in ``J``."""
    T = model.tern
    gens = set()
    for a in I.members:
        for b in J.members:
            gens.update(int(v) for v in T[:, a, b, :].ravel())
    return ideal_closure(model, sorted(gens), mode)


# ---------------------------------------------------------------------------
# congruences


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


@dataclass(frozen=True)
class Congruence:
    """A partition of the carrier; ``labels[a]`` is the smallest member of ``a``'s block."""

    labels: tuple[int, ...]

    @property
    def blocks(self) -> list[tuple[int, ...]]:
        out: dict[int, list[int]] = {}
        for a, r in enumerate(self.labels):
            out.setdefault(r, []).append(a)
        return [tuple(v) for _, v in sorted(out.items())]

    def related(self, a: int, b: int) -> bool:
        return self.labels[a] == self.labels[b]

    def compatibility_violation(self, model: GammaSemiring) -> tuple | None:
        lab = np.asarray(self.labels)
        A, T = model.add, model.tern
        for block in self.blocks:
            a = block[0]
            for b in block[1:]:
                bad = np.argwhere(lab[A[a]] != lab[A[b]])
                if len(bad):
                    return ("add", a, b, int(bad[0][0]))
                for slot in range(3):
                    ta = np.take(T, a, axis=slot + 1)
                    tb = np.take(T, b, axis=slot + 1)
                    bad = np.argwhere(lab[ta] != lab[tb])
                    if len(bad):
                        return ("tern", slot, a, b) + tuple(int(v) for v in bad[0])
        return None


def congruence_closure(model: GammaSemiring, pairs) -> Congruence:
    """Smallest congruence for ``+`` and every ternary product containing ``pairs``."""
    n = model.n
    uf = _UnionFind(n)
    pending = list(pairs)
    A, T = model.add, model.tern
    while pending:
        for a, b in pending:
            uf.union(a, b)
        pending = []
        lab = np.array([uf.find(x) for x in range(n)])
        for a in range(n):
            for b in range(a + 1, n):
                if lab[a] != lab[b]:
                    continue
                for c in range(n):
                    if uf.find(int(A[a, c])) != uf.find(int(A[b, c])):
                        pending.append((int(A[a, c]), int(A[b, c])))
                for slot in range(3):
                    ta = np.take(T, a, axis=slot + 1).ravel()
                    tb = np.take(T, b, axis=slot + 1).ravel()
                    for x, y in zip(ta.tolist(), tb.tolist()):
                        if uf.find(x) != uf.find(y):
                            pending.append((x, y))
    return Congruence(tuple(uf.find(x) for x in range(n)))


def bourne_congruence(model: GammaSemiring, I: Ideal) -> Congruence:
    """Closure of ``a ~ b`` whenever ``a + i == b + j`` for some ``i, j`` in ``I``."""
    A = model.add
    mem = I.members
    pairs = []
    for a in range(model.n):
        for b in range(a + 1, model.n):
            if any(A[a, i] == A[b, j] for i in mem for j in mem):
                pairs.append((a, b))
    return congruence_closure(model, pairs)


# ---------------------------------------------------------------------------
# spectrum


@dataclass(frozen=True)
class SpectrumData:
    """Primes, basic opens ``D(I)``, closed sets ``V(I)`` and the incidence matrix.

    ``ideals`` lists every ideal (whole carrier last); ``D`` and ``V`` are keyed by
    ideal bitmask and hold indices into ``primes``.  ``incidence`` is indexed by the
    proper ideals: entry ``[i][j]`` is 1 iff ``D(J) <= D(I)``.
    """

    mode: str
    ideals: tuple[Ideal, ...]
    primes: tuple[Ideal, ...]
    D: dict
    V: dict
    incidence: tuple[tuple[int, ...], ...]

    @property
    def proper_ideals(self) -> tuple[Ideal, ...]:
        return tuple(I for I in self.ideals if I.is_proper)

    @property
    def points(self) -> frozenset:
        return frozenset(range(len(self.primes)))

    def basic_open(self, I: Ideal) -> frozenset:
        if I.mask in self.D:
            return self.D[I.mask]
        return frozenset(i for i, p in enumerate(self.primes) if not I.issubset(p))

    def closed(self, I: Ideal) -> frozenset:
        return self.points - self.basic_open(I)

    def prime_index(self, p: Ideal) -> int:
        return self.primes.index(p)

    @cached_property
    def prime_incidence(self) -> tuple[tuple[int, ...], ...]:
        """Incidence restricted to the primes (as ideals)."""
        ds = [self.basic_open(p) for p in self.primes]
        return tuple(tuple(int(dj <= di) for dj in ds) for di in ds)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "ideals": [list(I.members) for I in self.proper_ideals],
            "primes": [list(p.members) for p in self.primes],
            "D": {f"{k:x}": sorted(v) for k, v in sorted(self.D.items())},
            "V": {f"{k:x}": sorted(v) for k, v in sorted(self.V.items())},
            "incidence": [list(r) for r in self.incidence],
            "prime_incidence": [list(r) for r in self.prime_incidence],
        }


def spectrum(model: GammaSemiring, mode: str = "literal") -> SpectrumData:
    ideals = all_ideals(model, mode)
    proper = [I for I in ideals if I.is_proper]
    primes = [I for I in proper if prime_violation(model, I) is None]
    pts = frozenset(range(len(primes)))
    D = {}
    V = {}
    for I in ideals:
        d = frozenset(i for i, p in enumerate(primes) if not I.issubset(p))
        D[I.mask] = d
        V[I.mask] = pts - d
    incidence = tuple(tuple(int(D[J.mask] <= D[I.mask]) for J in proper) for I in proper)
    return SpectrumData(mode, tuple(ideals), tuple(primes), D, V, incidence)
