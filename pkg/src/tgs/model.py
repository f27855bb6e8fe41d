"""Finite commutative ternary Gamma-semirings: tables, axioms, isomorphism.

A model on ``n`` elements with ``m`` parameters is stored as

* ``add``  -- ``n x n`` addition table, element 0 is the additive identity;
* ``gmul`` -- ``m x m`` table of the binary operation on parameters;
* ``tern`` -- ``m x n x n x n`` tensor, ``tern[g, a, b, c]`` is ``{a, b, c}_g``.

Byte encoding (used for canonical forms and census output)::

    bytes([n, m]) + add.ravel() + gmul.ravel() + tern.ravel()

each entry one unsigned byte, row-major.  Two models are isomorphic exactly
when their canonical encodings (minimum over relabelings) coincide.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import StructuralError

AXIOM_GROUPS = ("T1", "COMM", "T3", "T4", "GMUL", "T5", "T6", "E")


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.int64)
    arr.setflags(write=False)
    return arr


class GammaSemiring:
    """An immutable finite model given by its operation tables.

    ``e`` is an optional identity idempotent (``tern[gamma0, e, e, a] == a``)
    and ``gamma0`` the parameter used wherever a single one must be fixed.
    """

    __slots__ = ("n", "m", "add", "gmul", "tern", "e", "gamma0", "_enc")

    def __init__(self, add, gmul, tern, e: int | None = None, gamma0: int = 0):
        add = _frozen(add)
        gmul = _frozen(gmul)
        tern = _frozen(tern)
        if add.ndim != 2 or add.shape[0] != add.shape[1] or add.shape[0] < 1:
            raise StructuralError(f"add must be a nonempty square table, got shape {add.shape}")
        n = add.shape[0]
        if gmul.ndim != 2 or gmul.shape[0] != gmul.shape[1] or gmul.shape[0] < 1:
            raise StructuralError(f"gmul must be a nonempty square table, got shape {gmul.shape}")
        m = gmul.shape[0]
        if tern.shape != (m, n, n, n):
            raise StructuralError(f"tern must have shape {(m, n, n, n)}, got {tern.shape}")
        for name, table, bound in (("add", add, n), ("gmul", gmul, m), ("tern", tern, n)):
            bad = np.argwhere((table < 0) | (table >= bound))
            if len(bad):
                cell = tuple(int(i) for i in bad[0])
                raise StructuralError(
                    f"{name}{list(cell)} = {int(table[cell])} is outside 0..{bound - 1}", cell=(name, cell)
                )
        if not 0 <= gamma0 < m:
            raise StructuralError(f"gamma0 = {gamma0} is outside 0..{m - 1}", cell=("gamma0",))
        if e is not None and not 0 <= e < n:
            raise StructuralError(f"e = {e} is outside 0..{n - 1}", cell=("e",))
        self.n = int(n)
        self.m = int(m)
        self.add = add
        self.gmul = gmul
        self.tern = tern
        self.e = None if e is None else int(e)
        self.gamma0 = int(gamma0)
        self._enc = None

    def encoding(self) -> bytes:
        if self._enc is None:
            self._enc = encode_tables(self.n, self.m, self.add, self.gmul, self.tern)
        return self._enc

    def __eq__(self, other) -> bool:
        if not isinstance(other, GammaSemiring):
            return NotImplemented
        return self.encoding() == other.encoding() and self.e == other.e and self.gamma0 == other.gamma0

    def __hash__(self) -> int:
        return hash((self.encoding(), self.e, self.gamma0))

    def __repr__(self) -> str:
        return f"GammaSemiring(n={self.n}, m={self.m}, e={self.e}, gamma0={self.gamma0})"

    # convenience accessors
    def t(self, g: int, a: int, b: int, c: int) -> int:
        return int(self.tern[g, a, b, c])

    def plus(self, a: int, b: int) -> int:
        return int(self.add[a, b])

    @property
    def elements(self) -> range:
        return range(self.n)

    def with_identity(self, e: int | None, gamma0: int | None = None) -> "GammaSemiring":
        return GammaSemiring(self.add, self.gmul, self.tern, e=e, gamma0=self.gamma0 if gamma0 is None else gamma0)

    def is_group_complete(self) -> bool:
        """True when every element has an additive inverse."""
        return bool(np.all((self.add == 0).any(axis=1)))

    # serialization
    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "add": self.add.tolist(),
            "gmul": self.gmul.tolist(),
            "tern": self.tern.tolist(),
            "e": self.e,
            "gamma0": self.gamma0,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GammaSemiring":
        try:
            n, m = int(data["n"]), int(data["m"])
            model = cls(data["add"], data["gmul"], data["tern"], e=data.get("e"), gamma0=int(data.get("gamma0", 0)))
        except KeyError as exc:
            raise StructuralError(f"model file is missing field {exc.args[0]!r}") from None
        except ValueError as exc:
            raise StructuralError(f"model tables are ragged: {exc}") from None
        if (model.n, model.m) != (n, m):
            raise StructuralError(f"declared n={n}, m={m} but tables give n={model.n}, m={model.m}")
        return model

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        """sha256 of the canonical JSON serialization (the module files' ``over`` field)."""
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def encode_tables(n: int, m: int, add, gmul, tern) -> bytes:
    return bytes([n, m]) + np.asarray(add, dtype=np.uint8).tobytes() + np.asarray(gmul, dtype=np.uint8).tobytes() + np.asarray(tern, dtype=np.uint8).tobytes()


def decode(enc: bytes, e: int | None = None, gamma0: int = 0) -> GammaSemiring:
    n, m = enc[0], enc[1]
    buf = np.frombuffer(enc[2:], dtype=np.uint8).astype(np.int64)
    add = buf[: n * n].reshape(n, n)
    gmul = buf[n * n : n * n + m * m].reshape(m, m)
    tern = buf[n * n + m * m :].reshape(m, n, n, n)
    return GammaSemiring(add, gmul, tern, e=e, gamma0=gamma0)


def load_model(path: str | Path) -> GammaSemiring:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise StructuralError(f"{path}: not valid JSON ({exc})") from None
    return GammaSemiring.from_dict(data)


def save_model(model: GammaSemiring, path: str | Path) -> None:
    Path(path).write_text(model.to_json() + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# axioms


@dataclass(frozen=True)
class AxiomMode:
    """``strict_t5`` turns on the literal parameter-compatibility identity."""

    strict_t5: bool = False

    @property
    def name(self) -> str:
        return "strict-t5" if self.strict_t5 else "default"


@dataclass(frozen=True)
class Witness:
    axiom: str
    gammas: tuple[int, ...]
    elements: tuple[int, ...]
    lhs: int
    rhs: int

    def to_dict(self) -> dict:
        return {"axiom": self.axiom, "gammas": list(self.gammas), "elements": list(self.elements), "lhs": self.lhs, "rhs": self.rhs}


@dataclass
class AxiomReport:
    mode: AxiomMode
    status: dict[str, str]
    witnesses: list[Witness] = field(default_factory=list)
    failures: dict[str, int] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.witnesses

    def failing(self) -> list[str]:
        return [k for k, v in self.status.items() if v == "fail"]

    def witnesses_for(self, group: str) -> list[Witness]:
        return [w for w in self.witnesses if w.axiom.split(".")[0] == group]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.name,
            "passed": self.passed,
            "status": dict(self.status),
            "failures": dict(self.failures),
            "witnesses": [w.to_dict() for w in self.witnesses],
        }


def evaluate_witness(model: GammaSemiring, w: Witness) -> tuple[int, int]:
    """Recompute ``(lhs, rhs)`` for a witness directly from the tables."""
    A, T, G = model.add, model.tern, model.gmul
    x = w.elements
    kind = w.axiom
    if kind == "T1.comm":
        return int(A[x[0], x[1]]), int(A[x[1], x[0]])
    if kind == "T1.assoc":
        return int(A[A[x[0], x[1]], x[2]]), int(A[x[0], A[x[1], x[2]]])
    if kind == "T1.zero":
        return int(A[0, x[0]]), x[0]
    if kind == "COMM.12":
        g, = w.gammas
        return int(T[g, x[0], x[1], x[2]]), int(T[g, x[1], x[0], x[2]])
    if kind == "COMM.23":
        g, = w.gammas
        return int(T[g, x[0], x[1], x[2]]), int(T[g, x[0], x[2], x[1]])
    if kind == "T3.left":
        g, = w.gammas
        a, b, c, d = x
        return int(T[g, A[a, b], c, d]), int(A[T[g, a, c, d], T[g, b, c, d]])
    if kind == "T3.right":
        g, = w.gammas
        a, b, c, d = x
        return int(T[g, a, b, A[c, d]]), int(A[T[g, a, b, c], T[g, a, b, d]])
    if kind in ("T4.mid", "T4.right", "T5"):
        g1, g2 = w.gammas
        a, b, c, d, e = x
        lhs = int(T[g2, T[g1, a, b, c], d, e])
        if kind == "T4.mid":
            return lhs, int(T[g2, a, T[g1, b, c, d], e])
        if kind == "T4.right":
            return lhs, int(T[g2, a, b, T[g1, c, d, e]])
        return lhs, int(T[G[g1, g2], a, b, c])
    if kind == "GMUL":
        g1, g2, g3 = w.gammas
        return int(G[G[g1, g2], g3]), int(G[g1, G[g2, g3]])
    if kind == "T6":
        g, = w.gammas
        return int(T[g, 0, x[1], x[2]]), 0
    if kind == "E":
        return int(T[model.gamma0, x[0], x[1], x[2]]), x[2]
    raise ValueError(f"unknown axiom {kind!r}")


def check_axioms(model: GammaSemiring, mode: AxiomMode = AxiomMode(), max_witnesses: int = 32) -> AxiomReport:
    """Exhaustively check every axiom selected by ``mode``.

    Each failing identity contributes up to ``max_witnesses`` witnesses in
    lexicographic order of its free indices; ``failures`` counts all of them.
    """
    n, m = model.n, model.m
    A, G, T = model.add, model.gmul, model.tern
    status = {k: "pass" for k in AXIOM_GROUPS}
    witnesses: list[Witness] = []
    failures: dict[str, int] = {}

    def record(kind: str, bad: np.ndarray, gamma_axes: int, lhs: np.ndarray, rhs: np.ndarray, build):
        idx = np.argwhere(bad)
        if not len(idx):
            return
        failures[kind] = len(idx)
        status[kind.split(".")[0]] = "fail"
        for row in idx[:max_witnesses]:
            row = tuple(int(v) for v in row)
            gammas, elems = build(row[:gamma_axes], row[gamma_axes:])
            witnesses.append(Witness(kind, gammas, elems, int(lhs[row]), int(rhs[row])))

    ar = np.arange(n)
    # T1: commutative monoid with identity 0
    record("T1.comm", A != A.T, 0, A, A.T, lambda g, x: ((), x))
    lhs = A[A[:, :, None], ar[None, None, :]]
    rhs = A[ar[:, None, None], A[None, :, :]]
    record("T1.assoc", lhs != rhs, 0, lhs, rhs, lambda g, x: ((), x))
    record("T1.zero", A[0] != ar, 0, A[0], ar, lambda g, x: ((), x))

    # full symmetry of every ternary table
    sw12 = T.transpose(0, 2, 1, 3)
    sw23 = T.transpose(0, 1, 3, 2)
    record("COMM.12", T != sw12, 1, T, sw12, lambda g, x: (g, x))
    record("COMM.23", T != sw23, 1, T, sw23, lambda g, x: (g, x))

    # T3 distributivity in the first and third slots
    a, b, c, d = np.ix_(ar, ar, ar, ar)
    for g in range(m):
        Tg = T[g]
        lhs = Tg[A[a, b], c, d]
        rhs = A[Tg[a, c, d], Tg[b, c, d]]
        record("T3.left", (lhs != rhs)[None], 1, lhs[None], rhs[None], lambda gg, x, g=g: ((g,), x))
        lhs = Tg[a, b, A[c, d]]
        rhs = A[Tg[a, b, c], Tg[a, b, d]]
        record("T3.right", (lhs != rhs)[None], 1, lhs[None], rhs[None], lambda gg, x, g=g: ((g,), x))

    # T4 ternary associativity (and T5 if strict)
    a, b, c, d, e = np.ix_(ar, ar, ar, ar, ar)
    for g1, g2 in itertools.product(range(m), repeat=2):
        inner = T[g1][a, b, c]
        lhs = T[g2][inner, d, e]
        mid = T[g2][a, T[g1][b, c, d], e]
        right = T[g2][a, b, T[g1][c, d, e]]
        build = lambda gg, x, g1=g1, g2=g2: ((g1, g2), x)
        record("T4.mid", (lhs != mid)[None], 1, lhs[None], mid[None], build)
        record("T4.right", (lhs != right)[None], 1, lhs[None], right[None], build)
        if mode.strict_t5:
            rhs5 = np.broadcast_to(T[G[g1, g2]][a, b, c], lhs.shape)
            record("T5", (lhs != rhs5)[None], 1, lhs[None], rhs5[None], build)
    if not mode.strict_t5:
        status["T5"] = "skipped"

    # associativity of the parameter operation
    gr = np.arange(m)
    lhs = G[G[:, :, None], gr[None, None, :]]
    rhs = G[gr[:, None, None], G[None, :, :]]
    record("GMUL", lhs != rhs, 3, lhs, rhs, lambda g, x: (g, ()))

    # T6 zero absorption
    lhs = T[:, 0, :, :]
    record("T6", lhs != 0, 1, lhs, np.zeros_like(lhs), lambda g, x: (g, (0,) + x))

    if model.e is None:
        status["E"] = "skipped"
    else:
        row = T[model.gamma0, model.e, model.e, :]
        record("E", row != ar, 0, row, ar, lambda g, x: ((), (model.e, model.e) + x))

    witnesses.sort(key=lambda w: (AXIOM_GROUPS.index(w.axiom.split(".")[0]), w.axiom, w.gammas, w.elements))
    return AxiomReport(mode, status, witnesses, failures)


def find_identity_idempotents(model: GammaSemiring) -> list[int]:
    """Elements ``e`` with ``{e, e, a}_gamma0 == a`` for every ``a``."""
    row = np.arange(model.n)
    T0 = model.tern[model.gamma0]
    return [e for e in range(model.n) if np.array_equal(T0[e, e], row)]


def units(model: GammaSemiring) -> list[int]:
    """Elements ``u`` with some ``v`` such that ``{u, v, x}_gamma0 == x`` for all ``x``."""
    row = np.arange(model.n)
    T0 = model.tern[model.gamma0]
    return [u for u in range(model.n) if any(np.array_equal(T0[u, v], row) for v in range(model.n))]


# ---------------------------------------------------------------------------
# relabeling and isomorphism


def _perm_arrays(perm: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(perm, dtype=np.int64)
    inv = np.empty_like(p)
    inv[p] = np.arange(len(p))
    return p, inv


def relabel_tables(model: GammaSemiring, sigma: Sequence[int], pi: Sequence[int]):
    s, si = _perm_arrays(sigma)
    p, pinv = _perm_arrays(pi)
    add = s[model.add[np.ix_(si, si)]]
    gmul = p[model.gmul[np.ix_(pinv, pinv)]]
    tern = s[model.tern[np.ix_(pinv, si, si, si)]]
    return add, gmul, tern


def relabel(model: GammaSemiring, sigma: Sequence[int], pi: Sequence[int] | None = None) -> GammaSemiring:
    """The isomorphic copy in which element ``a`` is renamed ``sigma[a]`` and parameter ``g`` is ``pi[g]``."""
    if pi is None:
        pi = range(model.m)
    if sigma[0] != 0:
        raise ValueError("relabelings must fix the additive identity 0")
    add, gmul, tern = relabel_tables(model, sigma, pi)
    e = None if model.e is None else int(sigma[model.e])
    return GammaSemiring(add, gmul, tern, e=e, gamma0=int(pi[model.gamma0]))


def carrier_permutations(n: int) -> Iterator[tuple[int, ...]]:
    for rest in itertools.permutations(range(1, n)):
        yield (0,) + rest


def parameter_permutations(m: int, permute_gamma: bool = True) -> Iterator[tuple[int, ...]]:
    if permute_gamma:
        yield from itertools.permutations(range(m))
    else:
        yield tuple(range(m))


def canonical_labeling(model: GammaSemiring, permute_gamma: bool = True) -> tuple[bytes, tuple[int, ...], tuple[int, ...]]:
    """Minimum encoding over all relabelings, with one relabeling attaining it."""
    best = None
    for pi in parameter_permutations(model.m, permute_gamma):
        for sigma in carrier_permutations(model.n):
            enc = encode_tables(model.n, model.m, *relabel_tables(model, sigma, pi))
            if best is None or enc < best[0]:
                best = (enc, sigma, pi)
    return best


def canonical_form(model: GammaSemiring, permute_gamma: bool = True) -> bytes:
    return canonical_labeling(model, permute_gamma)[0]


def canonical_model(model: GammaSemiring, permute_gamma: bool = True) -> GammaSemiring:
    _, sigma, pi = canonical_labeling(model, permute_gamma)
    return relabel(model, sigma, pi)


def census_hash(model: GammaSemiring, permute_gamma: bool = True) -> str:
    return hashlib.sha256(canonical_form(model, permute_gamma)).hexdigest()


@dataclass(frozen=True, eq=False)
class Morphism:
    """Carrier map ``sigma`` and parameter map ``pi`` from ``source`` to ``target``."""

    source: GammaSemiring
    target: GammaSemiring
    sigma: tuple[int, ...]
    pi: tuple[int, ...]

    def __call__(self, a: int) -> int:
        return self.sigma[a]

    def violations(self, limit: int = 8) -> list[str]:
        S, T = self.source, self.target
        sg, pi = self.sigma, self.pi
        out: list[str] = []
        if len(sg) != S.n or len(pi) != S.m:
            return [f"map sizes ({len(sg)}, {len(pi)}) do not match source ({S.n}, {S.m})"]
        if sg[0] != 0:
            out.append(f"sigma(0) = {sg[0]}")
        for a, b in itertools.product(range(S.n), repeat=2):
            if sg[S.add[a, b]] != T.add[sg[a], sg[b]]:
                out.append(f"add: sigma({a}+{b}) != sigma({a})+sigma({b})")
                if len(out) >= limit:
                    return out
        for g1, g2 in itertools.product(range(S.m), repeat=2):
            if pi[S.gmul[g1, g2]] != T.gmul[pi[g1], pi[g2]]:
                out.append(f"gmul: pi({g1}*{g2}) != pi({g1})*pi({g2})")
        for g in range(S.m):
            for a, b, c in itertools.product(range(S.n), repeat=3):
                if sg[S.tern[g, a, b, c]] != T.tern[pi[g], sg[a], sg[b], sg[c]]:
                    out.append(f"tern: sigma({{{a},{b},{c}}}_{g}) mismatch")
                    if len(out) >= limit:
                        return out
        return out

    @property
    def is_valid(self) -> bool:
        return not self.violations(limit=1)

    def is_bijective(self) -> bool:
        return sorted(self.sigma) == list(range(self.target.n)) and sorted(self.pi) == list(range(self.target.m))


def identity_morphism(model: GammaSemiring) -> Morphism:
    return Morphism(model, model, tuple(range(model.n)), tuple(range(model.m)))


def is_isomorphic(a: GammaSemiring, b: GammaSemiring, permute_gamma: bool = True) -> Morphism | None:
    """A bijective morphism ``a -> b`` when the canonical forms agree, else ``None``."""
    if (a.n, a.m) != (b.n, b.m):
        return None
    enc_a, sa, pa = canonical_labeling(a, permute_gamma)
    enc_b, sb, pb = canonical_labeling(b, permute_gamma)
    if enc_a != enc_b:
        return None
    _, sb_inv = _perm_arrays(sb)
    _, pb_inv = _perm_arrays(pb)
    sigma = tuple(int(sb_inv[sa[x]]) for x in range(a.n))
    pi = tuple(int(pb_inv[pa[g]]) for g in range(a.m))
    return Morphism(a, b, sigma, pi)


# ---------------------------------------------------------------------------
# constructions


def direct_product(x: GammaSemiring, y: GammaSemiring) -> GammaSemiring:
    """Componentwise product; both factors must share the parameter table.

    The pair ``(a, b)`` is stored at index ``a * y.n + b``.
    """
    if x.m != y.m or not np.array_equal(x.gmul, y.gmul):
        raise ValueError("factors must share the parameter set and its operation")
    nx, ny = x.n, y.n
    ia = np.arange(nx * ny) // ny
    ib = np.arange(nx * ny) % ny
    add = x.add[np.ix_(ia, ia)] * ny + y.add[np.ix_(ib, ib)]
    tern = x.tern[np.ix_(range(x.m), ia, ia, ia)] * ny + y.tern[np.ix_(range(y.m), ib, ib, ib)]
    e = None if x.e is None or y.e is None else x.e * ny + y.e
    return GammaSemiring(add, x.gmul, tern, e=e, gamma0=x.gamma0)


def from_functions(n: int, gammas: Sequence, add_fn, tern_fn, gmul_fn=None, e: int | None = None, gamma0: int = 0) -> GammaSemiring:
    """Build a model from Python callables; ``gammas`` are the parameter labels."""
    m = len(gammas)
    add = [[add_fn(a, b) for b in range(n)] for a in range(n)]
    index = {g: i for i, g in enumerate(gammas)}
    if gmul_fn is None:
        gmul = [[0] * m for _ in range(m)]
    else:
        gmul = [[index[gmul_fn(g, h)] for h in gammas] for g in gammas]
    tern = [[[[tern_fn(a, b, c, g) for c in range(n)] for b in range(n)] for a in range(n)] for g in gammas]
    return GammaSemiring(add, gmul, tern, e=e, gamma0=gamma0)


def iter_models(path: str | Path) -> Iterable[GammaSemiring]:
    """Model objects from a census NDJSON file (the summary line is skipped)."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            data = json.loads(line)
            if "add" in data:
                yield GammaSemiring.from_dict(data)
