"""Fractions, stalks, the structure presheaf and its gluing audit.

Fractions ``a/s`` are pairs with ``s`` in a multiplicative system ``S``.  Two
pairs are related when some ``u`` in ``S`` and parameter ``g`` give
``{u, a, t}_g == {u, b, s}_g``; classes are the transitive closure.  With the
identity idempotent ``e`` and ``g0 = gamma0``::

    a/s + b/t       = ({a, t, e}_g0 + {b, s, e}_g0) / {s, t, e}_g0
    {a/s, b/t, c/u}_g = {a, b, c}_g / {s, t, u}_g0

The product denominator uses ``g0`` because every valid model with ``e``
satisfies ``{a, b, c}_g = a*b*c*{e, e, e}_g`` for ``x*y = {x, y, e}_g0``, so the
parameter factor must appear only once.  ``denominator="gamma"`` selects the
variant ``{s, t, u}_g`` for comparison.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import LocalizationError, PreconditionError
from .ideals import Ideal, SpectrumData, _UnionFind, all_proper_ideals, ideal_closure, prime_violation, spectrum
from .model import GammaSemiring, Morphism, is_isomorphic, units


# ---------------------------------------------------------------------------
# multiplicative systems


@dataclass(frozen=True)
class MultSystem:
    mask: int
    n: int

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(a for a in range(self.n) if self.mask >> a & 1)

    def __contains__(self, a: int) -> bool:
        return bool(self.mask >> a & 1)

    def __repr__(self) -> str:
        return "S{" + ",".join(map(str, self.members)) + "}"


def closure_violation(model: GammaSemiring, elements) -> tuple[int, int, int, int, int] | None:
    """First ``(g, a, b, c, value)`` with ``a, b, c`` in the set but the product outside."""
    els = sorted(set(elements))
    inside = set(els)
    for g in range(model.m):
        for a, b, c in itertools.combinations_with_replacement(els, 3):
            for x, y, z in {(a, b, c), (b, a, c), (c, b, a), (a, c, b), (b, c, a), (c, a, b)}:
                v = int(model.tern[g, x, y, z])
                if v not in inside:
                    return (g, x, y, z, v)
    return None


def mult_system(model: GammaSemiring, elements) -> MultSystem:
    """Validate ``elements`` as a multiplicative system containing ``e``."""
    els = sorted(set(elements))
    if model.e is None:
        raise PreconditionError("model has no identity idempotent")
    if model.e not in els:
        raise PreconditionError(f"identity idempotent {model.e} is not in {els}", witness=("e", model.e))
    w = closure_violation(model, els)
    if w is not None:
        raise PreconditionError(f"{els} is not closed under the ternary products", witness=w)
    mask = 0
    for a in els:
        mask |= 1 << a
    return MultSystem(mask, model.n)


def prime_complement(model: GammaSemiring, primes) -> MultSystem:
    """Elements outside every prime in ``primes`` (the whole carrier if none)."""
    mask = (1 << model.n) - 1
    for p in primes:
        mask &= ~p.mask
    return mult_system(model, [a for a in range(model.n) if mask >> a & 1])


# ---------------------------------------------------------------------------
# localization


@dataclass(eq=False)
class LocalizedSemiring:
    """Fraction classes with operation tables indexed by class.

    ``classes[k]`` lists the pairs ``(a, s)`` of class ``k``; class 0 holds
    ``0/s``.  ``phi[a]`` is the class of ``a/e``.  ``closure_added`` records
    whether the raw fraction relation needed transitive closure.
    """

    model: GammaSemiring
    S: MultSystem
    classes: list[tuple[tuple[int, int], ...]]
    add: np.ndarray
    tern: np.ndarray
    phi: tuple[int, ...]
    closure_added: bool
    relation: str
    denominator: str
    maximal: tuple[int, ...] | None = None
    _lookup: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return len(self.classes)

    def class_of(self, a: int, s: int) -> int:
        return self._lookup[(a, s)]

    @cached_property
    def identity(self) -> int:
        return self.class_of(self.model.e, self.model.e)

    def as_model(self) -> GammaSemiring:
        return GammaSemiring(self.add, self.model.gmul, self.tern, e=self.identity, gamma0=self.model.gamma0)

    def canonical_morphism(self) -> Morphism:
        return Morphism(self.model, self.as_model(), self.phi, tuple(range(self.model.m)))

    def to_dict(self) -> dict:
        out = {
            "S": list(self.S.members),
            "classes": [[list(p) for p in c] for c in self.classes],
            "add": self.add.tolist(),
            "tern": self.tern.tolist(),
            "phi": list(self.phi),
            "validity": {
                "well_defined": True,
                "closure_added_pairs": self.closure_added,
                "phi_is_morphism": self.canonical_morphism().is_valid,
                "relation": self.relation,
                "denominator": self.denominator,
            },
        }
        if self.maximal is not None:
            out["maximal"] = list(self.maximal)
        return out


def localize(
    model: GammaSemiring, S: MultSystem | None = None, *, elements=None, relation: str = "any", denominator: str = "gamma0"
) -> LocalizedSemiring:
    """Localize at ``S`` (or at the system spanned by ``elements``, validated).

    ``relation="any"`` quantifies over every parameter in the fraction relation;
    ``"gamma0"`` uses the fixed one only.
    """
    if S is None:
        S = mult_system(model, elements)
    if model.e is None or model.e not in S:
        raise PreconditionError("localization needs the identity idempotent inside S", witness=("e", model.e))
    if relation not in ("any", "gamma0") or denominator not in ("gamma0", "gamma"):
        raise ValueError("relation must be 'any' or 'gamma0'; denominator 'gamma0' or 'gamma'")
    n, m, e, g0 = model.n, model.m, model.e, model.gamma0
    T, A = model.tern, model.add
    Smem = np.array(S.members)
    pairs = [(a, s) for a in range(n) for s in S.members]
    P = len(pairs)
    pa = np.array([p[0] for p in pairs])
    ps = np.array([p[1] for p in pairs])
    index = -np.ones((n, n), dtype=np.int64)
    index[pa, ps] = np.arange(P)

    gammas = range(m) if relation == "any" else [g0]
    R = np.zeros((P, P), dtype=bool)
    for g in gammas:
        # [u, p, q]: {u, a_p, s_q}_g == {u, a_q, s_p}_g
        left = T[g][Smem[:, None, None], pa[None, :, None], ps[None, None, :]]
        right = T[g][Smem[:, None, None], pa[None, None, :], ps[None, :, None]]
        R |= (left == right).any(axis=0)
    closure_added = bool(((R.astype(np.int64) @ R.astype(np.int64)) > 0)[~R].any())

    uf = _UnionFind(P)
    for p, q in zip(*np.nonzero(R)):
        uf.union(int(p), int(q))
    roots = [uf.find(p) for p in range(P)]
    order = sorted(set(roots))  # roots are class minima, pairs are sorted
    cls = np.array([order.index(r) for r in roots])
    classes = [tuple(pairs[p] for p in range(P) if cls[p] == k) for k in range(len(order))]
    k = len(classes)

    # addition on all representative pairs
    num = A[T[g0][pa[:, None], ps[None, :], e], T[g0][pa[None, :], ps[:, None], e]]
    den = T[g0][ps[:, None], ps[None, :], e]
    res = cls[index[num, den]]
    add_tab = _collapse(res, cls, k, "addition", pairs)

    tern_tab = np.zeros((m, k, k, k), dtype=np.int64)
    for g in range(m):
        num = T[g][pa[:, None, None], pa[None, :, None], pa[None, None, :]]
        dg = g0 if denominator == "gamma0" else g
        den = T[dg][ps[:, None, None], ps[None, :, None], ps[None, None, :]]
        bad = np.argwhere(index[num, den] < 0)
        if len(bad):
            p, q, r = (int(v) for v in bad[0])
            raise LocalizationError(
                f"denominator {int(den[p, q, r])} of the product is outside S",
                witness=(g, pairs[p], pairs[q], pairs[r]),
            )
        res = cls[index[num, den]]
        tern_tab[g] = _collapse(res, cls, k, f"product {g}", pairs)

    lookup = {pairs[p]: int(cls[p]) for p in range(P)}
    phi = tuple(lookup[(a, e)] for a in range(n))
    return LocalizedSemiring(model, S, classes, add_tab, tern_tab, phi, closure_added, relation, denominator, None, lookup)


def _collapse(res: np.ndarray, cls: np.ndarray, k: int, what: str, pairs) -> np.ndarray:
    """Class-level table from a pair-level result; raises on ill-defined operations."""
    d = res.ndim
    out = -np.ones((k,) * d, dtype=np.int64)
    for idx in itertools.product(range(len(cls)), repeat=d):
        key = tuple(int(cls[i]) for i in idx)
        v = int(res[idx])
        if out[key] < 0:
            out[key] = v
        elif out[key] != v:
            first = next(j for j in itertools.product(range(len(cls)), repeat=d) if tuple(int(cls[i]) for i in j) == key)
            raise LocalizationError(
                f"{what} is not well defined on classes",
                witness={"representatives": [[pairs[i] for i in first], [pairs[i] for i in idx]], "results": [int(out[key]), v]},
            )
    return out


def stalk_at(model: GammaSemiring, p: Ideal, **kwargs) -> LocalizedSemiring:
    """Localization at the complement of the prime ``p``, with its maximal ideal."""
    if not p.is_proper or prime_violation(model, p) is not None:
        raise PreconditionError(f"{p} is not a prime")
    loc = localize(model, elements=[a for a in range(model.n) if a not in p], **kwargs)
    loc.maximal = tuple(sorted({loc.class_of(a, s) for (a, s) in loc._lookup if a in p}))
    return loc


def is_local_with_maximal(loc: LocalizedSemiring) -> bool:
    """Non-units of the stalk are exactly its maximal ideal."""
    non_units = sorted(set(range(loc.size)) - set(units(loc.as_model())))
    return loc.maximal is not None and tuple(non_units) == loc.maximal


def is_primitive(model: GammaSemiring, p: Ideal, mode: str = "literal") -> bool:
    """The stalk at ``p`` has no proper nonzero ideals."""
    loc = stalk_at(model, p)
    return all(len(I) == 1 for I in all_proper_ideals(loc.as_model(), mode))


# ---------------------------------------------------------------------------
# the structure presheaf


class StructurePresheaf:
    """Sections over sets of primes, with cached localizations and restriction maps.

    Sections over ``U`` localize at the elements outside every prime of ``U``;
    the empty set gives the one-class (zero) semiring.
    """

    def __init__(self, model: GammaSemiring, spec: SpectrumData | None = None, **kwargs):
        if model.e is None:
            raise PreconditionError("the structure presheaf needs an identity idempotent")
        self.model = model
        self.spec = spectrum(model) if spec is None else spec
        self.kwargs = kwargs
        self._cache: dict[int, LocalizedSemiring] = {}

    def _system_mask(self, U) -> int:
        mask = (1 << self.model.n) - 1
        for i in U:
            mask &= ~self.spec.primes[i].mask
        return mask

    def on(self, U) -> LocalizedSemiring:
        mask = self._system_mask(U)
        loc = self._cache.get(mask)
        if loc is None:
            els = [a for a in range(self.model.n) if mask >> a & 1]
            loc = self._cache[mask] = localize(self.model, MultSystem(mask, self.model.n), **self.kwargs)
            # the complement of a union of primes is always closed; assert it
            w = closure_violation(self.model, els)
            if w is not None:
                raise PreconditionError("complement of primes is not multiplicatively closed", witness=w)
        return loc

    def restriction(self, U, V) -> tuple[int, ...]:
        """Class map from sections over ``U`` to sections over ``V`` (``V`` inside ``U``)."""
        U, V = frozenset(U), frozenset(V)
        if not V <= U:
            raise PreconditionError(f"{sorted(V)} is not contained in {sorted(U)}")
        src, dst = self.on(U), self.on(V)
        out = []
        for c in src.classes:
            images = {dst.class_of(a, s) for a, s in c}
            if len(images) != 1:
                raise LocalizationError("restriction is not well defined", witness={"class": c, "images": sorted(images)})
            out.append(images.pop())
        return tuple(out)


def sections(model: GammaSemiring, I: Ideal, spec: SpectrumData | None = None, **kwargs) -> LocalizedSemiring:
    sheaf = StructurePresheaf(model, spec, **kwargs)
    return sheaf.on(sheaf.spec.basic_open(I))


@dataclass
class GluingReport:
    target: tuple[int, ...]
    cover: list[tuple[int, ...]]
    sections: int
    families: int
    injective: bool
    surjective: bool
    witness: dict | None = None

    @property
    def passed(self) -> bool:
        return self.injective and self.surjective

    def to_dict(self) -> dict:
        return {
            "target": list(self.target),
            "cover": [list(u) for u in self.cover],
            "sections": self.sections,
            "families": self.families,
            "injective": self.injective,
            "surjective": self.surjective,
            "passed": self.passed,
            "witness": self.witness,
        }


def compatible_families(sheaf: StructurePresheaf, opens: list[frozenset]) -> list[tuple[int, ...]]:
    """Tuples of sections agreeing on every pairwise overlap (extensional intersection)."""
    k = len(opens)
    sizes = [sheaf.on(U).size for U in opens]
    res = {}
    for i in range(k):
        for j in range(i + 1, k):
            W = opens[i] & opens[j]
            res[i, j] = (sheaf.restriction(opens[i], W), sheaf.restriction(opens[j], W))
    out = []
    cur: list[int] = []

    def rec(i: int) -> None:
        if i == k:
            out.append(tuple(cur))
            return
        for x in range(sizes[i]):
            if all(res[j, i][0][cur[j]] == res[j, i][1][x] for j in range(i)):
                cur.append(x)
                rec(i + 1)
                cur.pop()

    rec(0)
    return out


def check_gluing_opens(sheaf: StructurePresheaf, target: frozenset, opens: list[frozenset]) -> GluingReport:
    union = frozenset().union(*opens) if opens else frozenset()
    if union != target:
        raise PreconditionError(f"cover union {sorted(union)} differs from {sorted(target)}")
    fams = compatible_families(sheaf, opens)
    maps = [sheaf.restriction(target, U) for U in opens]
    glob = sheaf.on(target)
    image: dict[tuple, int] = {}
    witness = None
    injective = True
    for x in range(glob.size):
        fam = tuple(r[x] for r in maps)
        if fam in image and injective:
            injective = False
            witness = {"kind": "non-unique gluing", "sections": [image[fam], x], "family": list(fam)}
        image.setdefault(fam, x)
    missing = [f for f in fams if f not in image]
    if missing and witness is None:
        witness = {"kind": "family without a section", "family": list(missing[0])}
    return GluingReport(
        tuple(sorted(target)), [tuple(sorted(U)) for U in opens], glob.size, len(fams), injective, not missing, witness
    )


def check_sheaf_gluing(model: GammaSemiring, I: Ideal, cover: list[Ideal], spec: SpectrumData | None = None, **kwargs) -> GluingReport:
    """Compatible families over the cover of ``D(I)`` versus sections over ``D(I)``."""
    sheaf = StructurePresheaf(model, spec, **kwargs)
    sp = sheaf.spec
    return check_gluing_opens(sheaf, sp.basic_open(I), [sp.basic_open(J) for J in cover])


def covers_of(spec: SpectrumData, I: Ideal) -> list[list[Ideal]]:
    """Every cover of ``D(I)`` by basic opens, one ideal per distinct open, no repeats."""
    target = spec.basic_open(I)
    reps: dict[frozenset, Ideal] = {}
    for J in spec.ideals:
        U = spec.basic_open(J)
        if U <= target and U not in reps:
            reps[U] = J
    opens = sorted(reps, key=lambda U: (len(U), sorted(U)))
    out = []
    for r in range(len(opens) + 1):
        for combo in itertools.combinations(opens, r):
            if frozenset().union(*combo) == target:
                out.append([reps[U] for U in combo])
    return out


def canonical_cover(spec: SpectrumData) -> list[frozenset]:
    """``D(p)`` for every prime, plus the whole spectrum when their union is proper."""
    opens = [spec.basic_open(p) for p in spec.primes]
    union = frozenset().union(*opens) if opens else frozenset()
    if union != spec.points:
        opens.append(spec.points)
    return opens


def families_model(sheaf: StructurePresheaf, opens: list[frozenset]) -> tuple[GammaSemiring, list[tuple[int, ...]]]:
    """The compatible families over ``opens`` as a model with componentwise operations."""
    fams = compatible_families(sheaf, opens)
    fams.sort()
    where = {f: i for i, f in enumerate(fams)}
    locs = [sheaf.on(U) for U in opens]
    model = sheaf.model
    k = len(fams)
    add = np.zeros((k, k), dtype=np.int64)
    for i, j in itertools.product(range(k), repeat=2):
        add[i, j] = where[tuple(int(L.add[x, y]) for L, x, y in zip(locs, fams[i], fams[j]))]
    tern = np.zeros((model.m, k, k, k), dtype=np.int64)
    for g in range(model.m):
        for i, j, l in itertools.product(range(k), repeat=3):
            tern[g, i, j, l] = where[tuple(int(L.tern[g, x, y, z]) for L, x, y, z in zip(locs, fams[i], fams[j], fams[l]))]
    unit = tuple(L.identity for L in locs)
    return GammaSemiring(add, model.gmul, tern, e=where.get(unit), gamma0=model.gamma0), fams


@dataclass
class GlobalSections:
    sections: GammaSemiring
    isomorphism: Morphism | None
    cover: list[tuple[int, ...]]

    @property
    def recovers_model(self) -> bool:
        return self.isomorphism is not None

    def to_dict(self) -> dict:
        return {
            "size": self.sections.n,
            "isomorphic": self.recovers_model,
            "cover": [list(u) for u in self.cover],
            "sigma": None if self.isomorphism is None else list(self.isomorphism.sigma),
        }


def global_sections(model: GammaSemiring, spec: SpectrumData | None = None, **kwargs) -> GlobalSections:
    """Compatible families over the canonical cover, compared with the model."""
    sheaf = StructurePresheaf(model, spec, **kwargs)
    opens = canonical_cover(sheaf.spec)
    gs, _ = families_model(sheaf, opens)
    return GlobalSections(gs, is_isomorphic(model, gs), [tuple(sorted(U)) for U in opens])


# ---------------------------------------------------------------------------
# universal property and spectral maps


@dataclass
class UniversalReport:
    candidates: int
    solutions: list[tuple[int, ...]]

    @property
    def unique(self) -> bool:
        return len(self.solutions) == 1

    def to_dict(self) -> dict:
        return {"candidates": self.candidates, "solutions": [list(s) for s in self.solutions], "unique": self.unique}


def check_universal_property(model: GammaSemiring, S: MultSystem, target: GammaSemiring, f: Morphism, **kwargs) -> UniversalReport:
    """Brute-force every map from the fractions to ``target`` extending ``f``."""
    bad = f.violations(limit=1)
    if bad:
        raise PreconditionError(f"f is not a morphism: {bad[0]}")
    inv = set(units(target))
    for s in S.members:
        if f.sigma[s] not in inv:
            raise PreconditionError(f"f maps {s} in S to the non-unit {f.sigma[s]}", witness=("non-unit", s, f.sigma[s]))
    loc = localize(model, S, **kwargs)
    L = loc.as_model()
    fixed: dict[int, int] = {}
    for a in range(model.n):
        c = loc.phi[a]
        if fixed.setdefault(c, f.sigma[a]) != f.sigma[a]:
            return UniversalReport(0, [])
    free = [c for c in range(loc.size) if c not in fixed]
    solutions = []
    count = 0
    for vals in itertools.product(range(target.n), repeat=len(free)):
        sigma = dict(fixed)
        sigma.update(zip(free, vals))
        cand = Morphism(L, target, tuple(sigma[c] for c in range(loc.size)), f.pi)
        count += 1
        if cand.is_valid:
            solutions.append(cand.sigma)
    return UniversalReport(count, solutions)


@dataclass
class PullbackReport:
    mapping: dict[int, int | None]
    counterexamples: list[dict]
    continuity_failures: list[dict]

    @property
    def passed(self) -> bool:
        return not self.counterexamples and not self.continuity_failures

    def to_dict(self) -> dict:
        return {
            "mapping": {str(k): v for k, v in self.mapping.items()},
            "counterexamples": self.counterexamples,
            "continuity_failures": self.continuity_failures,
            "passed": self.passed,
        }


def spectral_pullback(f: Morphism, mode: str = "literal") -> PullbackReport:
    """``q -> f^{-1}(q)`` from the target spectrum to the source spectrum.

    Each preimage is tested for being a prime of the source; continuity is
    checked as ``{q : J not in f^{-1}(q)} == D(<f(J)>)`` for every source ideal ``J``.
    """
    src, dst = f.source, f.target
    sp_src, sp_dst = spectrum(src, mode), spectrum(dst, mode)
    mapping: dict[int, int | None] = {}
    counter = []
    pre_masks = {}
    for i, q in enumerate(sp_dst.primes):
        pre = Ideal.of([a for a in range(src.n) if f.sigma[a] in q], src.n)
        pre_masks[i] = pre
        if pre in sp_src.primes:
            mapping[i] = sp_src.primes.index(pre)
        else:
            mapping[i] = None
            reason = "preimage is the whole carrier" if not pre.is_proper else "preimage is not a prime ideal"
            counter.append({"prime": list(q.members), "preimage": list(pre.members), "reason": reason})
    cont = []
    for J in sp_src.ideals:
        left = frozenset(i for i, pre in pre_masks.items() if not J.issubset(pre))
        image = ideal_closure(dst, sorted({f.sigma[a] for a in J.members}), mode)
        right = sp_dst.basic_open(image)
        if left != right:
            cont.append({"ideal": list(J.members), "preimage_of_open": sorted(left), "open_of_image": sorted(right)})
    return PullbackReport(mapping, counter, cont)
