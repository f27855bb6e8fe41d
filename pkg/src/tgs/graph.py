"""Spectrum graph, Laplacian invariants, Čech cohomology of weighted covers, fingerprints."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from sympy import Matrix

from .abelian import quotient_invariants
from .errors import BudgetExceeded, PreconditionError
from .fuzzy import WeightedCover, WeightedSpectrum, assign_weights, is_weighted_covering
from .ideals import SpectrumData, _UnionFind, spectrum
from .localization import StructurePresheaf, canonical_cover, families_model, is_primitive
from .model import GammaSemiring, census_hash, is_isomorphic

FPV = 1
COCHAIN_BUDGET = 10**6


@dataclass
class SpectrumGraph:
    vertices: list[int]
    edges: list[tuple[int, int]]
    weights: dict[int, Fraction]
    mode: str

    @property
    def laplacian(self) -> np.ndarray:
        k = len(self.vertices)
        L = np.zeros((k, k), dtype=np.int64)
        for i, j in self.edges:
            L[i, j] -= 1
            L[j, i] -= 1
            L[i, i] += 1
            L[j, j] += 1
        return L

    def to_dict(self) -> dict:
        return {
            "vertices": self.vertices,
            "edges": [list(e) for e in self.edges],
            "weights": {str(i): str(w) for i, w in sorted(self.weights.items())},
            "mode": self.mode,
        }


def build_graph(model: GammaSemiring, spec: SpectrumData, W: WeightedSpectrum | None = None) -> SpectrumGraph:
    """Vertices are primes; ``i -- j`` when ``D(p_i)`` and ``D(p_j)`` meet."""
    W = assign_weights(spec, "uniform") if W is None else W
    k = len(spec.primes)
    opens = [spec.basic_open(p) for p in spec.primes]
    edges = [(i, j) for i, j in itertools.combinations(range(k), 2) if opens[i] & opens[j]]
    return SpectrumGraph(list(range(k)), edges, dict(W.weights), spec.mode)


def components(G: SpectrumGraph) -> list[list[int]]:
    uf = _UnionFind(len(G.vertices))
    for i, j in G.edges:
        uf.union(i, j)
    blocks: dict[int, list[int]] = {}
    for v in G.vertices:
        blocks.setdefault(uf.find(v), []).append(v)
    return sorted(blocks.values())


def laplacian_nullity(G: SpectrumGraph) -> int:
    k = len(G.vertices)
    if k == 0:
        return 0
    return k - Matrix(G.laplacian.tolist()).rank()


def laplacian_spectrum(G: SpectrumGraph) -> list[str]:
    """Eigenvalues of the Laplacian as exact sympy expressions (with multiplicity)."""
    if not G.vertices:
        return []
    ev = Matrix(G.laplacian.tolist()).eigenvals()
    return sorted((str(v) for v, mult in ev.items() for _ in range(mult)))


@dataclass
class StrataReport:
    components: int
    primitive: int | None

    @property
    def agree(self) -> bool | None:
        return None if self.primitive is None else self.components == self.primitive

    def to_dict(self) -> dict:
        return {"components": self.components, "primitive": self.primitive, "agree": self.agree}


def strata_report(model: GammaSemiring, spec: SpectrumData, G: SpectrumGraph) -> StrataReport:
    prim = None
    if model.e is not None:
        prim = sum(1 for p in spec.primes if is_primitive(model, p, spec.mode))
    return StrataReport(len(components(G)), prim)


# ---------------------------------------------------------------------------
# Čech cohomology of a weighted cover


def _cover_opens(spec: SpectrumData, cover: WeightedCover) -> list[frozenset]:
    rep = is_weighted_covering(spec, cover)
    if not rep.passed:
        raise PreconditionError("not a weighted cover: " + "; ".join(rep.diagnostics()))
    return [spec.basic_open(I) for I, _ in cover.members]


@dataclass
class H0Result:
    size: int
    isomorphic: bool
    confidence: Fraction
    sections: GammaSemiring

    def to_dict(self) -> dict:
        return {"size": self.size, "isomorphic_to_T": self.isomorphic, "confidence": str(self.confidence)}


def cech_h0(model: GammaSemiring, spec: SpectrumData, cover: WeightedCover) -> H0Result:
    """Compatible families over the cover (equalizer of the two restrictions to overlaps)."""
    opens = _cover_opens(spec, cover)
    sheaf = StructurePresheaf(model, spec)
    gs, _ = families_model(sheaf, opens)
    return H0Result(gs.n, is_isomorphic(model, gs) is not None, cover.confidence, gs)


@dataclass
class H1Result:
    mode: str  # "cech" or "laplacian-surrogate"
    orders: list[int] | None
    surrogate: int

    @property
    def value(self) -> int:
        if self.orders is None:
            return self.surrogate
        out = 1
        for d in self.orders:
            out *= d
        return out

    @property
    def vanishes(self) -> bool:
        return self.value == (0 if self.orders is None else 1)

    def to_dict(self) -> dict:
        return {"mode": self.mode, "cyclic_orders": self.orders, "laplacian_surrogate": self.surrogate}


def _negation(add: np.ndarray) -> list[int]:
    return [int(np.nonzero(add[x] == 0)[0][0]) for x in range(len(add))]


def cech_h1(model: GammaSemiring, spec: SpectrumData, cover: WeightedCover, budget: int = COCHAIN_BUDGET) -> H1Result:
    """``ker d1 / im d0`` on the alternating Čech complex of the cover.

    Needs additive groups on every section; otherwise returns the Laplacian
    surrogate (nullity minus components of the spectrum graph), tagged as such.
    """
    G = build_graph(model, spec)
    surrogate = laplacian_nullity(G) - len(components(G))
    if model.e is None or not model.is_group_complete():
        return H1Result("laplacian-surrogate", None, surrogate)
    opens = _cover_opens(spec, cover)
    sheaf = StructurePresheaf(model, spec)
    k = len(opens)
    pairs = list(itertools.combinations(range(k), 2))
    triples = list(itertools.combinations(range(k), 3))

    def sec(idx):
        U = frozenset(range(len(spec.primes)))
        for i in idx:
            U &= opens[i]
        return U

    loc = {idx: sheaf.on(sec(idx)) for idx in [(i,) for i in range(k)] + pairs + triples}
    neg = {idx: _negation(L.add) for idx, L in loc.items()}
    res = {}
    for idx in pairs + triples:
        for face in itertools.combinations(idx, len(idx) - 1):
            res[face, idx] = sheaf.restriction(sec(face), sec(idx))
    size1 = 1
    for p in pairs:
        size1 *= loc[p].size
    size0 = 1
    for i in range(k):
        size0 *= loc[(i,)].size
    if max(size0, size1) > budget:
        raise BudgetExceeded(f"Čech cochains have {size0} and {size1} elements, over the budget {budget}", max(size0, size1), budget)

    def d0(s):
        return tuple(
            int(loc[(i, j)].add[res[(j,), (i, j)][s[j]], neg[(i, j)][res[(i,), (i, j)][s[i]]]]) for i, j in pairs
        )

    def d1(t):
        out = []
        for a, b, c in triples:
            L, r = loc[(a, b, c)], neg[(a, b, c)]
            x = res[(b, c), (a, b, c)][t[pairs.index((b, c))]]
            y = r[res[(a, c), (a, b, c)][t[pairs.index((a, c))]]]
            z = res[(a, b), (a, b, c)][t[pairs.index((a, b))]]
            out.append(int(L.add[L.add[x, y], z]))
        return tuple(out)

    C1 = list(itertools.product(*[range(loc[p].size) for p in pairs]))
    zero2 = tuple([0] * len(triples))
    cocycles = [t for t in C1 if d1(t) == zero2]
    image = {d0(s) for s in itertools.product(*[range(loc[(i,)].size) for i in range(k)])}

    def add(t, u):
        return tuple(int(loc[p].add[x, y]) for p, x, y in zip(pairs, t, u))

    orders = quotient_invariants(cocycles, image, add, tuple([0] * len(pairs)))
    return H1Result("cech", orders, surrogate)


# ---------------------------------------------------------------------------
# fingerprints and export


def canonical_weighted_cover(spec: SpectrumData) -> WeightedCover:
    """The canonical cover with unit weights; an empty spectrum is covered by itself."""
    opens = canonical_cover(spec) or [spec.points]
    reps = {}
    for I in spec.ideals:
        reps.setdefault(spec.basic_open(I), I)
    whole = max(spec.ideals, key=len)
    return WeightedCover.of(whole, [(reps[U], 1) for U in opens])


@dataclass
class Fingerprint:
    census_hash: str
    spec_size: int
    components: int
    primitive: int | None
    nullity: int
    h0_size: int | None
    h0_isomorphic: bool | None
    h1: dict
    weights: dict
    mode: str
    findings: list[str]

    def to_dict(self) -> dict:
        return {
            "fpv": FPV,
            "census_hash": self.census_hash,
            "spec_size": self.spec_size,
            "components": self.components,
            "primitive_primes": self.primitive,
            "laplacian_nullity": self.nullity,
            "h0": {"size": self.h0_size, "isomorphic_to_T": self.h0_isomorphic},
            "h1": self.h1,
            "weights": self.weights,
            "mode": self.mode,
            "findings": self.findings,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def fingerprint(model: GammaSemiring, mode: str = "literal", scheme: str = "uniform", weights: dict | None = None) -> Fingerprint:
    spec = spectrum(model, mode)
    W = assign_weights(spec, scheme, weights)
    G = build_graph(model, spec, W)
    comps = len(components(G))
    nullity = laplacian_nullity(G)
    strata = strata_report(model, spec, G)
    findings = []
    if strata.agree is False:
        findings.append(f"components {comps} differ from primitive primes {strata.primitive}")
    h0_size = h0_iso = None
    if model.e is not None:
        cover = canonical_weighted_cover(spec)
        h0 = cech_h0(model, spec, cover)
        h0_size, h0_iso = h0.size, h0.isomorphic
        if not h0_iso:
            findings.append("sections over the canonical cover are not isomorphic to T")
        h1 = cech_h1(model, spec, cover)
    else:
        h1 = H1Result("laplacian-surrogate", None, nullity - comps)
    if h1.orders is not None and nullity != len(h1.orders):
        findings.append(f"Laplacian nullity {nullity} differs from the rank of Čech H1 ({len(h1.orders)})")
    return Fingerprint(
        census_hash(model), len(spec.primes), comps, strata.primitive, nullity, h0_size, h0_iso,
        h1.to_dict(), W.to_dict(), mode, findings,
    )


def to_dot(G: SpectrumGraph) -> str:
    lines = ["graph spectrum {", f'  mode="{G.mode}";']
    for v in G.vertices:
        lines.append(f'  p{v} [label="p{v}", weight="{G.weights.get(v, 1)}"];')
    for i, j in G.edges:
        lines.append(f"  p{i} -- p{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"
