"""Prime weights, fuzzy opens, weighted covers and thresholded closures.

Every weight is an exact ``Fraction``; thresholds compare exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import PreconditionError
from .ideals import Ideal, SpectrumData
from .localization import LocalizedSemiring, localize, stalk_at
from .model import GammaSemiring

SCHEMES = ("uniform", "frequency", "file")
ONE = Fraction(1)
ZERO = Fraction(0)


def as_fraction(x) -> Fraction:
    """Exact rational from ``"p/q"``, a decimal string, an int or a Fraction."""
    if isinstance(x, float):
        raise TypeError("floats are not accepted as weights; pass a string such as '0.6'")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot read {x!r} as a rational: {exc}") from None


def _unit_interval(x: Fraction, what: str) -> Fraction:
    if not ZERO <= x <= ONE:
        raise ValueError(f"{what} = {x} is outside [0, 1]")
    return x


@dataclass(frozen=True)
class WeightedSpectrum:
    spec: SpectrumData
    weights: dict[int, Fraction]
    scheme: str

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown weight scheme {self.scheme!r}")
        for i in range(len(self.spec.primes)):
            if i not in self.weights:
                raise ValueError(f"prime {i} has no weight")
            _unit_interval(self.weights[i], f"W({i})")

    def __getitem__(self, i: int) -> Fraction:
        return self.weights[i]

    def to_dict(self) -> dict:
        return {"scheme": self.scheme, "weights": {str(i): str(w) for i, w in sorted(self.weights.items())}}


def assign_weights(spec: SpectrumData, scheme: str = "uniform", weights: dict | None = None) -> WeightedSpectrum:
    """``uniform`` gives 1 everywhere; ``frequency`` gives the share of proper ideals
    ``I`` with the prime in ``D(I)``; ``file`` validates user weights."""
    k = len(spec.primes)
    if scheme == "uniform":
        return WeightedSpectrum(spec, {i: ONE for i in range(k)}, scheme)
    if scheme == "frequency":
        proper = spec.proper_ideals
        total = len(proper)
        out = {}
        for i in range(k):
            hits = sum(1 for I in proper if i in spec.basic_open(I))
            out[i] = Fraction(hits, total)
        return WeightedSpectrum(spec, out, scheme)
    if scheme == "file":
        if weights is None:
            raise ValueError("file scheme needs weights")
        parsed = {int(i): _unit_interval(as_fraction(w), f"W({i})") for i, w in weights.items()}
        extra = sorted(set(parsed) - set(range(k)))
        if extra:
            raise ValueError(f"weights given for nonexistent primes {extra}")
        return WeightedSpectrum(spec, parsed, scheme)
    raise ValueError(f"unknown weight scheme {scheme!r}")


def load_weights(path: str | Path, spec: SpectrumData) -> WeightedSpectrum:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("scheme", "file") != "file":
        return assign_weights(spec, data["scheme"])
    return assign_weights(spec, "file", data["weights"])


def save_weights(W: WeightedSpectrum, path: str | Path) -> None:
    Path(path).write_text(json.dumps(W.to_dict(), sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# fuzzy opens


@dataclass(frozen=True)
class FuzzyOpen:
    """Degrees on the basic opens, keyed by the open as a frozenset of prime indices."""

    values: dict[frozenset, Fraction]

    @classmethod
    def from_points(cls, spec: SpectrumData, point_values: dict[int, object]) -> "FuzzyOpen":
        """Extend pointwise degrees to every basic open by taking the maximum."""
        pv = {int(i): as_fraction(v) for i, v in point_values.items()}
        opens = {spec.basic_open(I) for I in spec.ideals}
        return cls({U: max((pv.get(i, ZERO) for i in U), default=ZERO) for U in opens})

    @classmethod
    def indicator(cls, spec: SpectrumData) -> "FuzzyOpen":
        return cls.from_points(spec, {i: 1 for i in range(len(spec.primes))})

    def __call__(self, U) -> Fraction:
        return self.values[frozenset(U)]


@dataclass
class FuzzyReport:
    rule: str
    witnesses: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.witnesses

    def to_dict(self) -> dict:
        return {"rule": self.rule, "passed": self.passed, "witnesses": self.witnesses}


def validate_fuzzy_open(spec: SpectrumData, mu: FuzzyOpen, rule: str = "isotone") -> FuzzyReport:
    """Check boundary values, the max and min rules and monotonicity.

    ``rule="isotone"``: ``I <= J`` implies ``mu(D(I)) <= mu(D(J))``.
    ``rule="antitone"``: the reverse inequality, which together with the
    boundary values has no solutions on a nonempty spectrum.
    """
    if rule not in ("isotone", "antitone"):
        raise ValueError("rule must be 'isotone' or 'antitone'")
    rep = FuzzyReport(rule)
    opens = {}
    for I in spec.ideals:
        opens.setdefault(spec.basic_open(I), I)
    for U, I in opens.items():
        if U not in mu.values:
            rep.witnesses.append({"check": "defined", "open": sorted(U), "ideal": list(I.members)})
            continue
        if not ZERO <= mu.values[U] <= ONE:
            rep.witnesses.append({"check": "range", "open": sorted(U), "value": str(mu.values[U])})
    if rep.witnesses:
        return rep
    empty, full = frozenset(), spec.points
    if empty in mu.values and mu.values[empty] != 0:
        rep.witnesses.append({"check": "empty", "value": str(mu.values[empty])})
    if mu.values.get(full, ONE) != 1:
        rep.witnesses.append({"check": "whole", "value": str(mu.values[full])})
    keys = sorted(opens, key=lambda U: (len(U), sorted(U)))
    for a in keys:
        for b in keys:
            for op, name, agg in ((a | b, "max", max), (a & b, "min", min)):
                if op in mu.values and mu.values[op] != agg(mu.values[a], mu.values[b]):
                    rep.witnesses.append(
                        {"check": name, "opens": [sorted(a), sorted(b)], "value": str(mu.values[op]),
                         "expected": str(agg(mu.values[a], mu.values[b]))}
                    )
    for I in spec.ideals:
        for J in spec.ideals:
            if I != J and I.issubset(J):
                x, y = mu(spec.basic_open(I)), mu(spec.basic_open(J))
                bad = x > y if rule == "isotone" else x < y
                if bad:
                    rep.witnesses.append(
                        {"check": "monotone", "ideals": [list(I.members), list(J.members)], "values": [str(x), str(y)]}
                    )
    return rep


# ---------------------------------------------------------------------------
# weighted covers and closures


@dataclass(frozen=True)
class WeightedCover:
    target: Ideal
    members: tuple[tuple[Ideal, Fraction], ...]

    @classmethod
    def of(cls, target: Ideal, members) -> "WeightedCover":
        return cls(target, tuple((I, as_fraction(w)) for I, w in members))

    @property
    def total(self) -> Fraction:
        return sum((w for _, w in self.members), ZERO)

    @property
    def confidence(self) -> Fraction:
        return min((w for _, w in self.members), default=ONE)


@dataclass
class CoverReport:
    union_ok: bool
    sum_ok: bool
    weights_ok: bool
    total: Fraction
    missing: list[int]
    extra: list[int]

    @property
    def passed(self) -> bool:
        return self.union_ok and self.sum_ok and self.weights_ok

    def diagnostics(self) -> list[str]:
        out = []
        if self.missing:
            out.append(f"union misses primes {self.missing}")
        if self.extra:
            out.append(f"union exceeds the target by primes {self.extra}")
        if not self.sum_ok:
            out.append(f"weights sum to {self.total} < 1")
        if not self.weights_ok:
            out.append("some weight is outside (0, 1]")
        return out


def is_weighted_covering(spec: SpectrumData, cover: WeightedCover) -> CoverReport:
    """Exact union and total weight at least 1, each weight in ``(0, 1]``."""
    target = spec.basic_open(cover.target)
    union = frozenset().union(*(spec.basic_open(I) for I, _ in cover.members)) if cover.members else frozenset()
    total = cover.total
    return CoverReport(
        union == target,
        total >= 1,
        all(ZERO < w <= ONE for _, w in cover.members),
        total,
        sorted(target - union),
        sorted(union - target),
    )


def fuzzy_closure(spec: SpectrumData, I: Ideal, theta, W: WeightedSpectrum) -> frozenset:
    """Primes ``p`` of ``D(I)`` with ``W(p) >= theta``."""
    theta = as_fraction(theta)
    if not ZERO <= theta <= ONE:
        raise PreconditionError(f"threshold {theta} is outside [0, 1]")
    return frozenset(i for i in spec.basic_open(I) if W[i] >= theta)


def weighted_stalk(model: GammaSemiring, spec: SpectrumData, i: int, W: WeightedSpectrum, theta=ZERO) -> tuple[LocalizedSemiring, Fraction]:
    """Localization at the elements whose principal open contains a visible prime ``i``.

    The prime is visible when ``W(i) >= theta``; otherwise nothing is inverted
    except through 0 and the result is the zero semiring.  The confidence
    returned is ``W(i)``.
    """
    p = spec.primes[i]
    theta = as_fraction(theta)
    if W[i] >= theta:
        return stalk_at(model, p), W[i]
    return localize(model, elements=range(model.n)), W[i]


@dataclass
class CrispReport:
    closure_mismatches: list[dict]
    stalk_mismatches: list[dict]

    @property
    def passed(self) -> bool:
        return not self.closure_mismatches and not self.stalk_mismatches

    def to_dict(self) -> dict:
        return {"passed": self.passed, "closure_mismatches": self.closure_mismatches, "stalk_mismatches": self.stalk_mismatches}


THRESHOLDS = (Fraction(0), Fraction(1, 2), Fraction(1))


def crisp_reduction_check(model: GammaSemiring, spec: SpectrumData, thetas=THRESHOLDS) -> CrispReport:
    """With unit weights closures equal ``D(I)`` and weighted stalks equal crisp stalks."""
    W = assign_weights(spec, "uniform")
    rep = CrispReport([], [])
    for I in spec.proper_ideals:
        for t in thetas:
            got = fuzzy_closure(spec, I, t, W)
            if got != spec.basic_open(I):
                rep.closure_mismatches.append({"ideal": list(I.members), "theta": str(t), "closure": sorted(got)})
    if model.e is not None:
        for i, p in enumerate(spec.primes):
            crisp = stalk_at(model, p)
            for t in thetas:
                ws, conf = weighted_stalk(model, spec, i, W, t)
                if ws.classes != crisp.classes or conf != 1:
                    rep.stalk_mismatches.append({"prime": list(p.members), "theta": str(t)})
    return rep
