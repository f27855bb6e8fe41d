"""Finite modules over a model: axioms, Hom, tensor products and friends.

A module on ``n`` elements has an addition table (identity 0) and an action
tensor ``action[g, a, b, x] = {a, b, x}_g`` of shape ``m x nT x nT x n``.
"""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .abelian import RelationQuotient, invariants, lcm
from .census import addition_tables
from .errors import BudgetExceeded, LocalizationError, PreconditionError, StructuralError
from .ideals import Congruence, Ideal, SpectrumData, _UnionFind, bourne_congruence, is_ideal, radical
from .localization import MultSystem, mult_system
from .model import GammaSemiring

DEFAULT_BUDGET = 10**6
DEFAULT_CAP = 10_000


def budget_from_env(default: int = DEFAULT_BUDGET) -> int:
    raw = os.environ.get("TGS_BUDGET")
    if raw is None:
        return default
    value = int(raw)
    if value <= 0:
        raise ValueError("TGS_BUDGET must be positive")
    return value


class GammaModule:
    __slots__ = ("n", "m", "nT", "add", "action", "_enc")

    def __init__(self, add, action):
        add = np.array(add, dtype=np.int64)
        action = np.array(action, dtype=np.int64)
        if add.ndim != 2 or add.shape[0] != add.shape[1] or add.shape[0] < 1:
            raise StructuralError(f"module addition must be square, got {add.shape}")
        n = add.shape[0]
        if action.ndim != 4 or action.shape[1] != action.shape[2] or action.shape[3] != n:
            raise StructuralError(f"action must have shape (m, nT, nT, {n}), got {action.shape}")
        for name, t in (("add", add), ("action", action)):
            bad = np.argwhere((t < 0) | (t >= n))
            if len(bad):
                cell = tuple(int(v) for v in bad[0])
                raise StructuralError(f"{name}{list(cell)} = {int(t[cell])} is outside 0..{n - 1}", cell=(name, cell))
        add.setflags(write=False)
        action.setflags(write=False)
        self.n = int(n)
        self.m = int(action.shape[0])
        self.nT = int(action.shape[1])
        self.add = add
        self.action = action
        self._enc = None

    def encoding(self) -> bytes:
        if self._enc is None:
            self._enc = bytes([self.n]) + self.add.astype(np.uint8).tobytes() + self.action.astype(np.uint8).tobytes()
        return self._enc

    def __eq__(self, other) -> bool:
        return isinstance(other, GammaModule) and self.encoding() == other.encoding()

    def __hash__(self) -> int:
        return hash(self.encoding())

    def __repr__(self) -> str:
        return f"GammaModule(n={self.n}, over nT={self.nT}, m={self.m})"

    def is_group_complete(self) -> bool:
        return bool(np.all((self.add == 0).any(axis=1)))

    def additive_order(self, x: int) -> int:
        k, y = 1, x
        while y != 0:
            y = int(self.add[y, x])
            k += 1
            if k > self.n + 1:
                return 0  # no finite order
        return k

    def to_dict(self, over: GammaSemiring | None = None) -> dict:
        return {
            "n": self.n,
            "add": self.add.tolist(),
            "action": self.action.tolist(),
            "over": None if over is None else over.digest(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GammaModule":
        try:
            M = cls(data["add"], data["action"])
        except KeyError as exc:
            raise StructuralError(f"module file is missing field {exc.args[0]!r}") from None
        except ValueError as exc:
            raise StructuralError(f"module tables are ragged: {exc}") from None
        if M.n != int(data["n"]):
            raise StructuralError(f"declared n={data['n']} but tables give n={M.n}")
        return M


def load_module(path) -> tuple[GammaModule, str | None]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return GammaModule.from_dict(data), data.get("over")


def _check_over(model: GammaSemiring, M: GammaModule) -> None:
    if (M.m, M.nT) != (model.m, model.n):
        raise PreconditionError(f"module action has shape for (m={M.m}, n={M.nT}), model is (m={model.m}, n={model.n})")


# ---------------------------------------------------------------------------
# constructions


def regular_module(model: GammaSemiring) -> GammaModule:
    """The model acting on itself through its ternary products."""
    return GammaModule(model.add, model.tern)


def zero_module(model: GammaSemiring) -> GammaModule:
    return GammaModule([[0]], np.zeros((model.m, model.n, model.n, 1), dtype=np.int64))


def direct_sum(M: GammaModule, N: GammaModule) -> GammaModule:
    """Pairs ``(x, y)`` stored at ``x * N.n + y``."""
    if (M.m, M.nT) != (N.m, N.nT):
        raise PreconditionError("summands live over different models")
    k = M.n * N.n
    ix = np.arange(k) // N.n
    iy = np.arange(k) % N.n
    add = M.add[np.ix_(ix, ix)] * N.n + N.add[np.ix_(iy, iy)]
    action = M.action[..., ix] * N.n + N.action[..., iy]
    return GammaModule(add, action)


def free_module(model: GammaSemiring, k: int) -> GammaModule:
    """``k``-fold direct sum of the regular module (``k = 0`` gives the zero module)."""
    if k == 0:
        return zero_module(model)
    F = regular_module(model)
    for _ in range(k - 1):
        F = direct_sum(F, regular_module(model))
    return F


def free_coords(n: int, k: int, idx: int) -> tuple[int, ...]:
    out = []
    for _ in range(k):
        out.append(idx % n)
        idx //= n
    return tuple(reversed(out))


def free_index(n: int, coords) -> int:
    idx = 0
    for c in coords:
        idx = idx * n + c
    return idx


def generated(M: GammaModule, gens) -> list[int]:
    """Submodule generated by ``gens`` (closure under addition and the action)."""
    seen = {0}
    frontier = [0] + [int(g) for g in gens]
    seen.update(frontier)
    acts = M.action.reshape(-1, M.n)
    while frontier:
        nxt = []
        for x in frontier:
            cand = set(int(v) for v in M.add[x, sorted(seen)])
            cand.update(int(v) for v in acts[:, x])
            for y in cand - seen:
                seen.add(y)
                nxt.append(y)
        frontier = nxt
    return sorted(seen)


def greedy_generators(M: GammaModule) -> list[int]:
    """Scan elements in order, keeping those outside the span of the ones kept."""
    gens: list[int] = []
    span = {0}
    for x in range(M.n):
        if x not in span:
            gens.append(x)
            span = set(generated(M, gens))
    return gens


def submodule(M: GammaModule, elements) -> tuple[GammaModule, list[int]]:
    """The closed subset ``elements`` as a module; also the inclusion map."""
    els = sorted(set(int(x) for x in elements))
    if not els or els[0] != 0:
        raise PreconditionError("a submodule must contain 0")
    pos = {x: i for i, x in enumerate(els)}
    arr = np.array(els)
    try:
        add = np.vectorize(pos.__getitem__)(M.add[np.ix_(arr, arr)])
        action = np.vectorize(pos.__getitem__)(M.action[..., arr])
    except KeyError as exc:
        raise PreconditionError(f"subset is not closed: {exc.args[0]} escapes") from None
    return GammaModule(add, action), els


# ---------------------------------------------------------------------------
# axioms


@dataclass
class ModuleReport:
    witnesses: list[dict] = field(default_factory=list)
    failures: dict[str, int] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.witnesses

    def to_dict(self) -> dict:
        return {"passed": self.passed, "failures": dict(self.failures), "witnesses": self.witnesses}


def check_module_axioms(model: GammaSemiring, M: GammaModule, max_witnesses: int = 32) -> ModuleReport:
    """Monoid laws, mixed associativity, additivity in the first slot and in the
    module argument, and both zero laws; every instance is checked."""
    _check_over(model, M)
    rep = ModuleReport()
    n, nT, m = M.n, model.n, model.m
    A, X, T, AT = M.add, M.action, model.tern, model.add

    def record(kind, bad, labels, lhs, rhs):
        idx = np.argwhere(bad)
        if not len(idx):
            return
        rep.failures[kind] = len(idx)
        for row in idx[:max_witnesses]:
            row = tuple(int(v) for v in row)
            rep.witnesses.append({"axiom": kind, **dict(zip(labels, row)), "lhs": int(lhs[row]), "rhs": int(rhs[row])})

    ar, at = np.arange(n), np.arange(nT)
    record("ADD.comm", A != A.T, ("x", "y"), A, A.T)
    record("ADD.zero", (A[0] != ar)[None], ("_", "x"), A[0][None], ar[None])
    lhs = A[A[:, :, None], ar[None, None, :]]
    rhs = A[ar[:, None, None], A[None, :, :]]
    record("ADD.assoc", lhs != rhs, ("x", "y", "z"), lhs, rhs)
    # zero laws
    zero_n = np.zeros_like(X[:, 0])
    record("ZERO.first", X[:, 0] != 0, ("g", "b", "x"), X[:, 0], zero_n)
    record("ZERO.module", X[..., 0] != 0, ("g", "a", "b"), X[..., 0], np.zeros_like(X[..., 0]))
    a, b, c, x = np.ix_(at, at, at, ar)
    for g in range(m):
        Xg = X[g]
        # {a + b, c, x} = {a, c, x} + {b, c, x}
        lhs = Xg[AT[a, b], c, x]
        rhs = A[Xg[a, c, x], Xg[b, c, x]]
        record(f"ADD.first[{g}]", lhs != rhs, ("a", "b", "c", "x"), lhs, rhs)
    a2, b2, x2, y2 = np.ix_(at, at, ar, ar)
    for g in range(m):
        Xg = X[g]
        lhs = Xg[a2, b2, A[x2, y2]]
        rhs = A[Xg[a2, b2, x2], Xg[a2, b2, y2]]
        record(f"ADD.module[{g}]", lhs != rhs, ("a", "b", "x", "y"), lhs, rhs)
    a, b, c, d, x = np.ix_(at, at, at, at, ar)
    for g1, g2 in itertools.product(range(m), repeat=2):
        lhs = X[g2][T[g1][a, b, c], d, x]
        rhs = X[g2][a, T[g1][b, c, d], x]
        record(f"MIX[{g1},{g2}]", lhs != rhs, ("a", "b", "c", "d", "x"), lhs, rhs)
    return rep


# ---------------------------------------------------------------------------
# Hom


@dataclass(frozen=True)
class ModuleMap:
    source: GammaModule
    target: GammaModule
    table: tuple[int, ...]

    def __call__(self, x: int) -> int:
        return self.table[x]


def map_violation(model: GammaSemiring, M: GammaModule, N: GammaModule, f) -> tuple | None:
    f = np.asarray(f)
    if f[0] != 0:
        return ("zero", 0, int(f[0]))
    bad = np.argwhere(f[M.add] != N.add[f[:, None], f[None, :]])
    if len(bad):
        return ("add",) + tuple(int(v) for v in bad[0])
    bad = np.argwhere(f[M.action] != N.action[..., f])
    if len(bad):
        return ("action",) + tuple(int(v) for v in bad[0])
    return None


def hom_set(model: GammaSemiring, M: GammaModule, N: GammaModule, budget: int | None = None) -> list[tuple[int, ...]]:
    """Every module map ``M -> N`` as a value table, sorted.

    Images of a generating set are chosen and propagated through sums and the
    action; inconsistent choices are dropped.
    """
    _check_over(model, M)
    _check_over(model, N)
    budget = budget_from_env() if budget is None else budget
    gens = greedy_generators(M)
    estimate = N.n ** len(gens)
    if estimate > budget:
        raise BudgetExceeded(
            f"|N|^(generators of M) = {N.n}^{len(gens)} = {estimate} exceeds the budget {budget}", estimate, budget
        )
    acts_M = M.action.reshape(-1, M.n)
    acts_N = N.action.reshape(-1, N.n)
    out = []
    for imgs in itertools.product(range(N.n), repeat=len(gens)):
        f = -np.ones(M.n, dtype=np.int64)
        f[0] = 0
        ok = True
        for g, v in zip(gens, imgs):
            if f[g] >= 0 and f[g] != v:
                ok = False
                break
            f[g] = v
        frontier = [0] + list(gens)
        while ok and frontier:
            nxt = []
            for x in frontier:
                known = np.nonzero(f >= 0)[0]
                pairs = [(int(M.add[x, y]), int(N.add[f[x], f[y]])) for y in known]
                pairs += list(zip(acts_M[:, x].tolist(), acts_N[:, f[x]].tolist()))
                for z, v in pairs:
                    if f[z] < 0:
                        f[z] = v
                        nxt.append(z)
                    elif f[z] != v:
                        ok = False
                        break
                if not ok:
                    break
            frontier = nxt
        if ok and (f >= 0).all() and map_violation(model, M, N, f) is None:
            out.append(tuple(int(v) for v in f))
    return sorted(set(out))


def hom_module(model: GammaSemiring, N: GammaModule, P: GammaModule, budget: int | None = None) -> tuple[GammaModule, list[tuple[int, ...]]]:
    """``Hom(N, P)`` with pointwise addition and action, plus its element list.

    The zero map is element 0.  Raises if the pointwise action leaves Hom.
    """
    maps = hom_set(model, N, P, budget)
    zero = tuple([0] * N.n)
    maps.sort(key=lambda f: (f != zero, f))
    where = {f: i for i, f in enumerate(maps)}
    k = len(maps)
    F = np.array(maps, dtype=np.int64).reshape(k, N.n)
    add = np.zeros((k, k), dtype=np.int64)
    for i, j in itertools.product(range(k), repeat=2):
        h = tuple(int(v) for v in P.add[F[i], F[j]])
        if h not in where:
            raise PreconditionError("Hom is not closed under pointwise addition", witness=(maps[i], maps[j]))
        add[i, j] = where[h]
    action = np.zeros((model.m, model.n, model.n, k), dtype=np.int64)
    for g, a, b in itertools.product(range(model.m), range(model.n), range(model.n)):
        for i in range(k):
            h = tuple(int(v) for v in P.action[g, a, b][F[i]])
            if h not in where:
                raise PreconditionError(
                    "Hom is not closed under the pointwise action", witness={"g": g, "a": a, "b": b, "map": list(maps[i])}
                )
            action[g, a, b, i] = where[h]
    return GammaModule(add, action), maps


# ---------------------------------------------------------------------------
# tensor products


@dataclass
class TensorResult:
    mode: str
    complete: bool
    module: GammaModule | None
    gen: np.ndarray | None  # gen[x, y] = class of x (x) y
    orders: list[int] | None = None
    note: str = ""

    @property
    def size(self) -> int | None:
        return None if self.module is None else self.module.n

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "complete": self.complete,
            "size": self.size,
            "cyclic_orders": self.orders,
            "note": self.note,
        }


def tensor(model: GammaSemiring, M: GammaModule, N: GammaModule, mode: str = "auto", cap: int = DEFAULT_CAP) -> TensorResult:
    """``M (x) N`` with the action on the left factor.

    ``mode="group"`` reduces integer relations (both additive monoids must be
    groups); ``mode="monoid"`` takes a congruence closure on the functions
    ``N -> M``, refusing when there are more than ``cap`` of them.
    """
    _check_over(model, M)
    _check_over(model, N)
    if mode == "auto":
        mode = "group" if M.is_group_complete() and N.is_group_complete() else "monoid"
    if mode == "group":
        return _tensor_group(model, M, N)
    if mode == "monoid":
        return _tensor_monoid(model, M, N, cap)
    raise ValueError(f"unknown tensor mode {mode!r}")


def _tensor_monoid(model: GammaSemiring, M: GammaModule, N: GammaModule, cap: int) -> TensorResult:
    nM, nN = M.n, N.n
    size = nM**nN
    if size > cap:
        return TensorResult("congruence-capped", False, None, None, note=f"{nM}^{nN} = {size} words exceed the cap {cap}")
    # word w <-> function y -> w_y in M; index in base nM with y = 0 most significant
    pw = nM ** np.arange(nN - 1, -1, -1)
    words = np.array(list(itertools.product(range(nM), repeat=nN)), dtype=np.int64).reshape(size, nN)

    def index(w) -> int:
        return int(np.dot(w, pw))

    def delta(x: int, y: int) -> np.ndarray:
        w = np.zeros(nN, dtype=np.int64)
        w[y] = x
        return w

    # translations by single deltas and the action maps (as index arrays)
    plus = {}
    for x in range(1, nM):
        for y in range(nN):
            d = delta(x, y)
            plus[(x, y)] = (M.add[words, d[None, :]] @ pw).astype(np.int64)
    acts = [(M.action[g, a, b][words] @ pw).astype(np.int64) for g in range(model.m) for a in range(model.n) for b in range(model.n)]
    maps = list(plus.values()) + acts

    uf = _UnionFind(size)
    pending = []
    for x in range(nM):
        pending.append((index(delta(x, 0)), 0))
        for y in range(nN):
            for y2 in range(nN):
                w = delta(x, y)
                w2 = delta(x, y2)
                s = M.add[w, w2]
                pending.append((index(delta(x, int(N.add[y, y2]))), index(s)))
            for g, a, b in itertools.product(range(model.m), range(model.n), range(model.n)):
                pending.append((index(delta(int(M.action[g, a, b, x]), y)), index(delta(x, int(N.action[g, a, b, y])))))
    for p, q in pending:
        uf.union(p, q)
    changed = True
    while changed:
        changed = False
        roots = np.array([uf.find(i) for i in range(size)])
        for f in maps:
            for i in np.nonzero(roots != np.arange(size))[0]:
                if uf.union(int(f[i]), int(f[roots[i]])):
                    changed = True
    roots = [uf.find(i) for i in range(size)]
    order = sorted(set(roots))
    pos = {r: k for k, r in enumerate(order)}
    cls = np.array([pos[r] for r in roots])
    k = len(order)
    reps = np.array(order)
    add = cls[M.add[words[reps][:, None, :], words[reps][None, :, :]] @ pw]
    action = np.zeros((model.m, model.n, model.n, k), dtype=np.int64)
    for g, a, b in itertools.product(range(model.m), range(model.n), range(model.n)):
        action[g, a, b] = cls[(M.action[g, a, b][words[reps]] @ pw)]
    gen = np.array([[cls[index(delta(x, y))] for y in range(nN)] for x in range(nM)], dtype=np.int64)
    return TensorResult("congruence-capped", True, GammaModule(add, action), gen)


def _tensor_group(model: GammaSemiring, M: GammaModule, N: GammaModule) -> TensorResult:
    if not (M.is_group_complete() and N.is_group_complete()):
        raise PreconditionError("group mode needs abelian groups on both sides")
    nM, nN = M.n, N.n
    if nM == 1 or nN == 1:
        return TensorResult("group-complete-exact", True, GammaModule([[0]], np.zeros((model.m, model.n, model.n, 1))), np.zeros((nM, nN), dtype=np.int64), [])
    k = nM * nN

    def v(*terms):
        row = [0] * k
        for sign, x, y in terms:
            row[x * nN + y] += sign
        return row

    rows = []
    for x, x2, y in itertools.product(range(nM), range(nM), range(nN)):
        rows.append(v((1, int(M.add[x, x2]), y), (-1, x, y), (-1, x2, y)))
    for x, y, y2 in itertools.product(range(nM), range(nN), range(nN)):
        rows.append(v((1, x, int(N.add[y, y2])), (-1, x, y), (-1, x, y2)))
    for g, a, b in itertools.product(range(model.m), range(model.n), range(model.n)):
        for x, y in itertools.product(range(nM), range(nN)):
            rows.append(v((1, int(M.action[g, a, b, x]), y), (-1, x, int(N.action[g, a, b, y]))))
    exponent = 1
    for x in range(nM):
        exponent = lcm(exponent, M.additive_order(x))
    Q = RelationQuotient(k, rows, exponent)
    orders = Q.orders
    elements = list(itertools.product(*[range(d) for d in orders]))
    pos = {e: i for i, e in enumerate(elements)}
    gen = np.array([[pos[Q.generator(x * nN + y)] for y in range(nN)] for x in range(nM)], dtype=np.int64)
    size = len(elements)
    E = np.array(elements, dtype=np.int64).reshape(size, len(orders))
    mods = np.array(orders, dtype=np.int64)
    add = np.zeros((size, size), dtype=np.int64)
    for i in range(size):
        for j in range(size):
            add[i, j] = pos[tuple(int(t) for t in (E[i] + E[j]) % mods)]
    # the action, propagated from 0 along pure tensors
    action = -np.ones((model.m, model.n, model.n, size), dtype=np.int64)
    action[..., 0] = 0
    frontier = [0]
    while frontier:
        nxt = []
        for c in frontier:
            for x, y in itertools.product(range(nM), range(nN)):
                c2 = int(add[c, gen[x, y]])
                img = add[action[..., c], gen[M.action[..., x], y]]
                if action[0, 0, 0, c2] < 0:
                    action[..., c2] = img
                    nxt.append(c2)
                elif not np.array_equal(action[..., c2], img):
                    raise PreconditionError("the action is not well defined on the tensor product")
        frontier = nxt
    return TensorResult("group-complete-exact", True, GammaModule(add, action), gen, list(orders))


# ---------------------------------------------------------------------------
# adjunction


@dataclass
class AdjunctionReport:
    left: int
    right: int
    bijective: bool
    natural: bool
    status: str = "checked"
    witness: dict | None = None
    bijection: list[tuple[int, int]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "checked" and self.bijective and self.natural

    def to_dict(self) -> dict:
        return {
            "left": self.left,
            "right": self.right,
            "bijective": self.bijective,
            "natural": self.natural,
            "status": self.status,
            "witness": self.witness,
        }


def check_adjunction(model: GammaSemiring, M: GammaModule, N: GammaModule, P: GammaModule, budget: int | None = None, cap: int = DEFAULT_CAP) -> AdjunctionReport:
    """Currying ``Hom(M (x) N, P) -> Hom(M, Hom(N, P))`` and its naturality in ``P``."""
    t = tensor(model, M, N, cap=cap)
    if not t.complete:
        return AdjunctionReport(0, 0, False, False, status="tensor-partial", witness={"note": t.note})
    HNP, hn_maps = hom_module(model, N, P, budget)
    where = {f: i for i, f in enumerate(hn_maps)}
    left = hom_set(model, t.module, P, budget)
    right = hom_set(model, M, HNP, budget)
    right_set = set(right)
    gen = t.gen

    def curry(phi) -> tuple[int, ...] | None:
        out = []
        for x in range(M.n):
            h = tuple(phi[gen[x, y]] for y in range(N.n))
            if h not in where:
                return None
            out.append(where[h])
        return tuple(out)

    images = []
    for i, phi in enumerate(left):
        c = curry(phi)
        if c is None or c not in right_set:
            return AdjunctionReport(len(left), len(right), False, False, witness={"map": list(phi), "reason": "curried map leaves Hom"})
        images.append(c)
    bijective = len(set(images)) == len(images) == len(right)
    bijection = [(i, right.index(c)) for i, c in enumerate(images)]
    natural = True
    witness = None
    # naturality: post-composition with every endomorphism g of P
    for g in hom_set(model, P, P, budget):
        for phi, c in zip(left, images):
            lhs = curry(tuple(g[v] for v in phi))
            rhs = tuple(where[tuple(g[v] for v in hn_maps[j])] for j in c)
            if lhs != rhs:
                natural = False
                witness = {"g": list(g), "map": list(phi)}
                break
        if not natural:
            break
    return AdjunctionReport(len(left), len(right), bijective, natural, witness=witness, bijection=bijection)


# ---------------------------------------------------------------------------
# annihilators, Schur map, localization and support


def annihilator(model: GammaSemiring, M: GammaModule) -> Ideal:
    """Elements ``t`` with ``{t, b, x}_g = 0`` for every ``b``, ``x`` and ``g``."""
    _check_over(model, M)
    zero = (M.action == 0).all(axis=(0, 2, 3))
    return Ideal.of([t for t in range(model.n) if zero[t]], model.n)


@dataclass
class SchurReport:
    endomorphisms: list[tuple[int, ...]]
    kernel: Congruence
    bourne: Congruence
    annihilator: Ideal

    @property
    def injective(self) -> bool:
        return len(set(self.endomorphisms)) == len(self.endomorphisms)

    @property
    def coincides(self) -> bool:
        return self.kernel == self.bourne

    @property
    def faithful(self) -> bool:
        return self.injective

    def to_dict(self) -> dict:
        return {
            "endomorphisms": [list(f) for f in self.endomorphisms],
            "kernel_blocks": [list(b) for b in self.kernel.blocks],
            "bourne_blocks": [list(b) for b in self.bourne.blocks],
            "annihilator": list(self.annihilator.members),
            "coincides": self.coincides,
            "faithful": self.faithful,
        }


def schur_map(model: GammaSemiring, M: GammaModule) -> SchurReport:
    """``t -> (x -> {t, e, x}_gamma0)`` compared with the Bourne classes of ``Ann(M)``."""
    if model.e is None:
        raise PreconditionError("the Schur map needs an identity idempotent")
    _check_over(model, M)
    e, g0 = model.e, model.gamma0
    endos = [tuple(int(v) for v in M.action[g0, t, e]) for t in range(model.n)]
    first: dict[tuple, int] = {}
    labels = tuple(first.setdefault(f, t) for t, f in enumerate(endos))
    ann = annihilator(model, M)
    return SchurReport(endos, Congruence(labels), bourne_congruence(model, ann), ann)


@dataclass
class LocalizedModule:
    module: GammaModule
    classes: list[tuple[tuple[int, int], ...]]
    phi: tuple[int, ...]
    closure_added: bool

    @property
    def size(self) -> int:
        return len(self.classes)


def localize_module(model: GammaSemiring, M: GammaModule, S: MultSystem, relation: str = "every") -> LocalizedModule:
    """Fractions ``x/s`` with ``x/s ~ y/t`` when ``{u, t, x}_g == {u, s, y}_g`` for some ``u``
    in ``S``; the result is again a module over the model.

    ``relation="every"`` needs one ``u`` working for every ``g``, ``"any"`` lets
    each ``g`` pick its own, ``"gamma0"`` looks at the fixed parameter only.
    """
    _check_over(model, M)
    if model.e is None or model.e not in S:
        raise PreconditionError("localization needs the identity idempotent inside S")
    e, g0 = model.e, model.gamma0
    T, X, A = model.tern, M.action, M.add
    Smem = list(S.members)
    pairs = [(x, s) for x in range(M.n) for s in Smem]
    P = len(pairs)
    px = np.array([p[0] for p in pairs])
    ps = np.array([p[1] for p in pairs])
    index = {p: i for i, p in enumerate(pairs)}
    if relation not in ("any", "every", "gamma0"):
        raise ValueError("relation must be 'any', 'every' or 'gamma0'")
    Sa = np.array(Smem)
    # eq[g, u, p, q]: {u, s_q, x_p}_g == {u, s_p, x_q}_g
    left = X[:, Sa[:, None, None], ps[None, None, :], px[None, :, None]]
    right = X[:, Sa[:, None, None], ps[None, :, None], px[None, None, :]]
    eq = left == right
    if relation == "any":
        R = eq.any(axis=0).any(axis=0)
    elif relation == "every":
        R = eq.all(axis=0).any(axis=0)
    else:
        R = eq[g0].any(axis=0)
    closure_added = bool(((R.astype(np.int64) @ R.astype(np.int64)) > 0)[~R].any())
    uf = _UnionFind(P)
    for p, q in zip(*np.nonzero(R)):
        uf.union(int(p), int(q))
    roots = [uf.find(p) for p in range(P)]
    order = sorted(set(roots))
    cls = np.array([order.index(r) for r in roots])
    k = len(order)
    classes = [tuple(pairs[p] for p in range(P) if cls[p] == c) for c in range(k)]

    def settle(table: dict, key, value, what):
        if table.setdefault(key, value) != value:
            raise LocalizationError(f"{what} is not well defined on module fractions", witness={"classes": key})

    add: dict = {}
    for p, q in itertools.product(range(P), repeat=2):
        (x, s), (y, t) = pairs[p], pairs[q]
        num = int(A[X[g0, t, e, x], X[g0, s, e, y]])
        den = int(T[g0, s, t, e])
        settle(add, (int(cls[p]), int(cls[q])), int(cls[index[(num, den)]]), "addition")
    act: dict = {}
    for g, a, b in itertools.product(range(model.m), range(model.n), range(model.n)):
        for p in range(P):
            x, s = pairs[p]
            settle(act, (g, a, b, int(cls[p])), int(cls[index[(int(X[g, a, b, x]), s)]]), "action")
    add_t = np.array([[add[i, j] for j in range(k)] for i in range(k)], dtype=np.int64)
    act_t = np.zeros((model.m, model.n, model.n, k), dtype=np.int64)
    for (g, a, b, c), v in act.items():
        act_t[g, a, b, c] = v
    phi = tuple(int(cls[index[(x, e)]]) for x in range(M.n))
    return LocalizedModule(GammaModule(add_t, act_t), classes, phi, closure_added)


@dataclass
class SupportReport:
    support: frozenset
    radical_support: frozenset

    @property
    def agrees(self) -> bool:
        return self.support == self.radical_support

    def to_dict(self) -> dict:
        return {"support": sorted(self.support), "radical_support": sorted(self.radical_support), "agrees": self.agrees}


def support(model: GammaSemiring, M: GammaModule, spec: SpectrumData, relation: str = "every") -> SupportReport:
    """Primes with a nonzero localization of ``M``, against ``V(rad Ann(M))``."""
    supp = set()
    for i, p in enumerate(spec.primes):
        S = mult_system(model, [a for a in range(model.n) if a not in p])
        if localize_module(model, M, S, relation).size > 1:
            supp.add(i)
    rad = radical(model, annihilator(model, M))
    rsupp = frozenset(i for i, p in enumerate(spec.primes) if rad.issubset(p))
    return SupportReport(frozenset(supp), rsupp)


# ---------------------------------------------------------------------------
# enumeration of small modules


def _action_cells(m: int, nT: int, n: int):
    cells = [(g, a, b, x) for g in range(m) for a in range(1, nT) for b in range(1, nT) for x in range(1, n)]
    return cells, {c: i for i, c in enumerate(cells)}


def enumerate_modules(model: GammaSemiring, max_size: int, group_complete: bool | None = None) -> list[GammaModule]:
    """Every module with at most ``max_size`` elements, one per isomorphism class.

    Action cells with a 0 in the first, second or module slot are forced to 0;
    the rest are filled by backtracking, each axiom instance checked as soon as
    the cells it mentions are all assigned.
    """
    out = []
    for n in range(1, max_size + 1):
        for A in addition_tables(n):
            M0 = GammaModule(A, np.zeros((model.m, model.n, model.n, n), dtype=np.int64))
            if group_complete is not None and M0.is_group_complete() != group_complete:
                continue
            out.extend(_modules_on(model, A))
    return out


def _modules_on(model: GammaSemiring, A: np.ndarray) -> list[GammaModule]:
    n, nT, m = len(A), model.n, model.m
    T, AT = model.tern, model.add
    cells, cidx = _action_cells(m, nT, n)
    ZERO = len(cells)  # constant-zero reference

    def ref(g, a, b, x):
        return ZERO if a == 0 or b == 0 or x == 0 else cidx[(g, a, b, x)]

    cons: list[set] = [set() for _ in cells]

    def add_con(X, Y, Z):
        last = max(r for r in (X, Y, Z) if r != ZERO) if any(r != ZERO for r in (X, Y, Z)) else None
        if last is None:
            return
        cons[last].add((X, Y, Z))

    for g in range(m):
        for a, b, c in itertools.product(range(nT), repeat=3):
            for x in range(n):
                add_con(ref(g, int(AT[a, b]), c, x), ref(g, a, c, x), ref(g, b, c, x))
        for a, b in itertools.product(range(nT), repeat=2):
            for x, y in itertools.product(range(n), repeat=2):
                add_con(ref(g, a, b, int(A[x, y])), ref(g, a, b, x), ref(g, a, b, y))
    for g1, g2 in itertools.product(range(m), repeat=2):
        for a, b, c, d in itertools.product(range(nT), repeat=4):
            for x in range(n):
                add_con(ref(g2, int(T[g1, a, b, c]), d, x), ref(g2, a, int(T[g1, b, c, d]), x), ZERO)
    cons_l = [sorted(s) for s in cons]
    vals = [0] * (len(cells) + 1)
    found = []

    def rec(k: int) -> None:
        if k == len(cells):
            act = np.zeros((m, nT, nT, n), dtype=np.int64)
            for (g, a, b, x), v in zip(cells, vals):
                act[g, a, b, x] = v
            found.append(act)
            return
        for v in range(n):
            vals[k] = v
            if all(vals[X] == A[vals[Y], vals[Z]] for X, Y, Z in cons_l[k]):
                rec(k + 1)
        vals[k] = 0

    rec(0)
    # dedup under relabelings of the module fixing A
    stab = []
    for rest in itertools.permutations(range(1, n)):
        s = np.array((0,) + rest)
        inv = np.argsort(s)
        if np.array_equal(s[A[np.ix_(inv, inv)]], A):
            stab.append((s, inv))
    seen = set()
    out = []
    for act in found:
        enc = min(s[act[..., inv]].tobytes() for s, inv in stab)
        if enc == act.tobytes() and enc not in seen:
            seen.add(enc)
            out.append(GammaModule(A, act))
    return out
