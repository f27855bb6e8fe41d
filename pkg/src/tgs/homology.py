"""Presentations and degree 0/1 Ext and Tor for ring-type modules.

A module is ring-type when the model has an identity idempotent ``e``, both
additive monoids are groups, ``{e, e, x}_gamma0 = x`` and every action factors
through the single-element action:
``{a, b, x}_g = {t, e, x}_gamma0`` with ``t = {a, b, e}_g``.  Such modules are
modules over the ring ``(T, +, (s, t) -> {s, t, e}_gamma0)`` and the usual
free resolutions compute the derived groups.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .abelian import invariants, order_of, quotient_invariants
from .errors import PreconditionError, UnsupportedMode
from .model import GammaSemiring
from .modules import (
    GammaModule,
    TensorResult,
    free_coords,
    free_module,
    greedy_generators,
    hom_set,
    submodule,
    tensor,
)


def ring_type_violation(model: GammaSemiring, M: GammaModule) -> dict | None:
    """``None`` when ``M`` is ring-type, otherwise the first offending instance."""
    if model.e is None:
        return {"reason": "model has no identity idempotent"}
    if not model.is_group_complete():
        return {"reason": "model addition is not a group"}
    if not M.is_group_complete():
        return {"reason": "module addition is not a group"}
    e, g0 = model.e, model.gamma0
    X = M.action
    bad = np.nonzero(X[g0, e, e] != np.arange(M.n))[0]
    if len(bad):
        x = int(bad[0])
        return {"reason": "e does not act as the identity", "x": x, "value": int(X[g0, e, e, x])}
    scal = model.tern[:, :, :, e]  # scal[g, a, b] = {a, b, e}_g
    expect = X[g0][scal, e]  # shape m x nT x nT x n
    bad = np.argwhere(X != expect)
    if len(bad):
        g, a, b, x = (int(v) for v in bad[0])
        return {"reason": "action does not factor through t.x", "g": g, "a": a, "b": b, "x": x,
                "lhs": int(X[g, a, b, x]), "rhs": int(expect[g, a, b, x])}
    return None


def _require(model: GammaSemiring, *mods: GammaModule) -> None:
    for M in mods:
        bad = ring_type_violation(model, M)
        if bad is not None:
            raise UnsupportedMode(
                "Ext/Tor are computed only for group-complete ring-type modules: " + bad["reason"]
            )


@dataclass
class GroupDescriptor:
    degree: int
    orders: list[int]
    mode: str = "group-complete"

    @property
    def order(self) -> int:
        return order_of(self.orders)

    def to_dict(self) -> dict:
        return {"degree": self.degree, "cyclic_orders": list(self.orders), "mode": self.mode}


@dataclass
class ChainData:
    """``F1 -> F0 -> M -> 0`` with ``F0`` free on ``gens``.

    ``d0[v]`` is the image in ``M`` of the element ``v`` of ``F0``; ``kernel``
    lists the elements of ``F0`` killed by ``d0``; ``relations`` generate it and
    give the basis of ``F1``; ``d1[w]`` is the image of ``w`` in ``F0``.
    """

    module: GammaModule
    gens: list[int]
    F0: GammaModule
    d0: tuple[int, ...]
    kernel: list[int]
    relations: list[int]
    F1: GammaModule
    d1: tuple[int, ...]
    exact: bool

    @property
    def rank0(self) -> int:
        return len(self.gens)

    @property
    def rank1(self) -> int:
        return len(self.relations)

    def kernel_module(self) -> tuple[GammaModule, list[int]]:
        return submodule(self.F0, self.kernel)

    def to_dict(self) -> dict:
        return {
            "generators": self.gens,
            "rank0": self.rank0,
            "relations": self.relations,
            "rank1": self.rank1,
            "kernel_size": len(self.kernel),
            "exact": self.exact,
        }


def _free_map(model: GammaSemiring, F: GammaModule, k: int, M: GammaModule, images: list[int]) -> tuple[int, ...]:
    """``(t_1, ..., t_k) -> sum_i t_i . images[i]`` on the free module of rank ``k``."""
    e, g0 = model.e, model.gamma0
    out = []
    for v in range(F.n):
        acc = 0
        for t, x in zip(free_coords(model.n, k, v), images):
            acc = int(M.add[acc, M.action[g0, t, e, x]])
        out.append(acc)
    return tuple(out)


def presentation(model: GammaSemiring, M: GammaModule) -> ChainData:
    _require(model, M)
    gens = greedy_generators(M)
    k = len(gens)
    F0 = free_module(model, k)
    d0 = _free_map(model, F0, k, M, gens)
    kernel = [v for v in range(F0.n) if d0[v] == 0]
    K, _ = submodule(F0, kernel)
    rel_local = greedy_generators(K)
    relations = [kernel[i] for i in rel_local]
    j = len(relations)
    F1 = free_module(model, j)
    d1 = _free_map(model, F1, j, F0, relations)
    exact = set(d0) == set(range(M.n)) and set(d1) == set(kernel)
    return ChainData(M, gens, F0, d0, kernel, relations, F1, d1, exact)


def _pointwise_group(maps: list[tuple[int, ...]], target: GammaModule):
    index = {f: i for i, f in enumerate(maps)}

    def add(i: int, j: int) -> int:
        return index[tuple(int(v) for v in target.add[list(maps[i]), list(maps[j])])]

    zero = index[tuple([0] * len(maps[0]))]
    return index, add, zero


def ext(model: GammaSemiring, M: GammaModule, N: GammaModule, degree: int, budget: int | None = None) -> GroupDescriptor:
    """Degree 0: ``Hom(M, N)``.  Degree 1: maps ``ker d0 -> N`` modulo restrictions
    of maps ``F0 -> N``."""
    _require(model, M, N)
    if degree == 0:
        maps = hom_set(model, M, N, budget)
        _, add, zero = _pointwise_group(maps, N)
        return GroupDescriptor(0, invariants(range(len(maps)), add, zero))
    if degree != 1:
        raise ValueError("only degrees 0 and 1 are supported")
    ch = presentation(model, M)
    K, incl = ch.kernel_module()
    homK = hom_set(model, K, N, budget)
    index, add, zero = _pointwise_group(homK, N)
    image = {index[tuple(f[v] for v in incl)] for f in hom_set(model, ch.F0, N, budget)}
    return GroupDescriptor(1, quotient_invariants(range(len(homK)), image, add, zero))


def induced_tensor_map(source: TensorResult, target: TensorResult, f, g) -> list[int]:
    """Class map ``A (x) B -> A' (x) B'`` induced by ``x (x) y -> f(x) (x) g(y)``."""
    S, Tt = source.module, target.module
    out = [-1] * S.n
    out[0] = 0
    frontier = [0]
    nA, nB = source.gen.shape
    while frontier:
        nxt = []
        for c in frontier:
            for x in range(nA):
                for y in range(nB):
                    c2 = int(S.add[c, source.gen[x, y]])
                    img = int(Tt.add[out[c], target.gen[f[x], g[y]]])
                    if out[c2] < 0:
                        out[c2] = img
                        nxt.append(c2)
                    elif out[c2] != img:
                        raise PreconditionError("induced map on tensor products is not well defined")
        frontier = nxt
    return out


def tor(model: GammaSemiring, M: GammaModule, N: GammaModule, degree: int) -> GroupDescriptor:
    """Degree 0: ``M (x) N``.  Degree 1: kernel of ``ker d0 (x) N -> F0 (x) N``."""
    _require(model, M, N)
    if degree == 0:
        t = tensor(model, M, N, mode="group")
        return GroupDescriptor(0, list(t.orders))
    if degree != 1:
        raise ValueError("only degrees 0 and 1 are supported")
    ch = presentation(model, M)
    K, incl = ch.kernel_module()
    tK = tensor(model, K, N, mode="group")
    tF = tensor(model, ch.F0, N, mode="group")
    phi = induced_tensor_map(tK, tF, incl, list(range(N.n)))
    ker = [c for c in range(tK.module.n) if phi[c] == 0]
    A = tK.module.add
    pos = {c: i for i, c in enumerate(ker)}
    return GroupDescriptor(1, invariants(range(len(ker)), lambda i, j: pos[int(A[ker[i], ker[j]])], pos[0]))
