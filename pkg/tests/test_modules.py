import itertools
import json

import numpy as np
import pytest

from tgs import zoo
from tgs.errors import BudgetExceeded, PreconditionError, StructuralError
from tgs.ideals import is_ideal, spectrum
from tgs.localization import mult_system
from tgs.modules import (
    GammaModule,
    annihilator,
    budget_from_env,
    check_adjunction,
    check_module_axioms,
    direct_sum,
    enumerate_modules,
    free_coords,
    free_index,
    free_module,
    generated,
    greedy_generators,
    hom_module,
    hom_set,
    load_module,
    localize_module,
    map_violation,
    regular_module,
    schur_map,
    submodule,
    support,
    tensor,
    zero_module,
)


def _is_hom(model, M, N, f):
    if f[0] != 0:
        return False
    for x, y in itertools.product(range(M.n), repeat=2):
        if f[M.add[x, y]] != N.add[f[x], f[y]]:
            return False
    for g, a, b, x in itertools.product(range(model.m), range(model.n), range(model.n), range(M.n)):
        if f[M.action[g, a, b, x]] != N.action[g, a, b, f[x]]:
            return False
    return True


def _hom_oracle(model, M, N):
    return sorted(f for f in itertools.product(range(N.n), repeat=M.n) if _is_hom(model, M, N, f))


def _bilinear_count(model, M, N, P):
    count = 0
    for vals in itertools.product(range(P.n), repeat=M.n * N.n):
        beta = np.array(vals).reshape(M.n, N.n)
        if beta[0].any() or beta[:, 0].any():
            continue
        ok = all(
            beta[M.add[x, x2], y] == P.add[beta[x, y], beta[x2, y]]
            for x, x2, y in itertools.product(range(M.n), range(M.n), range(N.n))
        ) and all(
            beta[x, N.add[y, y2]] == P.add[beta[x, y], beta[x, y2]]
            for x, y, y2 in itertools.product(range(M.n), range(N.n), range(N.n))
        )
        if ok:
            for g, a, b in itertools.product(range(model.m), range(model.n), range(model.n)):
                for x, y in itertools.product(range(M.n), range(N.n)):
                    v = P.action[g, a, b, beta[x, y]]
                    if beta[M.action[g, a, b, x], y] != v or beta[x, N.action[g, a, b, y]] != v:
                        ok = False
                        break
                if not ok:
                    break
        count += ok
    return count


@pytest.fixture(scope="module")
def B_modules():
    return enumerate_modules(zoo.boolean(), 3)


@pytest.fixture(scope="module")
def M3_modules():
    return enumerate_modules(zoo.mod3(), 3, group_complete=True)


def test_small_hom_counts(B):
    R, Z = regular_module(B), zero_module(B)
    assert len(hom_set(B, R, R)) == 2
    assert len(hom_set(B, Z, R)) == 1
    assert len(hom_set(B, R, Z)) == 1


def test_mutated_action_is_caught(B):
    R = regular_module(B)
    action = R.action.copy()
    action[0, 0, 1, 1] = 1
    rep = check_module_axioms(B, GammaModule(R.add, action))
    assert not rep.passed
    w = rep.witnesses[0]
    assert (w["axiom"], w["g"], w["b"], w["x"]) == ("ZERO.first", 0, 1, 1)


@pytest.mark.parametrize("name", ["boolean", "mod3", "chain3", "mod4", "boolean-square"])
def test_regular_and_free_modules_are_valid(name):
    T = zoo.NAMED[name]()
    assert check_module_axioms(T, regular_module(T)).passed
    assert check_module_axioms(T, zero_module(T)).passed
    if T.n <= 3:
        F = free_module(T, 2)
        assert F.n == T.n**2 and check_module_axioms(T, F).passed


def test_enumerated_modules_are_valid(B_modules, M3_modules):
    assert len(B_modules) == 17 and len(M3_modules) == 11
    for T, mods in ((zoo.boolean(), B_modules), (zoo.mod3(), M3_modules)):
        for M in mods:
            assert check_module_axioms(T, M).passed


def test_enumeration_has_no_duplicates(B_modules):
    encs = [M.encoding for M in B_modules]
    assert len(set(encs)) == len(encs)


def test_hom_set_matches_brute_force(B_modules):
    B = zoo.boolean()
    for M, N in itertools.product(B_modules[:8], repeat=2):
        assert hom_set(B, M, N) == _hom_oracle(B, M, N)
        for f in hom_set(B, M, N):
            assert map_violation(B, M, N, f) is None


def test_hom_set_matches_brute_force_over_mod3(M3_modules):
    M3 = zoo.mod3()
    for M, N in itertools.product(M3_modules, repeat=2):
        assert hom_set(M3, M, N) == _hom_oracle(M3, M, N)


def test_homs_compose(B_modules):
    B = zoo.boolean()
    mods = B_modules[:6]
    for M, N, P in itertools.product(mods, repeat=3):
        for f in hom_set(B, M, N):
            for g in hom_set(B, N, P):
                assert _is_hom(B, M, P, tuple(g[v] for v in f))


def test_hom_module_is_closed(B):
    R = regular_module(B)
    H, maps = hom_module(B, R, R)
    assert maps[0] == (0, 0) and H.n == 2
    assert check_module_axioms(B, H).passed


def test_budget(B, monkeypatch):
    F = free_module(B, 3)
    with pytest.raises(BudgetExceeded) as exc:
        hom_set(B, F, F, budget=10)
    assert exc.value.estimate == 8**3
    monkeypatch.setenv("TGS_BUDGET", "77")
    assert budget_from_env() == 77
    monkeypatch.setenv("TGS_BUDGET", "0")
    with pytest.raises(ValueError):
        budget_from_env()


def test_tensor_examples(B, M3):
    t = tensor(B, regular_module(B), regular_module(B))
    assert t.complete and t.size == 2 and t.mode == "congruence-capped"
    R3 = regular_module(M3)
    t3 = tensor(M3, R3, R3)
    assert t3.mode == "group-complete-exact" and t3.size == 3 and t3.orders == [3]
    # 1 (x) 1 generates
    assert sorted(generated(t3.module, [int(t3.gen[1, 1])])) == [0, 1, 2]


def test_tensor_cap(B):
    F = free_module(B, 2)
    t = tensor(B, F, F, cap=10)
    assert not t.complete and t.module is None and "cap" in t.note


def test_tensor_represents_bilinear_maps(B_modules):
    # Hom(M (x) N, P) is in bijection with the bilinear maps M x N -> P
    B = zoo.boolean()
    small = [M for M in B_modules if M.n <= 2]
    for M, N, P in itertools.product(B_modules, small, small):
        t = tensor(B, M, N)
        assert len(hom_set(B, t.module, P)) == _bilinear_count(B, M, N, P)


def test_group_and_monoid_tensors_agree(M3_modules):
    M3 = zoo.mod3()
    for M, N in itertools.product(M3_modules, repeat=2):
        a, b = tensor(M3, M, N, "group"), tensor(M3, M, N, "monoid")
        assert a.size == b.size


def test_tensor_swap_is_an_additive_bijection(M3_modules):
    M3 = zoo.mod3()
    for M, N in itertools.product(M3_modules, repeat=2):
        a, b = tensor(M3, M, N), tensor(M3, N, M)
        assert a.size == b.size
        swap = {}
        for x, y in itertools.product(range(M.n), range(N.n)):
            assert swap.setdefault(int(a.gen[x, y]), int(b.gen[y, x])) == int(b.gen[y, x])
        assert sorted(swap.values()) == list(range(b.size))
        for u, v in itertools.product(swap, repeat=2):
            assert swap[int(a.module.add[u, v])] == b.module.add[swap[u], swap[v]]


def test_adjunction_on_a_sample(B_modules):
    B = zoo.boolean()
    for M, N, P in itertools.product(B_modules[:5], repeat=3):
        rep = check_adjunction(B, M, N, P)
        assert rep.passed, rep.to_dict()
        assert rep.left == rep.right == len(rep.bijection)


def test_annihilators_are_ideals(B_modules, M3_modules):
    for T, mods in ((zoo.boolean(), B_modules), (zoo.mod3(), M3_modules)):
        for M in mods:
            A = annihilator(T, M)
            assert is_ideal(T, A, "literal") and is_ideal(T, A, "strict")


def test_schur_on_regular_modules():
    for name in ["boolean", "mod3", "chain3", "mod4"]:
        T = zoo.NAMED[name]()
        rep = schur_map(T, regular_module(T))
        assert rep.faithful and rep.coincides
        assert rep.annihilator.members == (0,)


def test_schur_kernel_can_differ_from_bourne():
    T = zoo.mod3()
    mods = enumerate_modules(T, 3)
    reps = [schur_map(T, M) for M in mods]
    assert sum(not r.coincides for r in reps) == 2


def test_support_of_regular_modules():
    for name in ["boolean", "mod3", "chain3", "boolean-square"]:
        T = zoo.NAMED[name]()
        sp = spectrum(T)
        rep = support(T, regular_module(T), sp)
        assert rep.agrees and rep.support == sp.points


def test_localize_regular_module(M3):
    L = localize_module(M3, regular_module(M3), mult_system(M3, [1, 2]))
    assert L.size == 3 and L.phi == (0, 1, 2)
    assert check_module_axioms(M3, L.module).passed
    with pytest.raises(ValueError):
        localize_module(M3, regular_module(M3), mult_system(M3, [1, 2]), relation="x")


def test_any_relation_collapses_when_a_parameter_acts_by_zero():
    # the second parameter of mod2-square acts by zero on the first factor
    T = zoo.mod2_square()
    sp = spectrum(T)
    for M in enumerate_modules(T, 2):
        every = support(T, M, sp, "every")
        anyr = support(T, M, sp, "any")
        assert anyr.support <= every.support


def test_direct_sum_and_free_coordinates(B):
    R = regular_module(B)
    S = direct_sum(R, R)
    assert S == free_module(B, 2)
    for idx in range(9):
        assert free_index(3, free_coords(3, 2, idx)) == idx
    assert free_coords(3, 2, 5) == (1, 2)


def test_generators_and_submodules(B):
    F = free_module(B, 2)
    gens = greedy_generators(F)
    assert sorted(generated(F, gens)) == list(range(F.n))
    sub, els = submodule(F, generated(F, [1]))
    assert els == [0, 1] and sub.n == 2
    with pytest.raises(PreconditionError):
        submodule(F, [1])
    assert check_module_axioms(B, sub).passed


def test_module_json_round_trip(tmp_path, M3):
    R = regular_module(M3)
    path = tmp_path / "r.json"
    path.write_text(json.dumps(R.to_dict(M3)))
    back, over = load_module(path)
    assert back == R and over is not None


def test_malformed_module():
    with pytest.raises(StructuralError):
        GammaModule([[0, 1], [1, 5]], np.zeros((1, 2, 2, 2)))
    with pytest.raises(StructuralError):
        GammaModule([[0, 1], [1, 0]], np.zeros((1, 2, 3, 2)))


def test_module_over_the_wrong_model(B, M3):
    with pytest.raises(PreconditionError):
        hom_set(M3, regular_module(B), regular_module(B))
