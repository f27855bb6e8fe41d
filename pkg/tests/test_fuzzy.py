from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tgs import zoo
from tgs.errors import PreconditionError
from tgs.fuzzy import (
    FuzzyOpen,
    WeightedCover,
    as_fraction,
    assign_weights,
    crisp_reduction_check,
    fuzzy_closure,
    is_weighted_covering,
    load_weights,
    save_weights,
    validate_fuzzy_open,
    weighted_stalk,
)
from tgs.ideals import Ideal, spectrum, whole

NAMES = ["trivial", "boolean", "mod2", "mod3", "chain3", "mod4", "boolean-square", "mod2-square"]
fracs = st.fractions(min_value=0, max_value=1, max_denominator=12)


def test_as_fraction_is_exact():
    assert as_fraction("0.6") == Fraction(3, 5)
    assert as_fraction("3/5") == Fraction(3, 5)
    assert as_fraction(1) == 1
    with pytest.raises(TypeError):
        as_fraction(0.6)
    with pytest.raises(ValueError):
        as_fraction("1/0")


def test_schemes_on_boolean_square():
    sp = spectrum(zoo.boolean_square())
    assert assign_weights(sp).weights == {0: 1, 1: 1}
    freq = assign_weights(sp, "frequency")
    # proper ideals {0}, {0,1}, {0,2}: each prime lies in D of one of them
    assert freq.weights == {0: Fraction(1, 3), 1: Fraction(1, 3)}


def test_frequency_weight_on_boolean_is_zero(B):
    assert assign_weights(spectrum(B), "frequency").weights == {0: 0}


@pytest.mark.parametrize("bad", [{"0": "3/2"}, {"0": "1", "5": "1"}])
def test_file_weights_are_validated(bad):
    sp = spectrum(zoo.boolean_square())
    with pytest.raises(ValueError):
        assign_weights(sp, "file", {"1": "1", **bad})


def test_missing_weight_is_rejected():
    sp = spectrum(zoo.boolean_square())
    with pytest.raises(ValueError):
        assign_weights(sp, "file", {"0": "1"})


def test_weights_round_trip(tmp_path):
    sp = spectrum(zoo.boolean_square())
    W = assign_weights(sp, "file", {"0": "1/3", "1": "0.6"})
    path = tmp_path / "w.json"
    save_weights(W, path)
    back = load_weights(path, sp)
    assert back.weights == W.weights


@pytest.mark.parametrize("name", NAMES)
def test_unit_weights_reduce_to_crisp(name):
    T = zoo.NAMED[name]()
    rep = crisp_reduction_check(T, spectrum(T))
    assert rep.passed, rep.to_dict()


@settings(max_examples=50, deadline=None)
@given(w0=fracs, w1=fracs, s=fracs, t=fracs)
def test_closure_shrinks_as_threshold_grows(w0, w1, s, t):
    sp = spectrum(zoo.boolean_square())
    W = assign_weights(sp, "file", {0: w0, 1: w1})
    lo, hi = min(s, t), max(s, t)
    for I in sp.proper_ideals + (whole(zoo.boolean_square()),):
        big, small = fuzzy_closure(sp, I, lo, W), fuzzy_closure(sp, I, hi, W)
        assert small <= big <= sp.basic_open(I)
        assert fuzzy_closure(sp, I, 0, W) == sp.basic_open(I)


def test_threshold_outside_unit_interval():
    sp = spectrum(zoo.boolean())
    with pytest.raises(PreconditionError):
        fuzzy_closure(sp, whole(zoo.boolean()), "3/2", assign_weights(sp))


def test_chain3_closures():
    T = zoo.chain3()
    sp = spectrum(T)
    assert [p.members for p in sp.primes] == [(0,), (0, 1)]
    W = assign_weights(sp, "file", {0: "1/4", 1: "3/4"})
    top = whole(T)
    assert fuzzy_closure(sp, top, "1/2", W) == {1}
    assert fuzzy_closure(sp, top, "1/5", W) == {0, 1}
    assert fuzzy_closure(sp, top, 1, W) == frozenset()


def test_isotone_rule_holds_for_max_extensions():
    sp = spectrum(zoo.chain3())
    mu = FuzzyOpen.from_points(sp, {0: "1/4", 1: 1})
    assert validate_fuzzy_open(sp, mu, "isotone").passed
    rep = validate_fuzzy_open(sp, mu, "antitone")
    assert not rep.passed
    assert {w["check"] for w in rep.witnesses} == {"monotone"}


def test_max_extension_can_break_the_min_rule():
    sp = spectrum(zoo.boolean_square())
    mu = FuzzyOpen.from_points(sp, {0: 1, 1: "1/2"})
    rep = validate_fuzzy_open(sp, mu)
    mins = [w for w in rep.witnesses if w["check"] == "min"]
    # D(p0) and D(p1) are disjoint, but min(1, 1/2) != 0
    assert mins and mins[0]["value"] == "0"


def test_indicator_passes_exactly_when_nonempty_opens_meet():
    for name in NAMES:
        sp = spectrum(zoo.NAMED[name]())
        if not sp.primes:
            continue
        opens = [sp.basic_open(I) for I in sp.ideals if sp.basic_open(I)]
        meet = all(U & V for U in opens for V in opens)
        assert validate_fuzzy_open(sp, FuzzyOpen.indicator(sp)).passed == meet


def test_undefined_open_is_reported():
    sp = spectrum(zoo.boolean_square())
    rep = validate_fuzzy_open(sp, FuzzyOpen({frozenset(): Fraction(0)}))
    assert {w["check"] for w in rep.witnesses} == {"defined"}


def test_cover_diagnostics():
    BB = zoo.boolean_square()
    sp = spectrum(BB)
    a, b = Ideal.of([0, 1], 4), Ideal.of([0, 2], 4)
    good = WeightedCover.of(whole(BB), [(a, "1/2"), (b, "1/2")])
    assert is_weighted_covering(sp, good).passed
    assert good.confidence == Fraction(1, 2)
    light = is_weighted_covering(sp, WeightedCover.of(whole(BB), [(a, "1/2"), (b, "1/4")]))
    assert not light.passed and light.diagnostics() == ["weights sum to 3/4 < 1"]
    short = is_weighted_covering(sp, WeightedCover.of(whole(BB), [(a, 1)]))
    assert short.missing and "union misses" in short.diagnostics()[0]
    wide = is_weighted_covering(sp, WeightedCover.of(a, [(whole(BB), 1)]))
    assert wide.extra
    zero = is_weighted_covering(sp, WeightedCover.of(a, [(a, 0), (a, 1)]))
    assert not zero.weights_ok


def test_weighted_stalk_hides_light_primes(M3):
    sp = spectrum(M3)
    W = assign_weights(sp, "file", {0: "3/5"})
    loc, conf = weighted_stalk(M3, sp, 0, W, "1/2")
    assert loc.size == 3 and conf == Fraction(3, 5)
    hidden, _ = weighted_stalk(M3, sp, 0, W, "4/5")
    assert hidden.size == 1
