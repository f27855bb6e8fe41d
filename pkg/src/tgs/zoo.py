"""Small named models used by the CLI, the tests and the docs."""

from __future__ import annotations

from .model import GammaSemiring, direct_product, from_functions


def trivial(m: int = 1) -> GammaSemiring:
    """The one-element model; 0 is also its identity idempotent."""
    return GammaSemiring([[0]], [[0] * m for _ in range(m)], [[[[0]]]] * m, e=0)


def boolean() -> GammaSemiring:
    """``B``: OR for addition, AND for the single ternary product."""
    return from_functions(2, [1], lambda a, b: a | b, lambda a, b, c, g: a & b & c, e=1)


def mod2() -> GammaSemiring:
    """``M2``: addition and product mod 2."""
    return from_functions(2, [1], lambda a, b: (a + b) % 2, lambda a, b, c, g: a * b * c % 2, e=1)


def mod3() -> GammaSemiring:
    """``M3``: ``{a, b, c}_g = a*b*c*g mod 3`` with parameters ``{1, 2}`` under multiplication."""
    return from_functions(
        3, [1, 2], lambda a, b: (a + b) % 3, lambda a, b, c, g: a * b * c * g % 3, gmul_fn=lambda g, h: g * h % 3, e=1
    )


def sum_mod3() -> GammaSemiring:
    """The literal table ``{a, b, c}_g = (a + b + c) mod 3`` (fails zero absorption)."""
    return from_functions(3, [1, 2], lambda a, b: (a + b) % 3, lambda a, b, c, g: (a + b + c) % 3, gmul_fn=lambda g, h: g * h % 3)


def chain3() -> GammaSemiring:
    """Three-element chain ``0 < 1 < 2`` with max as addition and min as product."""
    return from_functions(3, [1], max, lambda a, b, c, g: min(a, b, c), e=2)


def mod4() -> GammaSemiring:
    """``Z/4`` with the ordinary triple product."""
    return from_functions(4, [1], lambda a, b: (a + b) % 4, lambda a, b, c, g: a * b * c % 4, e=1)


def boolean_square() -> GammaSemiring:
    """``B x B``; pair ``(a, b)`` is element ``2a + b``."""
    return direct_product(boolean(), boolean())


def mod2_square() -> GammaSemiring:
    """``F2 x F2``; pair ``(a, b)`` is element ``2a + b``."""
    return direct_product(mod2(), mod2())


NAMED = {
    "trivial": trivial,
    "boolean": boolean,
    "mod2": mod2,
    "mod3": mod3,
    "sum-mod3": sum_mod3,
    "chain3": chain3,
    "mod4": mod4,
    "boolean-square": boolean_square,
    "mod2-square": mod2_square,
}
