"""Finite abelian groups: invariant factors and integer relation quotients."""

from __future__ import annotations

from math import gcd

from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_decomp
from sympy.ntheory import factorint


def invariant_factors_from_primary(primary: dict[int, list[int]]) -> list[int]:
    """Combine prime-power exponents into invariant factors ``d1 | d2 | ...``."""
    width = max((len(v) for v in primary.values()), default=0)
    out = [1] * width
    for p, exps in primary.items():
        exps = sorted(exps, reverse=True)
        for i, k in enumerate(exps):
            out[width - 1 - i] *= p**k
    return [d for d in out if d > 1]


def invariants(elements, add, zero) -> list[int]:
    """Invariant factors of a finite abelian group given by its elements and addition.

    Uses ``|G[p^k]|``, the number of elements killed by ``p^k``, for every prime
    ``p`` dividing the order.
    """
    elements = list(elements)
    order = len(elements)
    primary: dict[int, list[int]] = {}

    def times(x, k):
        acc = zero
        for _ in range(k):
            acc = add(acc, x)
        return acc

    for p, top in factorint(order).items():
        # c[k] = log_p |G[p^k]|
        c = [0]
        k = 1
        while c[-1] < top:
            killed = sum(1 for x in elements if times(x, p**k) == zero)
            c.append(_log(killed, p))
            k += 1
        # number of cyclic factors of exponent >= k is c[k] - c[k-1]
        ge = [c[i] - c[i - 1] for i in range(1, len(c))] + [0]
        exps = []
        for k in range(1, len(ge)):
            exps += [k] * (ge[k - 1] - ge[k])
        primary[p] = exps
    return invariant_factors_from_primary(primary)


def _log(x: int, p: int) -> int:
    k = 0
    while x > 1:
        x //= p
        k += 1
    return k


def quotient_invariants(group, subgroup: set, add, zero) -> list[int]:
    """Invariant factors of ``group / subgroup`` (both given explicitly)."""
    reps = []
    seen = set()
    for x in group:
        if x in seen:
            continue
        seen.update(add(x, h) for h in subgroup)
        reps.append(x)
    rep_of = {}
    for r in reps:
        for h in subgroup:
            rep_of[add(r, h)] = r

    def qadd(a, b):
        return rep_of[add(a, b)]

    return invariants(reps, qadd, rep_of[zero])


def order_of(orders: list[int]) -> int:
    out = 1
    for d in orders:
        out *= d
    return out


class RelationQuotient:
    """``Z^k`` modulo the row span of a relation matrix, assumed of finite index.

    ``orders`` are the nontrivial invariant factors; ``coords(v)`` gives the
    class of an integer vector as a tuple of residues, one per factor.
    """

    def __init__(self, k: int, rows: list[list[int]], exponent: int | None = None):
        self.k = k
        basis = _hermite_rows(k, rows, exponent)
        if len(basis) < k:
            raise ValueError("relation lattice has infinite index")
        D, _, V = smith_normal_decomp(Matrix(basis))
        diag = [abs(int(D[i, i])) for i in range(k)]
        self._V = [[int(V[i, j]) for j in range(k)] for i in range(k)]
        self._keep = [i for i, d in enumerate(diag) if d != 1]
        self.orders = [diag[i] for i in self._keep]

    def coords(self, v) -> tuple[int, ...]:
        out = []
        for i in self._keep:
            s = sum(v[j] * self._V[j][i] for j in range(self.k))
            out.append(s % self.orders[len(out)])
        return tuple(out)

    def generator(self, j: int) -> tuple[int, ...]:
        return self.coords([int(i == j) for i in range(self.k)])

    @property
    def size(self) -> int:
        return order_of(self.orders)


def _hermite_rows(k: int, rows, exponent: int | None) -> list[list[int]]:
    """Echelon basis of the lattice spanned by ``rows`` (plus ``exponent * Z^k``).

    Rows are inserted one at a time with extended-gcd elimination; when an
    exponent is given, entries are reduced modulo it to keep them small.
    """
    piv: dict[int, list[int]] = {}
    extra = [[exponent * int(i == j) for j in range(k)] for i in range(k)] if exponent else []

    def reduce(row):
        if exponent:
            return [x % exponent for x in row]
        return row

    for row in extra + [list(r) for r in rows]:
        row = list(row)
        for c in range(k):
            if row[c] == 0:
                continue
            if c not in piv:
                if row[c] < 0:
                    row = [-x for x in row]
                piv[c] = row
                break
            p = piv[c]
            a, b = p[c], row[c]
            g, x, y = _egcd(a, b)
            new_p = [x * u + y * v for u, v in zip(p, row)]
            row = [(a // g) * v - (b // g) * u for u, v in zip(p, row)]
            if exponent:
                # keep the pivot entry exact, reduce the tail
                new_p = new_p[: c + 1] + [v % exponent for v in new_p[c + 1 :]]
                row = reduce(row)
            piv[c] = new_p
    return [piv[c] for c in sorted(piv)]


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)
