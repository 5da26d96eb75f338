"""Exact feasibility of  A x = b, x >= 0  over the rationals.

Phase one of the simplex method with Bland's anti-cycling rule, on a dense
tableau of Fractions.  Feasibility only; there is no objective.
"""

from dataclasses import dataclass
from fractions import Fraction

from .measurable import as_fraction
from .errors import ValidationError


@dataclass(frozen=True)
class LinSystem:
    n: int
    rows: tuple  # of (coefficients, rhs)

    @classmethod
    def of(cls, n, rows):
        out = []
        for coeffs, rhs in rows:
            coeffs = tuple(as_fraction(c) for c in coeffs)
            if len(coeffs) != n:
                raise ValidationError(f"row has {len(coeffs)} coefficients, expected {n}")
            out.append((coeffs, as_fraction(rhs)))
        return cls(n, tuple(out))

    def satisfied_by(self, x):
        return (len(x) == self.n and all(v >= 0 for v in x)
                and all(sum(c * v for c, v in zip(coeffs, x)) == rhs for coeffs, rhs in self.rows))


def _pivot(tableau, r, c):
    row = tableau[r]
    p = row[c]
    tableau[r] = row = [v / p for v in row]
    for i, other in enumerate(tableau):
        if i != r and other[c] != 0:
            f = other[c]
            tableau[i] = [a - f * b for a, b in zip(other, row)]


def feasible(system):
    """A nonnegative exact solution of the system, or None when there is none."""
    n = system.n
    rows = [(list(c), b) if b >= 0 else ([-v for v in c], -b) for c, b in system.rows]
    m = len(rows)
    if m == 0:
        return [Fraction(0)] * n
    zero, one = Fraction(0), Fraction(1)
    tableau = [c + [one if j == i else zero for j in range(m)] + [b] for i, (c, b) in enumerate(rows)]
    basis = [n + i for i in range(m)]
    width = n + m
    while True:
        # reduced cost of column j for the phase-one objective (sum of artificials)
        entering = None
        for j in range(width):
            if j in basis:
                continue
            cost = (one if j >= n else zero) - sum(
                tableau[i][j] for i in range(m) if basis[i] >= n)
            if cost < 0:
                entering = j
                break
        if entering is None:
            break
        best = None
        for i in range(m):
            a = tableau[i][entering]
            if a > 0:
                ratio = tableau[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        # phase one is bounded below by zero, so some row always qualifies
        _pivot(tableau, best[1], entering)
        basis[best[1]] = entering
    if any(basis[i] >= n and tableau[i][-1] != 0 for i in range(m)):
        return None
    x = [zero] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = tableau[i][-1]
    assert system.satisfied_by(x), "simplex produced a non-solution"
    return x
