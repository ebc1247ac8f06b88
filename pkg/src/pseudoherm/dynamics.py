"""Heisenberg equations of motion and real-closure analysis.

The time derivative of an operator ``O`` under a Hamiltonian ``H`` is
``(1/i*hbar)[O, H]``; iterating gives higher time derivatives as nested
commutators.  An equation of motion for a canonical variable is *real
closed* when, after the conjugate variable has been eliminated, the
surviving expression is a polynomial in that single variable with purely
real coefficients.  Everything here is exact: closure is a statement about
literal cancellation of the imaginary parts, not about tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .weyl import OperatorPoly, RationalComplex, _frac

MAX_DERIVATIVE_DEPTH = 6


class DerivativeDepthError(ValueError):
    """Raised when a nested-commutator depth exceeds the configured maximum."""


@dataclass(frozen=True)
class EomReport:
    """Outcome of a closure analysis for one canonical variable.

    ``force_poly`` is the eliminated second derivative (a real polynomial in
    the chosen variable) when a second-order closure holds; ``linear_coeffs``
    are the real constants ``(alpha, beta)`` of a fourth-order linear closure
    ``D4 + alpha*D2 + beta*D0 = 0``.  ``residual`` collects whatever obstructs
    closure and is the zero polynomial exactly when ``real_closed`` is true.
    """

    variable: tuple[int, str]
    order: int
    real_closed: bool
    force_poly: Optional[OperatorPoly]
    residual: OperatorPoly
    linear_coeffs: Optional[tuple[Fraction, Fraction]] = None
    ambiguous: bool = False


def time_derivative(O: OperatorPoly, H: OperatorPoly) -> OperatorPoly:
    """Single Heisenberg time derivative ``(1/i*hbar) [O, H]``."""
    comm = O.commutator(H)
    return comm * RationalComplex(0, Fraction(-1, 1) / O.hbar)


def nth_time_derivative(
    O: OperatorPoly, H: OperatorPoly, k: int, max_depth: int = MAX_DERIVATIVE_DEPTH
) -> OperatorPoly:
    """k-fold nested time derivative ``(1/i*hbar)^k ad_H^k(O)``."""
    if k < 0:
        raise ValueError("derivative order must be nonnegative")
    if k > max_depth:
        raise DerivativeDepthError(f"derivative depth {k} exceeds maximum {max_depth}")
    out = O
    for _ in range(k):
        out = time_derivative(out, H)
    return out


def _split_closure(D: OperatorPoly, mode: int, var: str):
    """Split into the admissible part (chosen variable only, real coefficients)
    and the offending remainder."""
    idx = 2 * mode + (0 if var == "x" else 1)
    good: dict = {}
    bad: dict = {}
    for mono, coeff in D.terms.items():
        pure = all(e == 0 for i, e in enumerate(mono) if i != idx)
        if pure and coeff.is_real():
            good[mono] = coeff
        elif pure:
            good[mono] = RationalComplex(coeff.re, 0)
            bad[mono] = RationalComplex(0, coeff.im)
        else:
            bad[mono] = coeff
    good_poly = OperatorPoly(D.mode_count, good, D.hbar)
    bad_poly = OperatorPoly(D.mode_count, bad, D.hbar)
    return good_poly, bad_poly


def real_closure_second_order(
    H: OperatorPoly, variable: tuple[int, str], inertia
) -> EomReport:
    """Decide whether the second-order equation of motion closes over the reals.

    ``inertia`` is the coefficient relating velocity to the conjugate
    variable (the mass for coordinate closure, ``1/A`` for momentum
    closure); it is carried along for downstream counterpart deduction and
    does not influence the closure decision itself.
    """
    mode, var = variable
    _frac(inertia)
    gen = OperatorPoly.x(mode, H.mode_count, H.hbar) if var == "x" else OperatorPoly.p(
        mode, H.mode_count, H.hbar
    )
    D2 = nth_time_derivative(gen, H, 2)
    good, bad = _split_closure(D2, mode, var)
    closed = bad.is_zero
    return EomReport(
        variable=variable,
        order=2,
        real_closed=closed,
        force_poly=good if closed else None,
        residual=bad,
    )


def _solve_two_unknowns(rows):
    """Exact Gaussian elimination for ``a*alpha + b*beta = r`` over Fractions.

    Returns ``(alpha, beta, consistent, ambiguous)``.  Rank-deficient but
    consistent systems return the minimal-norm solution flagged ambiguous.
    """
    rows = [row for row in rows if any(row)]
    if not rows:
        return Fraction(0), Fraction(0), True, True
    pivot1 = next((r for r in rows if r[0] != 0), None)
    if pivot1 is None:
        # alpha unconstrained; solve for beta alone
        pivot2 = next((r for r in rows if r[1] != 0), None)
        if pivot2 is None:
            # all-lhs-zero rows with nonzero rhs: inconsistent
            return Fraction(0), Fraction(0), False, False
        beta = pivot2[2] / pivot2[1]
        consistent = all(row[1] * beta == row[2] for row in rows)
        return Fraction(0), beta, consistent, True
    a1, b1, r1 = pivot1
    reduced = []
    for row in rows:
        if row is pivot1:
            continue
        factor = row[0] / a1
        reduced.append((row[1] - factor * b1, row[2] - factor * r1))
    pivot2 = next((r for r in reduced if r[0] != 0), None)
    if pivot2 is None:
        # one independent equation a1*alpha + b1*beta = r1: minimal-norm solution
        if any(r != 0 for lhs, r in reduced if lhs == 0):
            return Fraction(0), Fraction(0), False, False
        den = a1 * a1 + b1 * b1
        return a1 * r1 / den, b1 * r1 / den, True, True
    beta = pivot2[1] / pivot2[0]
    alpha = (r1 - b1 * beta) / a1
    consistent = all(lhs * beta == r for lhs, r in reduced)
    return alpha, beta, consistent, False


def linear_closure_fit(
    H: OperatorPoly, variable: tuple[int, str], order: int = 4
) -> EomReport:
    """Fit a real fourth-order linear closure ``D4 + alpha*D2 + beta*D0 = 0``.

    The unknowns are solved exactly over the monomial-coefficient equations;
    ``real_closed`` requires an exact real solution with zero residual.
    """
    if order != 4:
        raise ValueError("only order-4 closure fits are supported")
    mode, var = variable
    gen = OperatorPoly.x(mode, H.mode_count, H.hbar) if var == "x" else OperatorPoly.p(
        mode, H.mode_count, H.hbar
    )
    D0 = gen
    D2 = nth_time_derivative(gen, H, 2)
    D4 = nth_time_derivative(gen, H, 4)
    support = set(D0.terms) | set(D2.terms) | set(D4.terms)
    rows = []
    for mono in sorted(support):
        c0 = D0.coefficient(mono)
        c2 = D2.coefficient(mono)
        c4 = D4.coefficient(mono)
        rows.append((c2.re, c0.re, -c4.re))
        rows.append((c2.im, c0.im, -c4.im))
    alpha, beta, consistent, ambiguous = _solve_two_unknowns(rows)
    residual = D4 + D2 * alpha + D0 * beta
    closed = consistent and residual.is_zero
    return EomReport(
        variable=variable,
        order=4,
        real_closed=closed,
        force_poly=None,
        residual=residual,
        linear_coeffs=(alpha, beta),
        ambiguous=ambiguous,
    )
