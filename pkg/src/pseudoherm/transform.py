"""Hermitian counterparts and non-unitary similarity transformations.

A real-closed second-order equation of motion determines a Hermitian
Hamiltonian with the same dynamics (up to an additive real constant, fixed
to zero here).  For the swanson/general_x/general_p families the similarity
operator ``Omega = exp(S)`` has a polynomial exponent in a single canonical
variable, so conjugation ``exp(S) A exp(-S)`` is an exactly terminating
nested-commutator series and the relation ``Omega H Omega^-1 = h`` can be
certified symbolically, coefficient by coefficient.

Conventions: ``Omega`` maps the non-Hermitian side to the Hermitian side,
``h = Omega H Omega^-1``; eigenvectors map as ``phi = Omega Phi``; the
metric operator is ``eta = Omega^dagger Omega``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .dynamics import EomReport
from .models import ModelSpec
from .weyl import OperatorPoly, _frac


class NotDeducibleError(ValueError):
    """Raised when no Hermitian counterpart follows from the given report."""


class UnsupportedModelError(ValueError):
    """Raised for model kinds without a built-in similarity exponent."""


class NonTerminatingSeriesError(RuntimeError):
    """Raised when the conjugation series fails to terminate, signalling a
    violated precondition on the exponent."""


@dataclass(frozen=True)
class SimilarityCertificate:
    omega_exponent: OperatorPoly
    bch_depth: int
    residual: OperatorPoly
    verified: bool


def deduce_hermitian(eom: EomReport, inertia) -> OperatorPoly:
    """Hermitian counterpart reproducing a real-closed second-order motion.

    Integrates the force once,
    ``h = q_conj^2 / (2*inertia) - inertia * Integral(force)``,
    with the additive constant set to zero.
    """
    if not eom.real_closed or eom.order != 2 or eom.force_poly is None:
        raise NotDeducibleError(
            "counterpart requires a real-closed second-order equation of motion"
        )
    inertia = _frac(inertia)
    if inertia <= 0:
        raise ValueError("inertia must be positive")
    mode, var = eom.variable
    force = eom.force_poly
    conj = (
        OperatorPoly.p(mode, force.mode_count, force.hbar)
        if var == "x"
        else OperatorPoly.x(mode, force.mode_count, force.hbar)
    )
    potential = (force * (-inertia)).integrate(mode, var)
    return conj * conj * (Fraction(1, 2) / inertia) + potential


def omega_exponent(spec: ModelSpec) -> OperatorPoly:
    """Polynomial exponent ``S`` of the similarity operator ``Omega = exp(S)``.

    For the coordinate families
    ``S = -(m/hbar) * sum_k c_k x^(k+n+1) / (k+n+1)``
    and for the momentum family
    ``S = +(1/(A*hbar)) * sum_k a_k p^(k+n+1) / (k+n+1)``.
    """
    spec.validate()
    if spec.kind == "swanson":
        # single-term series: c_0 = c at offset n = 1
        x = OperatorPoly.x(0, 1, spec.hbar)
        return x * x * (-spec.m * spec.c / (2 * spec.hbar))
    if spec.kind == "general_x":
        x = OperatorPoly.x(0, 1, spec.hbar)
        total = OperatorPoly.zero(1, spec.hbar)
        for k, ck in enumerate(spec.series):
            e = k + spec.n + 1
            total = total + x**e * Fraction(ck, e)
        return total * (-spec.m / spec.hbar)
    if spec.kind == "general_p":
        p = OperatorPoly.p(0, 1, spec.hbar)
        total = OperatorPoly.zero(1, spec.hbar)
        for k, ak in enumerate(spec.series):
            e = k + spec.n + 1
            total = total + p**e * Fraction(ak, e)
        return total / (spec.A * spec.hbar)
    raise UnsupportedModelError(
        f"no similarity exponent is defined for kind {spec.kind!r}"
    )


def _conjugation_series(S: OperatorPoly, A: OperatorPoly):
    """``exp(S) A exp(-S)`` as the terminating series ``sum_k ad_S^k(A)/k!``.

    Terminates whenever each nesting strictly lowers some generator degree
    (guaranteed for exponents depending on one canonical variable per mode);
    the bound ``2*deg(A) + 2`` turns a violated precondition into an error
    instead of a silent truncation.
    """
    S._check_compatible(A)
    bound = 2 * A.degree() + 2
    result = A
    nested = A
    k = 0
    while True:
        nested = S.commutator(nested)
        if nested.is_zero:
            return result, k
        k += 1
        if k > bound:
            raise NonTerminatingSeriesError(
                f"conjugation series still alive after {bound} nestings; "
                "exponent is not single-variable"
            )
        result = result + nested / Fraction(math.factorial(k))


def conjugate_by_exp(S: OperatorPoly, A: OperatorPoly) -> OperatorPoly:
    """Similarity conjugation ``exp(S) A exp(-S)`` in canonical form."""
    result, _ = _conjugation_series(S, A)
    return result


def verify_similarity(
    H: OperatorPoly, h: OperatorPoly, S: OperatorPoly
) -> SimilarityCertificate:
    """Certify ``exp(S) H exp(-S) = h`` exactly.

    The residual is ``exp(S) H exp(-S) - h``; ``verified`` holds iff it is
    the zero polynomial.
    """
    transformed, depth = _conjugation_series(S, H)
    residual = transformed - h
    return SimilarityCertificate(
        omega_exponent=S,
        bch_depth=depth,
        residual=residual,
        verified=residual.is_zero,
    )


def observable_map(o: OperatorPoly, S: OperatorPoly, direction: str) -> OperatorPoly:
    """Map an observable between the Hermitian and non-Hermitian pictures.

    ``to_pseudo`` sends a Hermitian-picture observable ``o`` to
    ``Omega^-1 o Omega``; ``to_hermitian`` inverts the map.
    """
    if direction == "to_pseudo":
        return conjugate_by_exp(-S, o)
    if direction == "to_hermitian":
        return conjugate_by_exp(S, o)
    raise ValueError(f"direction must be 'to_pseudo' or 'to_hermitian', got {direction!r}")
