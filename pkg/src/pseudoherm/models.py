"""Builders for the supported non-Hermitian Hamiltonian families.

Five families are supported, all polynomial in canonical pairs:

``swanson``      h.o. plus the imaginary bilinear ``i(c/2)(xp + px)``;
``pu_I``         two-mode fourth-order oscillator, PT-symmetric form;
``pu_II``        anisotropic planar oscillator plus ``i k p1 p2`` coupling;
``general_x``    ``p^2/2m + V(x) + (i/2){f(x) p + p f(x)}`` with a real
                 polynomial ``f(x) = sum_k c_k x^(k+n)``;
``general_p``    ``(A/2) x^2 + V(p) + (i/2){g(p) x + x g(p)}`` with
                 ``g(p) = sum_k a_k p^(k+n)`` (momentum mirror of general_x).

Parameters are exact rationals so that every downstream symbolic identity
holds to literal zero; numeric evaluation converts to floats only inside
the spectral layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .weyl import OperatorPoly, RationalComplex, RC_I, _frac

KINDS = ("swanson", "pu_I", "pu_II", "general_x", "general_p")


class InvalidParameterError(ValueError):
    """Raised when a model parameter violates its documented constraint."""


def _opt_frac(value):
    return None if value is None else _frac(value)


@dataclass(frozen=True)
class ModelSpec:
    """Declarative description of a model instance.

    Which fields are required depends on ``kind``; see ``validate``.
    ``V`` lists potential coefficients by ascending power of the model's
    own variable (x for general_x, p for general_p), ``series`` lists
    c_0..c_K (or a_0..a_K) and ``n`` is the common exponent offset.
    """

    kind: str
    hbar: Fraction = Fraction(1)
    m: Optional[Fraction] = None
    omega: Optional[Fraction] = None
    c: Optional[Fraction] = None
    gamma: Optional[Fraction] = None
    omega1: Optional[Fraction] = None
    omega2: Optional[Fraction] = None
    a1: Optional[Fraction] = None
    a2: Optional[Fraction] = None
    a3: Optional[Fraction] = None
    A: Optional[Fraction] = None
    V: Optional[tuple] = None
    series: Optional[tuple] = None
    n: int = 0
    branch: str = "upper"  # sign branch of the pu_II frequency formula

    def __post_init__(self):
        object.__setattr__(self, "hbar", _frac(self.hbar))
        for name in ("m", "omega", "c", "gamma", "omega1", "omega2", "a1", "a2", "a3", "A"):
            object.__setattr__(self, name, _opt_frac(getattr(self, name)))
        if self.V is not None:
            object.__setattr__(self, "V", tuple(_frac(v) for v in self.V))
        if self.series is not None:
            object.__setattr__(self, "series", tuple(_frac(v) for v in self.series))
        object.__setattr__(self, "n", int(self.n))

    @property
    def mode_count(self) -> int:
        return 2 if self.kind in ("pu_I", "pu_II") else 1

    def validate(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(f"unknown model kind {self.kind!r}")
        if self.hbar <= 0:
            raise InvalidParameterError("hbar must be positive")
        kind = self.kind
        if kind == "swanson":
            self._require(self.m is not None and self.m > 0, "swanson requires mass m > 0")
            self._require(self.omega is not None and self.omega > 0, "swanson requires omega > 0")
            self._require(self.c is not None, "swanson requires a real coupling c")
        elif kind == "pu_I":
            self._require(self.gamma is not None and self.gamma > 0, "pu_I requires gamma > 0")
            self._require(self.omega1 is not None and self.omega1 > 0, "pu_I requires omega1 > 0")
            self._require(self.omega2 is not None and self.omega2 > 0, "pu_I requires omega2 > 0")
        elif kind == "pu_II":
            self._require(self.m is not None and self.m > 0, "pu_II requires mass m > 0")
            for name in ("a1", "a2", "a3"):
                v = getattr(self, name)
                self._require(v is not None and v != 0, f"pu_II requires nonzero {name}")
            self._require(self.a1 != self.a2, "pu_II requires the anisotropy a1 != a2")
            self._require(
                abs(self.a3) < abs(self.a1**2 - self.a2**2),
                "pu_II requires the inequality |a3| < |a1^2 - a2^2|",
            )
            self._require(self.branch in ("upper", "lower"), "branch must be 'upper' or 'lower'")
        elif kind == "general_x":
            self._require(self.m is not None and self.m > 0, "general_x requires mass m > 0")
            self._require(self.series is not None and len(self.series) > 0,
                          "general_x requires a nonempty coefficient series")
            self._require(self.n >= 0, "series offset n must be >= 0")
        elif kind == "general_p":
            self._require(self.A is not None and self.A > 0, "general_p requires A > 0")
            self._require(self.series is not None and len(self.series) > 0,
                          "general_p requires a nonempty coefficient series")
            self._require(self.n >= 0, "series offset n must be >= 0")

    @staticmethod
    def _require(condition: bool, message: str):
        if not condition:
            raise InvalidParameterError(message)


def _potential(var: OperatorPoly, coeffs) -> OperatorPoly:
    total = OperatorPoly.zero(var.mode_count, var.hbar)
    if coeffs:
        for d, v in enumerate(coeffs):
            if v:
                total = total + var**d * v
    return total


def _series_poly(var: OperatorPoly, coeffs, offset: int) -> OperatorPoly:
    total = OperatorPoly.zero(var.mode_count, var.hbar)
    for k, ck in enumerate(coeffs):
        if ck:
            total = total + var ** (k + offset) * ck
    return total


def build(spec: ModelSpec) -> OperatorPoly:
    """Construct the Hamiltonian of a validated spec in canonical form."""
    spec.validate()
    hbar = spec.hbar
    kind = spec.kind
    if kind == "swanson":
        x = OperatorPoly.x(0, 1, hbar)
        p = OperatorPoly.p(0, 1, hbar)
        half_i_c = RationalComplex(0, Fraction(spec.c, 2))
        return (
            p * p * Fraction(1, 2) / spec.m
            + x * x * (spec.m * spec.omega**2 / 2)
            + (p * x + x * p) * half_i_c
        )
    if kind == "general_x":
        x = OperatorPoly.x(0, 1, hbar)
        p = OperatorPoly.p(0, 1, hbar)
        f = _series_poly(x, spec.series, spec.n)
        return (
            p * p * Fraction(1, 2) / spec.m
            + _potential(x, spec.V)
            + (f * p + p * f) * RationalComplex(0, Fraction(1, 2))
        )
    if kind == "general_p":
        x = OperatorPoly.x(0, 1, hbar)
        p = OperatorPoly.p(0, 1, hbar)
        g = _series_poly(p, spec.series, spec.n)
        return (
            x * x * (spec.A / 2)
            + _potential(p, spec.V)
            + (g * x + x * g) * RationalComplex(0, Fraction(1, 2))
        )
    if kind == "pu_I":
        x1 = OperatorPoly.x(0, 2, hbar)
        p1 = OperatorPoly.p(0, 2, hbar)
        x2 = OperatorPoly.x(1, 2, hbar)
        p2 = OperatorPoly.p(1, 2, hbar)
        w1sq, w2sq = spec.omega1**2, spec.omega2**2
        return (
            p1 * p1 * Fraction(1, 2) / spec.gamma
            + (p2 * x1) * RationalComplex(0, -1)
            + x1 * x1 * (spec.gamma * (w1sq + w2sq) / 2)
            + x2 * x2 * (spec.gamma * w1sq * w2sq / 2)
        )
    if kind == "pu_II":
        x1 = OperatorPoly.x(0, 2, hbar)
        p1 = OperatorPoly.p(0, 2, hbar)
        x2 = OperatorPoly.x(1, 2, hbar)
        p2 = OperatorPoly.p(1, 2, hbar)
        coupling = RationalComplex(0, spec.a3 / (2 * spec.m * spec.a1 * spec.a2))
        return (
            p1 * p1 * Fraction(1, 2) / spec.m
            + x1 * x1 * (spec.m * spec.a1**2 / 2)
            + p2 * p2 * Fraction(1, 2) / spec.m
            + x2 * x2 * (spec.m * spec.a2**2 / 2)
            + (p1 * p2) * coupling
        )
    raise InvalidParameterError(f"unknown model kind {kind!r}")


def series_radius(coeffs) -> Fraction | float:
    """Convergence-radius estimate ``|c_k / c_{k+1}|`` from the last
    consecutive pair of nonzero coefficients; ``inf`` for a finite series.

    Report-only: with a truncated list the estimate can differ from the
    true limit (e.g. factorially decaying coefficients).
    """
    if not coeffs:
        raise ValueError("empty coefficient list")
    coeffs = [_frac(v) for v in coeffs]
    for k in range(len(coeffs) - 2, -1, -1):
        if coeffs[k] != 0 and coeffs[k + 1] != 0:
            return abs(Fraction(coeffs[k], coeffs[k + 1]))
    return math.inf
