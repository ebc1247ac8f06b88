"""Exact algebra of normal-ordered polynomials in canonical pairs.

Operators are finite sums of monomials ``x_0^a0 p_0^b0 x_1^a1 p_1^b1 ...``
over ``M`` canonical pairs obeying ``[x_j, p_k] = i*hbar*delta_jk`` with all
other generator commutators vanishing.  Within each mode every ``x`` factor
precedes every ``p`` factor (normal order), distinct modes commute, and
coefficients are complex numbers with exact rational parts, so the canonical
form is unique and all identities can be checked to literal zero.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple


class IncompatibleAlgebraError(ValueError):
    """Raised when operands live in different algebras (mode count or hbar)."""


class NotAFunctionError(ValueError):
    """Raised when an antiderivative is requested for a genuine operator."""


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        if "." in value or "e" in value or "E" in value:
            raise ValueError(f"exact rational expected, got {value!r}")
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


class RationalComplex:
    """Complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _frac(re)
        self.im = _frac(im)

    @classmethod
    def coerce(cls, value) -> "RationalComplex":
        if isinstance(value, RationalComplex):
            return value
        if isinstance(value, (int, Fraction, str)):
            return cls(value)
        raise TypeError(f"cannot interpret {value!r} as an exact complex rational")

    def __add__(self, other):
        other = RationalComplex.coerce(other)
        return RationalComplex(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = RationalComplex.coerce(other)
        return RationalComplex(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return RationalComplex.coerce(other).__sub__(self)

    def __mul__(self, other):
        other = RationalComplex.coerce(other)
        return RationalComplex(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = RationalComplex.coerce(other)
        den = other.re * other.re + other.im * other.im
        if den == 0:
            raise ZeroDivisionError("division by zero")
        return RationalComplex(
            (self.re * other.re + self.im * other.im) / den,
            (self.im * other.re - self.re * other.im) / den,
        )

    def __neg__(self):
        return RationalComplex(-self.re, -self.im)

    def conjugate(self) -> "RationalComplex":
        return RationalComplex(self.re, -self.im)

    def is_real(self) -> bool:
        return self.im == 0

    def __bool__(self) -> bool:
        return self.re != 0 or self.im != 0

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = RationalComplex(other)
        if not isinstance(other, RationalComplex):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"({self.re},{self.im})"


RC_ZERO = RationalComplex(0)
RC_ONE = RationalComplex(1)
RC_I = RationalComplex(0, 1)

# (-i)^k for k mod 4, as (re, im) signs
_NEG_I_POWERS = ((1, 0), (0, -1), (-1, 0), (0, 1))


def _reorder_coefficients(b: int, a: int, hbar: Fraction):
    """Expansion of the word ``p^b x^a`` in normal order.

    Returns the list of ``(k, coeff)`` such that
    ``p^b x^a = sum_k coeff_k * x^(a-k) p^(b-k)`` with
    ``coeff_k = (-i*hbar)^k * k! * C(b,k) * C(a,k)``.
    """
    out = []
    for k in range(min(a, b) + 1):
        mag = Fraction(math.comb(a, k) * math.comb(b, k) * math.factorial(k)) * hbar**k
        sre, sim = _NEG_I_POWERS[k % 4]
        out.append((k, RationalComplex(sre * mag, sim * mag)))
    return out


class Classification(NamedTuple):
    is_hermitian: bool
    is_pt_symmetric: bool


class OperatorPoly:
    """Normal-ordered operator polynomial with exact coefficients.

    Instances are immutable by convention; every operation returns a new
    value, so polynomials can be shared freely between threads.
    """

    __slots__ = ("mode_count", "hbar", "terms")

    def __init__(self, mode_count: int, terms=None, hbar=Fraction(1)):
        if mode_count < 1:
            raise ValueError("mode_count must be positive")
        hbar = _frac(hbar)
        if hbar <= 0:
            raise ValueError("hbar must be positive")
        self.mode_count = int(mode_count)
        self.hbar = hbar
        clean = {}
        if terms:
            width = 2 * self.mode_count
            for mono, coeff in dict(terms).items():
                mono = tuple(int(e) for e in mono)
                if len(mono) != width or any(e < 0 for e in mono):
                    raise ValueError(f"bad monomial {mono} for {self.mode_count} modes")
                coeff = RationalComplex.coerce(coeff)
                if coeff:
                    clean[mono] = coeff
        self.terms = clean

    # ---------------------------------------------------------------- factories

    @classmethod
    def zero(cls, mode_count: int = 1, hbar=Fraction(1)) -> "OperatorPoly":
        return cls(mode_count, None, hbar)

    @classmethod
    def constant(cls, value, mode_count: int = 1, hbar=Fraction(1)) -> "OperatorPoly":
        mono = (0,) * (2 * mode_count)
        return cls(mode_count, {mono: RationalComplex.coerce(value)}, hbar)

    @classmethod
    def x(cls, mode: int = 0, mode_count: int = 1, hbar=Fraction(1)) -> "OperatorPoly":
        mono = [0] * (2 * mode_count)
        mono[2 * mode] = 1
        return cls(mode_count, {tuple(mono): RC_ONE}, hbar)

    @classmethod
    def p(cls, mode: int = 0, mode_count: int = 1, hbar=Fraction(1)) -> "OperatorPoly":
        mono = [0] * (2 * mode_count)
        mono[2 * mode + 1] = 1
        return cls(mode_count, {tuple(mono): RC_ONE}, hbar)

    # ------------------------------------------------------------------- basics

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, mono) -> RationalComplex:
        return self.terms.get(tuple(mono), RC_ZERO)

    def degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(m) for m in self.terms)

    def generator_degree(self, mode: int, var: str) -> int:
        """Highest power of ``x_mode`` or ``p_mode`` appearing in any term."""
        idx = 2 * mode + (0 if var == "x" else 1)
        if not self.terms:
            return 0
        return max(m[idx] for m in self.terms)

    def _check_compatible(self, other: "OperatorPoly"):
        if self.mode_count != other.mode_count or self.hbar != other.hbar:
            raise IncompatibleAlgebraError(
                f"incompatible algebras: {self.mode_count} modes (hbar={self.hbar}) vs "
                f"{other.mode_count} modes (hbar={other.hbar})"
            )

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperatorPoly):
            return NotImplemented
        return (
            self.mode_count == other.mode_count
            and self.hbar == other.hbar
            and self.terms == other.terms
        )

    __hash__ = None

    # --------------------------------------------------------------- arithmetic

    def __add__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            other = OperatorPoly.constant(other, self.mode_count, self.hbar)
        if not isinstance(other, OperatorPoly):
            return NotImplemented
        self._check_compatible(other)
        terms = dict(self.terms)
        for mono, coeff in other.terms.items():
            acc = terms.get(mono, RC_ZERO) + coeff
            if acc:
                terms[mono] = acc
            else:
                terms.pop(mono, None)
        return OperatorPoly(self.mode_count, terms, self.hbar)

    __radd__ = __add__

    def __neg__(self):
        return OperatorPoly(
            self.mode_count, {m: -c for m, c in self.terms.items()}, self.hbar
        )

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            other = OperatorPoly.constant(other, self.mode_count, self.hbar)
        if not isinstance(other, OperatorPoly):
            return NotImplemented
        return self.__add__(other.__neg__())

    def __rsub__(self, other):
        return (-self).__add__(other)

    def scale(self, value) -> "OperatorPoly":
        value = RationalComplex.coerce(value)
        return OperatorPoly(
            self.mode_count, {m: c * value for m, c in self.terms.items()}, self.hbar
        )

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            return self.scale(other)
        if not isinstance(other, OperatorPoly):
            return NotImplemented
        self._check_compatible(other)
        acc: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                self._accumulate_product(acc, m1, c1, m2, c2)
        return OperatorPoly(self.mode_count, acc, self.hbar)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, RationalComplex)):
            return self.scale(RC_ONE / RationalComplex.coerce(other))
        return NotImplemented

    def __pow__(self, exponent: int):
        if exponent < 0:
            raise ValueError("negative operator powers are not defined")
        result = OperatorPoly.constant(1, self.mode_count, self.hbar)
        for _ in range(exponent):
            result = result * self
        return result

    def _accumulate_product(self, acc, m1, c1, m2, c2):
        # Normal-order the word (m1)(m2) mode by mode; modes commute, so the
        # expansions combine as a cartesian product.
        partial = [((), c1 * c2)]
        for j in range(self.mode_count):
            a1, b1 = m1[2 * j], m1[2 * j + 1]
            a2, b2 = m2[2 * j], m2[2 * j + 1]
            expansions = _reorder_coefficients(b1, a2, self.hbar)
            nxt = []
            for exps, coeff in partial:
                for k, rc in expansions:
                    nxt.append((exps + (a1 + a2 - k, b1 + b2 - k), coeff * rc))
            partial = nxt
        for mono, coeff in partial:
            if not coeff:
                continue
            total = acc.get(mono, RC_ZERO) + coeff
            if total:
                acc[mono] = total
            else:
                acc.pop(mono, None)

    # ------------------------------------------------------------- involutions

    def commutator(self, other: "OperatorPoly") -> "OperatorPoly":
        """``[self, other] = self*other - other*self`` in canonical form."""
        return self * other - other * self

    def adjoint(self) -> "OperatorPoly":
        """Hermitian adjoint: conjugate coefficients, reverse words, re-order."""
        acc: dict = {}
        for mono, coeff in self.terms.items():
            conj = coeff.conjugate()
            partial = [((), conj)]
            for j in range(self.mode_count):
                a, b = mono[2 * j], mono[2 * j + 1]
                # (x^a p^b)^dagger = p^b x^a, rewritten to normal order
                expansions = _reorder_coefficients(b, a, self.hbar)
                nxt = []
                for exps, cf in partial:
                    for k, rc in expansions:
                        nxt.append((exps + (a - k, b - k), cf * rc))
                partial = nxt
            for m, cf in partial:
                if not cf:
                    continue
                total = acc.get(m, RC_ZERO) + cf
                if total:
                    acc[m] = total
                else:
                    acc.pop(m, None)
        return OperatorPoly(self.mode_count, acc, self.hbar)

    def pt_transform(self, scalar_modes: Iterable[int] = ()) -> "OperatorPoly":
        """Combined antilinear parity/time-reversal map.

        Per mode the parity and time-reversal actions are
        pseudo-scalar  P: (x,p) -> (-x,-p),  T: (x,p) -> (+x,-p);
        scalar         P: (x,p) -> (+x,+p),  T: (x,p) -> (-x,+p).
        Either way the combined map sends x -> -x, p -> +p and conjugates
        coefficients; the convention only matters for P and T separately.
        """
        scalar_modes = set(scalar_modes)
        for j in scalar_modes:
            if not 0 <= j < self.mode_count:
                raise ValueError(f"mode {j} out of range")
        signs = []
        for j in range(self.mode_count):
            if j in scalar_modes:
                (px, pp), (tx, tp) = (1, 1), (-1, 1)
            else:
                (px, pp), (tx, tp) = (-1, -1), (1, -1)
            signs.append((px * tx, pp * tp))
        terms = {}
        for mono, coeff in self.terms.items():
            sign = 1
            for j in range(self.mode_count):
                sx, sp = signs[j]
                sign *= sx ** mono[2 * j] * sp ** mono[2 * j + 1]
            terms[mono] = coeff.conjugate() * sign
        return OperatorPoly(self.mode_count, terms, self.hbar)

    # ------------------------------------------------------------------ calculus

    def differentiate(self, mode: int, var: str) -> "OperatorPoly":
        """Formal derivative of the canonical form with respect to one generator."""
        idx = 2 * mode + (0 if var == "x" else 1)
        terms: dict = {}
        for mono, coeff in self.terms.items():
            e = mono[idx]
            if e == 0:
                continue
            new = list(mono)
            new[idx] = e - 1
            key = tuple(new)
            total = terms.get(key, RC_ZERO) + coeff * e
            if total:
                terms[key] = total
        return OperatorPoly(self.mode_count, terms, self.hbar)

    def integrate(self, mode: int, var: str) -> "OperatorPoly":
        """Formal antiderivative with the additive constant fixed to zero.

        Only defined when the polynomial contains no power of the conjugate
        generator of the chosen mode, i.e. when it is an ordinary function
        of that generator.
        """
        idx = 2 * mode + (0 if var == "x" else 1)
        conj_idx = 2 * mode + (1 if var == "x" else 0)
        if any(m[conj_idx] != 0 for m in self.terms):
            conj_name = "p" if var == "x" else "x"
            raise NotAFunctionError(
                f"cannot integrate in {var}{mode}: operand contains {conj_name}{mode}"
            )
        terms = {}
        for mono, coeff in self.terms.items():
            new = list(mono)
            new[idx] = mono[idx] + 1
            terms[tuple(new)] = coeff / (mono[idx] + 1)
        return OperatorPoly(self.mode_count, terms, self.hbar)

    # --------------------------------------------------------------------- text

    def to_text(self) -> str:
        """Lossless textual form, e.g. ``(1/2,0) x0^2 p0 + (0,-1) 1``."""
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms):
            coeff = self.terms[mono]
            word = []
            for j in range(self.mode_count):
                a, b = mono[2 * j], mono[2 * j + 1]
                if a:
                    word.append(f"x{j}" + (f"^{a}" if a > 1 else ""))
                if b:
                    word.append(f"p{j}" + (f"^{b}" if b > 1 else ""))
            parts.append(f"({coeff.re},{coeff.im}) " + (" ".join(word) or "1"))
        return " + ".join(parts)

    __str__ = to_text

    def __repr__(self):
        return f"OperatorPoly({self.mode_count}, {self.to_text()!r}, hbar={self.hbar})"

    @classmethod
    def from_text(cls, text: str, mode_count=None, hbar=Fraction(1)) -> "OperatorPoly":
        """Parse the ``to_text`` format back into a polynomial."""
        text = text.strip()
        term_re = re.compile(r"^\(([^,()]+),([^,()]+)\)\s*(.*)$")
        factor_re = re.compile(r"^([xp])(\d+)(?:\^(\d+))?$")
        raw_terms = []
        max_mode = -1
        if text != "0":
            for chunk in text.split(" + "):
                m = term_re.match(chunk.strip())
                if not m:
                    raise ValueError(f"cannot parse term {chunk!r}")
                coeff = RationalComplex(m.group(1), m.group(2))
                exps: dict = {}
                word = m.group(3).strip()
                if word and word != "1":
                    for factor in word.split():
                        fm = factor_re.match(factor)
                        if not fm:
                            raise ValueError(f"cannot parse factor {factor!r}")
                        var, mode, power = fm.group(1), int(fm.group(2)), int(fm.group(3) or 1)
                        idx = 2 * mode + (0 if var == "x" else 1)
                        exps[idx] = exps.get(idx, 0) + power
                        max_mode = max(max_mode, mode)
                raw_terms.append((exps, coeff))
        if mode_count is None:
            mode_count = max(max_mode + 1, 1)
        terms: dict = {}
        for exps, coeff in raw_terms:
            mono = [0] * (2 * mode_count)
            for idx, power in exps.items():
                if idx >= 2 * mode_count:
                    raise ValueError("mode index exceeds declared mode_count")
                mono[idx] = power
            key = tuple(mono)
            total = terms.get(key, RC_ZERO) + coeff
            if total:
                terms[key] = total
            else:
                terms.pop(key, None)
        return cls(mode_count, terms, hbar)

    def iter_terms(self) -> Iterator[tuple[tuple, RationalComplex]]:
        return iter(sorted(self.terms.items()))


def classify(poly: OperatorPoly, scalar_modes: Iterable[int] = ()) -> Classification:
    """Hermiticity and PT-symmetry flags of an operator polynomial."""
    return Classification(
        is_hermitian=poly.adjoint() == poly,
        is_pt_symmetric=poly.pt_transform(scalar_modes) == poly,
    )
