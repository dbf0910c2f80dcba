"""Exact scalars: the rationals, prime fields, and simple extensions K[x]/(f).

Rational numbers are plain :class:`fractions.Fraction` values.  Prime-field and
extension-field elements are small immutable wrappers carrying their field, so
mixing fields raises instead of silently producing garbage.
"""

from __future__ import annotations

import itertools
import re
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence, Union


class FieldMismatch(TypeError):
    pass


class Field:
    """Base class for the exact fields used throughout the package."""

    def __call__(self, value):
        raise NotImplementedError

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    @property
    def base(self) -> "Field":
        return self

    def elements(self) -> Iterator:
        raise NotImplementedError(f"{self} is not finite")


class RationalField(Field):
    def __call__(self, value) -> Fraction:
        if isinstance(value, (PrimeFieldElement, ExtensionElement)):
            raise FieldMismatch(f"cannot coerce {value!r} into Q")
        return Fraction(value)

    def __repr__(self) -> str:
        return "Q"

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalField)

    def __hash__(self) -> int:
        return hash("Q")


QQ = RationalField()


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, int(n**0.5) + 1))


class PrimeField(Field):
    def __init__(self, p: int):
        if not _is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p

    def __call__(self, value) -> "PrimeFieldElement":
        if isinstance(value, PrimeFieldElement):
            if value.field != self:
                raise FieldMismatch(f"{value!r} is not in F{self.p}")
            return value
        if isinstance(value, ExtensionElement):
            raise FieldMismatch(f"cannot coerce {value!r} into F{self.p}")
        if isinstance(value, Fraction):
            num = value.numerator % self.p
            den = value.denominator % self.p
            if den == 0:
                raise ZeroDivisionError(f"{value} has no image in F{self.p}")
            return PrimeFieldElement(num * pow(den, -1, self.p) % self.p, self)
        return PrimeFieldElement(int(value) % self.p, self)

    def elements(self) -> Iterator["PrimeFieldElement"]:
        for k in range(self.p):
            yield PrimeFieldElement(k, self)

    def __repr__(self) -> str:
        return f"F{self.p}"

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("F", self.p))


class PrimeFieldElement:
    __slots__ = ("value", "field")

    def __init__(self, value: int, field: PrimeField):
        self.value = value
        self.field = field

    def _coerce(self, other) -> "PrimeFieldElement":
        if isinstance(other, PrimeFieldElement):
            if other.field.p != self.field.p:
                raise FieldMismatch(f"F{self.field.p} vs F{other.field.p}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return PrimeFieldElement((self.value + other.value) % self.field.p, self.field)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return PrimeFieldElement((self.value - other.value) % self.field.p, self.field)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return PrimeFieldElement(self.value * other.value % self.field.p, self.field)

    __rmul__ = __mul__

    def __neg__(self):
        return PrimeFieldElement(-self.value % self.field.p, self.field)

    def inverse(self) -> "PrimeFieldElement":
        if self.value == 0:
            raise ZeroDivisionError("inverse of zero")
        return PrimeFieldElement(pow(self.value, -1, self.field.p), self.field)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return PrimeFieldElement(pow(self.value, n, self.field.p), self.field)

    def __eq__(self, other) -> bool:
        if isinstance(other, PrimeFieldElement):
            return self.field.p == other.field.p and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.field.p
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.field.p, self.value))

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return str(self.value)


# ---------------------------------------------------------------------------
# Polynomials over a base field
# ---------------------------------------------------------------------------


class Polynomial:
    """Dense univariate polynomial ``a_0 + a_1 x + ... + a_m x^m`` over a field."""

    __slots__ = ("field", "coeffs")

    def __init__(self, coeffs: Sequence, field: Field = QQ):
        cs = [field(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.field = field
        self.coeffs = tuple(cs)

    @classmethod
    def x(cls, field: Field = QQ) -> "Polynomial":
        return cls([0, 1], field)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lead(self):
        return self.coeffs[-1]

    def __getitem__(self, i: int):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else self.field.zero

    def __call__(self, value):
        acc = value * 0 if not isinstance(value, (int, Fraction)) else self.field.zero
        for c in reversed(self.coeffs):
            acc = acc * value + c
        return acc

    def _check(self, other: "Polynomial") -> None:
        if self.field != other.field:
            raise FieldMismatch(f"polynomials over {self.field} and {other.field}")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial([self[i] + other[i] for i in range(n)], self.field)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial([self[i] - other[i] for i in range(n)], self.field)

    def __neg__(self) -> "Polynomial":
        return Polynomial([-c for c in self.coeffs], self.field)

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return Polynomial([c * other for c in self.coeffs], self.field)
        self._check(other)
        if self.is_zero() or other.is_zero():
            return Polynomial([], self.field)
        out = [self.field.zero] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Polynomial(out, self.field)

    __rmul__ = __mul__

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        self._check(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        quot = [self.field.zero] * max(0, len(rem) - other.degree)
        inv_lead = 1 / other.lead() if isinstance(other.lead(), Fraction) else other.lead().inverse()
        while len(rem) - 1 >= other.degree and rem:
            shift = len(rem) - 1 - other.degree
            k = rem[-1] * inv_lead
            quot[shift] = k
            for i, b in enumerate(other.coeffs):
                rem[shift + i] = rem[shift + i] - k * b
            while rem and rem[-1] == 0:
                rem.pop()
        return Polynomial(quot, self.field), Polynomial(rem, self.field)

    __divmod__ = divmod

    def __mod__(self, other: "Polynomial") -> "Polynomial":
        return self.divmod(other)[1]

    def __floordiv__(self, other: "Polynomial") -> "Polynomial":
        return self.divmod(other)[0]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polynomial)
            and self.field == other.field
            and self.coeffs == other.coeffs
        )

    def __hash__(self) -> int:
        return hash((self.field, self.coeffs))

    def __repr__(self) -> str:
        return f"Polynomial({format_poly(self)!r} over {self.field})"

    def __str__(self) -> str:
        return format_poly(self)


def format_poly(f: Polynomial, var: str = "x") -> str:
    if f.is_zero():
        return "0"
    parts: list[str] = []
    for k in range(f.degree, -1, -1):
        c = f.coeffs[k]
        if c == 0:
            continue
        neg = isinstance(c, Fraction) and c < 0
        mag = -c if neg else c
        if k == 0:
            body = str(mag)
        else:
            mono = var if k == 1 else f"{var}^{k}"
            body = mono if mag == 1 else f"{mag}*{mono}"
        if not parts:
            parts.append(f"-{body}" if neg else body)
        else:
            parts.append(f" - {body}" if neg else f" + {body}")
    return "".join(parts)


def xgcd(a: Polynomial, b: Polynomial) -> tuple[Polynomial, Polynomial, Polynomial]:
    """Return ``(g, s, t)`` with ``s*a + t*b == g``."""
    F = a.field
    one, zero = Polynomial([1], F), Polynomial([], F)
    r0, r1, s0, s1, t0, t1 = a, b, one, zero, zero, one
    while not r1.is_zero():
        q, r = r0.divmod(r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return r0, s0, t0


# ---------------------------------------------------------------------------
# Irreducibility
# ---------------------------------------------------------------------------

MAX_RATIONAL_DEGREE = 4


class UnsupportedDegree(ValueError):
    pass


def monic_polynomials(field: PrimeField, degree: int) -> Iterator[Polynomial]:
    for tail in itertools.product(range(field.p), repeat=degree):
        yield Polynomial(list(tail) + [1], field)


def _irreducible_mod_p(f: Polynomial) -> bool:
    for d in range(1, f.degree // 2 + 1):
        for g in monic_polynomials(f.field, d):
            if (f % g).is_zero():
                return False
    return True


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small = [d for d in range(1, int(n**0.5) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _lagrange(xs: Sequence[int], ys: Sequence[int]) -> Polynomial:
    out = Polynomial([], QQ)
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        term = Polynomial([yi], QQ)
        for j, xj in enumerate(xs):
            if j != i:
                term = term * Polynomial([Fraction(-xj, xi - xj), Fraction(1, xi - xj)], QQ)
        out = out + term
    return out


def _irreducible_over_q(f: Polynomial) -> bool:
    if f.degree > MAX_RATIONAL_DEGREE:
        raise UnsupportedDegree(
            f"irreducibility over Q is only decided up to degree {MAX_RATIONAL_DEGREE}"
        )
    # clear denominators so Gauss's lemma applies to integer factors
    den = 1
    for c in f.coeffs:
        den = den * c.denominator // _gcd(den, c.denominator)
    ints = [int(c * den) for c in f.coeffs]
    # Kronecker: a factor of degree d is pinned down by its values at d+1 points
    for d in range(1, f.degree // 2 + 1):
        points: list[int] = []
        k = 0
        while len(points) < d + 1:
            for cand in (k, -k) if k else (0,):
                if cand not in points and len(points) < d + 1:
                    val = sum(c * cand**i for i, c in enumerate(ints))
                    if val == 0:
                        return False  # rational root
                    points.append(cand)
            k += 1
        values = [sum(c * x**i for i, c in enumerate(ints)) for x in points]
        choices = [[s * q for q in _divisors(v) for s in (1, -1)] for v in values]
        fz = Polynomial(ints, QQ)
        for ys in itertools.product(*choices):
            g = _lagrange(points, ys)
            if g.degree != d or any(c.denominator != 1 for c in g.coeffs):
                continue
            if (fz % g).is_zero():
                return False
    return True


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def is_irreducible(f: Polynomial) -> bool:
    if f.is_zero() or f.degree < 1:
        return False
    if f.degree == 1:
        return True
    if isinstance(f.field, PrimeField):
        return _irreducible_mod_p(f)
    if isinstance(f.field, RationalField):
        return _irreducible_over_q(f)
    raise TypeError(f"no irreducibility test over {f.field}")


def is_basic_irreducible(f: Polynomial) -> bool:
    """Irreducible with constant term -1."""
    if f.is_zero():
        return False
    return f[0] == f.field(-1) and is_irreducible(f)


# ---------------------------------------------------------------------------
# Simple extensions K' = K[x]/(f)
# ---------------------------------------------------------------------------


class ExtensionField(Field):
    """``base[x]/(f)`` for a basic irreducible ``f``; ``xbar`` is the class of x."""

    def __init__(self, base: Field, f: Polynomial, check: bool = True):
        if f.field != base:
            raise FieldMismatch(f"{f} is not over {base}")
        if check and not is_basic_irreducible(f):
            raise ValueError(f"{f} is not basic irreducible over {base}")
        self._base = base
        self.modulus = f
        self.degree = f.degree

    @property
    def base(self) -> Field:
        return self._base

    def __call__(self, value) -> "ExtensionElement":
        if isinstance(value, ExtensionElement):
            if value.field != self:
                raise FieldMismatch(f"{value!r} is not in {self}")
            return value
        if isinstance(value, Polynomial):
            r = value % self.modulus
            return ExtensionElement(self._pad(r.coeffs), self)
        c = self._base(value)
        return ExtensionElement(self._pad((c,)), self)

    def _pad(self, cs: Sequence) -> tuple:
        z = self._base.zero
        cs = tuple(cs) + (z,) * (self.degree - len(cs))
        return cs[: self.degree]

    @cached_property
    def xbar(self) -> "ExtensionElement":
        return self(Polynomial.x(self._base))

    def from_coefficients(self, cs: Sequence) -> "ExtensionElement":
        return ExtensionElement(self._pad([self._base(c) for c in cs]), self)

    def elements(self) -> Iterator["ExtensionElement"]:
        for cs in itertools.product(list(self._base.elements()), repeat=self.degree):
            yield ExtensionElement(tuple(cs), self)

    def __repr__(self) -> str:
        return f"{self._base}[x]/({format_poly(self.modulus)})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ExtensionField)
            and other._base == self._base
            and other.modulus == self.modulus
        )

    def __hash__(self) -> int:
        return hash((self._base, self.modulus))


class ExtensionElement:
    """Residue class represented by its coefficient vector of length deg f."""

    __slots__ = ("coeffs", "field")

    def __init__(self, coeffs: tuple, field: ExtensionField):
        self.coeffs = coeffs
        self.field = field

    def _coerce(self, other):
        if isinstance(other, ExtensionElement):
            if other.field != self.field:
                raise FieldMismatch(f"{self.field} vs {other.field}")
            return other
        if isinstance(other, (int, Fraction, PrimeFieldElement)):
            return self.field(other)
        return NotImplemented

    def poly(self) -> Polynomial:
        return Polynomial(self.coeffs, self.field.base)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ExtensionElement(
            tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.field
        )

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ExtensionElement(
            tuple(a - b for a, b in zip(self.coeffs, other.coeffs)), self.field
        )

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return ExtensionElement(tuple(-a for a in self.coeffs), self.field)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.field.degree == 1:
            return ExtensionElement((self.coeffs[0] * other.coeffs[0],), self.field)
        return self.field(self.poly() * other.poly())

    __rmul__ = __mul__

    def inverse(self) -> "ExtensionElement":
        if not self:
            raise ZeroDivisionError("inverse of zero")
        g, s, _ = xgcd(self.poly(), self.field.modulus)
        # g is a nonzero constant since the modulus is irreducible
        return self.field(s * (1 / g.coeffs[0] if isinstance(g.coeffs[0], Fraction) else g.coeffs[0].inverse()))

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        acc, base = self.field.one, self
        while n:
            if n & 1:
                acc = acc * base
            base = base * base
            n >>= 1
        return acc

    def __eq__(self, other) -> bool:
        if isinstance(other, ExtensionElement):
            return self.field == other.field and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction, PrimeFieldElement)):
            try:
                return self == self.field(other)
            except FieldMismatch:
                return False
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __bool__(self) -> bool:
        return any(c != 0 for c in self.coeffs)

    def __repr__(self) -> str:
        return format_poly(self.poly(), "xbar") if self else "0"


def extend(base: Field, f: Polynomial) -> ExtensionField:
    return ExtensionField(base, f)


Scalar = Union[Fraction, PrimeFieldElement, ExtensionElement]


def inverse(a: Scalar) -> Scalar:
    if isinstance(a, Fraction):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / a
    return a.inverse()


# ---------------------------------------------------------------------------
# Literal syntax: "x^2+x-1 over Q", "x^2+x+1 over F2"
# ---------------------------------------------------------------------------

_TERM = re.compile(
    r"([+-]?)\s*(\d+(?:/\d+)?)?\s*\*?\s*(x(?:\s*\^\s*(\d+))?)?"
)


def parse_field(text: str) -> Field:
    text = text.strip()
    if text in ("Q", "QQ"):
        return QQ
    m = re.fullmatch(r"(?:F|GF)\(?(\d+)\)?", text)
    if m:
        return PrimeField(int(m.group(1)))
    raise ValueError(f"unknown field {text!r}; use Q or F<p>")


def parse_polynomial(text: str, field: Field | None = None) -> Polynomial:
    """Parse ``"x^2+x-1 over Q"``; the ``over`` clause may be omitted if *field* is given."""
    body = text
    if " over " in text:
        body, _, ftxt = text.rpartition(" over ")
        field = parse_field(ftxt)
    if field is None:
        field = QQ
    s = body.replace(" ", "")
    if not s:
        raise ValueError("empty polynomial")
    coeffs: dict[int, Fraction] = {}
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse polynomial {text!r} at {s[pos:]!r}")
        sign, num, xpart, exp = m.groups()
        if num is None and xpart is None:
            raise ValueError(f"cannot parse polynomial {text!r} at {s[pos:]!r}")
        if pos > 0 and not sign:
            raise ValueError(f"missing operator in {text!r}")
        k = Fraction(num) if num else Fraction(1)
        if sign == "-":
            k = -k
        deg = 0 if xpart is None else (int(exp) if exp else 1)
        coeffs[deg] = coeffs.get(deg, Fraction(0)) + k
        pos = m.end()
    top = max(coeffs)
    return Polynomial([coeffs.get(i, 0) for i in range(top + 1)], field)
