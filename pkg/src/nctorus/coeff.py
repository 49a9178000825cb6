"""Exact scalar tower.

Everything downstream computes in the commutative ring

    Scalar = CircleConst * (truncated power series in h with coefficients
             in Q(i)[pi])

where pi is a formal transcendental symbol and h is the deformation
parameter, truncated at a fixed order N.  All arithmetic is exact; there
is no floating point anywhere in the package.

Units of the series ring decompose as a_0 * exp(a_1 h + a_2 h^2 + ...);
`exp_decompose` computes that decomposition and `series_exp`/`series_log`
are the two directions of the bijection it rests on.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

try:  # gmpy2's rationals are drop-in and a lot faster on the hot paths
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    Q = Fraction

__all__ = [
    "Q",
    "GRat",
    "PiPoly",
    "HbarSeries",
    "CircleConst",
    "Scalar",
    "UnitDecomposition",
    "CoeffError",
    "OrderMismatch",
    "NotInvertible",
    "NotRepresentable",
    "series_exp",
    "series_log",
    "exp_decompose",
    "GRAT_ZERO",
    "GRAT_ONE",
    "GRAT_I",
    "PI_ZERO",
    "PI_ONE",
    "CIRCLE_ONE",
]


class CoeffError(ValueError):
    """Base class for scalar-tower errors."""


class OrderMismatch(CoeffError):
    """Arithmetic between series of different truncation orders."""


class NotInvertible(CoeffError):
    """Inversion of a non-unit."""


class NotRepresentable(CoeffError):
    """Operation leaves the exactly representable class."""


def _rat(x) -> "Q":
    if isinstance(x, (int, Fraction)):
        return Q(x)
    if isinstance(x, str):
        return Q(x.strip().lstrip("+"))  # gmpy2 rejects a leading '+'
    return x  # already a Q


def _mod2(q):
    """Reduce a rational into [0, 2)."""
    q = _rat(q)
    n, d = q.numerator, q.denominator
    return Q(n % (2 * d), d)


def _rat_str(q) -> str:
    return str(q)


# ---------------------------------------------------------------------------
# Gaussian rationals


class GRat:
    """A Gaussian rational re + im*i with exact rational parts.

    A plain slots class rather than a dataclass: these are created in
    bulk on every arithmetic path.  Treat instances as immutable.
    """

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = re
        self.im = im

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GRat) and self.re == other.re and self.im == other.im
        )

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"GRat({self.re!r}, {self.im!r})"

    @staticmethod
    def of(re, im=0) -> "GRat":
        return GRat(_rat(re), _rat(im))

    def __add__(self, other: "GRat") -> "GRat":
        return GRat(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GRat") -> "GRat":
        return GRat(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "GRat":
        return GRat(-self.re, -self.im)

    def __mul__(self, other: "GRat") -> "GRat":
        a, b, c, d = self.re, self.im, other.re, other.im
        return GRat(a * c - b * d, a * d + b * c)

    def scale(self, q) -> "GRat":
        q = _rat(q)
        return GRat(self.re * q, self.im * q)

    def inverse(self) -> "GRat":
        n = self.re * self.re + self.im * self.im
        if n == 0:
            raise NotInvertible("division by zero Gaussian rational")
        return GRat(self.re / n, -self.im / n)

    def __truediv__(self, other: "GRat") -> "GRat":
        return self * other.inverse()

    def conj(self) -> "GRat":
        return GRat(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __str__(self) -> str:
        if self.im == 0:
            return _rat_str(self.re)
        if self.re == 0:
            return f"{_rat_str(self.im)} i"
        sign = "+" if self.im > 0 else "-"
        return f"{_rat_str(self.re)}{sign}{_rat_str(abs(self.im))} i"

    @staticmethod
    def parse(text: str) -> "GRat":
        """Parse 'a/b', 'c/d i', or 'a/b+c/d i' (also with '-')."""
        s = text.strip().replace(" ", "")
        if not s:
            raise CoeffError("empty Gaussian rational literal")
        if s.endswith("i"):
            body = s[:-1]
            # split at the last +/- that is not the leading sign
            for k in range(len(body) - 1, 0, -1):
                if body[k] in "+-" and body[k - 1] not in "+-/":
                    re_part, im_part = body[:k], body[k:]
                    im_part = im_part.rstrip("*")
                    if im_part in ("+", "-"):
                        im_part += "1"
                    return GRat(_rat(re_part), _rat(im_part))
            body = body.rstrip("*")
            if body in ("", "+"):
                body = "1"
            elif body == "-":
                body = "-1"
            return GRat(Q(0), _rat(body))
        return GRat(_rat(s), Q(0))


GRAT_ZERO = GRat(Q(0), Q(0))
GRAT_ONE = GRat(Q(1), Q(0))
GRAT_I = GRat(Q(0), Q(1))

_I_POWERS = (GRAT_ONE, GRAT_I, -GRAT_ONE, -GRAT_I)


# ---------------------------------------------------------------------------
# Polynomials in the formal symbol pi


class PiPoly:
    """Polynomial in pi with GRat coefficients, sparse and normalized."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = terms  # ((degree, GRat), ...) sorted by degree, no zeros

    def __eq__(self, other) -> bool:
        return isinstance(other, PiPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self):
        return f"PiPoly({self.terms!r})"

    @staticmethod
    def of(coeffs: dict) -> "PiPoly":
        items = tuple(sorted((d, c) for d, c in coeffs.items() if c))
        return PiPoly(items)

    @staticmethod
    def const(c: GRat) -> "PiPoly":
        return PiPoly(((0, c),)) if c else PI_ZERO

    @staticmethod
    def pi_power(k: int, c: GRat = GRAT_ONE) -> "PiPoly":
        return PiPoly(((k, c),)) if c else PI_ZERO

    def __add__(self, other: "PiPoly") -> "PiPoly":
        a, b = self.terms, other.terms
        if not a:
            return other
        if not b:
            return self
        out = []
        i = j = 0
        la, lb = len(a), len(b)
        while i < la and j < lb:
            da, ca = a[i]
            db, cb = b[j]
            if da < db:
                out.append(a[i])
                i += 1
            elif db < da:
                out.append(b[j])
                j += 1
            else:
                s = ca + cb
                if s:
                    out.append((da, s))
                i += 1
                j += 1
        out.extend(a[i:])
        out.extend(b[j:])
        return PiPoly(tuple(out))

    def __neg__(self) -> "PiPoly":
        return PiPoly(tuple((d, -c) for d, c in self.terms))

    def __sub__(self, other: "PiPoly") -> "PiPoly":
        return self + (-other)

    def __mul__(self, other: "PiPoly") -> "PiPoly":
        a, b = self.terms, other.terms
        if not a or not b:
            return PI_ZERO
        if len(b) == 1:
            d2, c2 = b[0]
            return PiPoly(tuple((d + d2, c * c2) for d, c in a))
        if len(a) == 1:
            d1, c1 = a[0]
            return PiPoly(tuple((d + d1, c1 * c) for d, c in b))
        acc: dict = {}
        for d1, c1 in a:
            for d2, c2 in b:
                d = d1 + d2
                p = c1 * c2
                s = acc.get(d)
                acc[d] = p if s is None else s + p
        return PiPoly.of(acc)

    def scale(self, c: GRat) -> "PiPoly":
        if not c:
            return PI_ZERO
        return PiPoly(tuple((d, x * c) for d, x in self.terms))

    def scale_rat(self, q) -> "PiPoly":
        q = _rat(q)
        if q == 0:
            return PI_ZERO
        return PiPoly(tuple((d, GRat(x.re * q, x.im * q)) for d, x in self.terms))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def constant_part(self) -> GRat:
        for d, c in self.terms:
            if d == 0:
                return c
        return GRAT_ZERO

    def is_const(self) -> bool:
        return all(d == 0 for d, _ in self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for d, c in self.terms:
            cs = str(c)
            if ("+" in cs[1:]) or ("-" in cs[1:]) or cs.endswith("i"):
                cs = f"({cs})"
            if d == 0:
                out.append(cs)
            else:
                p = "pi" if d == 1 else f"pi^{d}"
                out.append(p if cs == "1" else f"{cs}*{p}")
        return " + ".join(out).replace("+ -", "- ")


PI_ZERO = PiPoly(())
PI_ONE = PiPoly(((0, GRAT_ONE),))


# ---------------------------------------------------------------------------
# Truncated series in the deformation parameter


class HbarSeries:
    """Power series in h modulo h^order, coefficients in Q(i)[pi]."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order, coeffs):
        self.order = order
        self.coeffs = coeffs  # tuple[PiPoly], length == order

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, HbarSeries)
            and self.order == other.order
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.order, self.coeffs))

    def __repr__(self):
        return f"HbarSeries({self.order}, {self.coeffs!r})"

    @staticmethod
    def of(order: int, coeffs: dict) -> "HbarSeries":
        if order < 1:
            raise CoeffError("truncation order must be >= 1")
        return HbarSeries(
            order, tuple(coeffs.get(k, PI_ZERO) for k in range(order))
        )

    @staticmethod
    def one(order: int) -> "HbarSeries":
        return HbarSeries.of(order, {0: PI_ONE})

    @staticmethod
    def zero(order: int) -> "HbarSeries":
        return HbarSeries.of(order, {})

    @staticmethod
    def const(order: int, c: GRat) -> "HbarSeries":
        return HbarSeries.of(order, {0: PiPoly.const(c)})

    def _check(self, other: "HbarSeries") -> None:
        if self.order != other.order:
            raise OrderMismatch(
                f"truncation orders differ: {self.order} != {other.order}"
            )

    def __add__(self, other: "HbarSeries") -> "HbarSeries":
        self._check(other)
        return HbarSeries(
            self.order,
            tuple(a + b for a, b in zip(self.coeffs, other.coeffs)),
        )

    def __neg__(self) -> "HbarSeries":
        return HbarSeries(self.order, tuple(-a for a in self.coeffs))

    def __sub__(self, other: "HbarSeries") -> "HbarSeries":
        return self + (-other)

    def __mul__(self, other: "HbarSeries") -> "HbarSeries":
        self._check(other)
        n = self.order
        out = [PI_ZERO] * n
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j in range(n - i):
                b = other.coeffs[j]
                if b:
                    out[i + j] = out[i + j] + a * b
        return HbarSeries(n, tuple(out))

    def scale(self, c: GRat) -> "HbarSeries":
        return HbarSeries(self.order, tuple(a.scale(c) for a in self.coeffs))

    def scale_rat(self, q) -> "HbarSeries":
        return HbarSeries(self.order, tuple(a.scale_rat(q) for a in self.coeffs))

    def shift(self, k: int) -> "HbarSeries":
        """Multiply by h^k."""
        return HbarSeries(
            self.order, tuple([PI_ZERO] * k + list(self.coeffs[: self.order - k]))
        )

    def is_zero(self) -> bool:
        return all(not a for a in self.coeffs)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def constant_term(self) -> PiPoly:
        return self.coeffs[0]

    def inverse(self) -> "HbarSeries":
        c0 = self.coeffs[0]
        if not c0.is_const() or c0.is_zero():
            raise NotInvertible("series unit must have invertible h^0 term")
        c = c0.constant_part()
        cinv = c.inverse()
        # u = c (1 + x); 1/u = (1/c) sum (-x)^k
        x = self.scale(cinv) - HbarSeries.one(self.order)
        acc = HbarSeries.one(self.order)
        term = HbarSeries.one(self.order)
        for _ in range(1, self.order):
            term = term * (-x)
            if term.is_zero():
                break
            acc = acc + term
        return acc.scale(cinv)

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        out = []
        for k, a in enumerate(self.coeffs):
            if not a:
                continue
            s = str(a)
            if " " in s or s.startswith("-"):
                s = f"({s})"
            if k == 0:
                out.append(s)
            else:
                p = "h" if k == 1 else f"h^{k}"
                out.append(p if s == "1" else f"{s}*{p}")
        return " + ".join(out)


def series_exp(a: HbarSeries) -> HbarSeries:
    """exp of an h-divisible series; finite sum modulo h^order."""
    if a.coeffs[0]:
        raise NotRepresentable("series_exp needs a zero constant term")
    acc = HbarSeries.one(a.order)
    term = HbarSeries.one(a.order)
    for k in range(1, a.order):
        term = (term * a).scale_rat(Q(1, k))
        if term.is_zero():
            break
        acc = acc + term
    return acc


def series_log(u: HbarSeries) -> HbarSeries:
    """log of a series with constant term 1 (Mercator, truncated)."""
    c0 = u.coeffs[0]
    if not (c0.is_const() and c0.constant_part() == GRAT_ONE):
        raise NotRepresentable("series_log needs constant term 1")
    x = u - HbarSeries.one(u.order)
    acc = HbarSeries.zero(u.order)
    term = HbarSeries.one(u.order)
    for k in range(1, u.order):
        term = term * x
        if term.is_zero():
            break
        acc = acc + term.scale_rat(Q((-1) ** (k + 1), k))
    return acc


# ---------------------------------------------------------------------------
# Exactly representable unit-circle constants


@dataclass(frozen=True)
class CircleConst:
    """exp(pi*i*q) for a rational q, stored modulo 2."""

    q: object

    @staticmethod
    def of(q) -> "CircleConst":
        return CircleConst(_mod2(q))

    def __mul__(self, other: "CircleConst") -> "CircleConst":
        return CircleConst(_mod2(self.q + other.q))

    def inverse(self) -> "CircleConst":
        return CircleConst(_mod2(-self.q))

    def conj(self) -> "CircleConst":
        return self.inverse()

    def is_one(self) -> bool:
        return self.q == 0

    def quarter_turns(self):
        """(k, r) with q = k/2 + r, 0 <= r < 1/2; i^k is the foldable part."""
        q = self.q
        k = (2 * q.numerator) // q.denominator
        r = q - Q(k, 2)
        return k % 4, r

    def as_grat(self):
        """The value as a GRat when q is a multiple of 1/2, else None."""
        k, r = self.quarter_turns()
        return _I_POWERS[k] if r == 0 else None

    def __str__(self) -> str:
        return f"u({_rat_str(self.q)})"


CIRCLE_ONE = CircleConst(Q(0))


# ---------------------------------------------------------------------------
# The full scalar


class Scalar:
    """unit * series, canonicalized: quarter turns of the unit are folded
    into the series, so unit.q always lies in [0, 1/2)."""

    __slots__ = ("unit", "series")

    def __init__(self, unit, series):
        self.unit = unit
        self.series = series

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Scalar)
            and self.unit == other.unit
            and self.series == other.series
        )

    def __hash__(self):
        return hash((self.unit, self.series))

    def __repr__(self):
        return f"Scalar({self.unit!r}, {self.series!r})"

    @staticmethod
    def of(unit: CircleConst, series: HbarSeries) -> "Scalar":
        k, r = unit.quarter_turns()
        if k:
            series = series.scale(_I_POWERS[k])
        return Scalar(CircleConst(r), series)

    @staticmethod
    def one(order: int) -> "Scalar":
        return Scalar(CIRCLE_ONE, HbarSeries.one(order))

    @staticmethod
    def zero(order: int) -> "Scalar":
        return Scalar(CIRCLE_ONE, HbarSeries.zero(order))

    @staticmethod
    def from_grat(order: int, c: GRat) -> "Scalar":
        return Scalar(CIRCLE_ONE, HbarSeries.const(order, c))

    @staticmethod
    def from_circle(order: int, u: CircleConst) -> "Scalar":
        return Scalar.of(u, HbarSeries.one(order))

    @property
    def order(self) -> int:
        return self.series.order

    def __mul__(self, other: "Scalar") -> "Scalar":
        return Scalar.of(self.unit * other.unit, self.series * other.series)

    def scale(self, c: GRat) -> "Scalar":
        return Scalar(self.unit, self.series.scale(c))

    def is_zero(self) -> bool:
        return self.series.is_zero()

    def is_one(self) -> bool:
        return self.unit.is_one() and self.series == HbarSeries.one(self.order)

    def inverse(self) -> "Scalar":
        return Scalar.of(self.unit.inverse(), self.series.inverse())

    def __str__(self) -> str:
        s = str(self.series)
        if " " in s:
            s = f"({s})"
        if self.unit.is_one():
            return s
        return f"{self.unit}*{s}"


@dataclass(frozen=True)
class UnitDecomposition:
    """u = unit * magnitude * exp(log).  `magnitude` is a positive rational
    whenever the h^0 coefficient is a circle constant times a positive
    rational; otherwise it is the raw h^0 coefficient and `unit` carries
    only the original unit part."""

    unit: CircleConst
    magnitude: GRat
    log: HbarSeries

    def recompose(self) -> Scalar:
        series = series_exp(self.log).scale(self.magnitude)
        return Scalar.of(self.unit, series)


def exp_decompose(u: Scalar) -> UnitDecomposition:
    """Split an invertible scalar into a_0 * exp(a_1 h + a_2 h^2 + ...)."""
    c0 = u.series.coeffs[0]
    if not c0.is_const() or c0.is_zero():
        raise NotInvertible("exp_decompose needs an invertible scalar")
    c = c0.constant_part()
    unit = u.unit
    if c.im == 0 and c.re > 0:
        magnitude = c
    elif c.im == 0 and c.re < 0:
        unit = unit * CircleConst(Q(1))
        magnitude = -c
    elif c.re == 0 and c.im > 0:
        unit = unit * CircleConst(Q(1, 2))
        magnitude = GRat(c.im, Q(0))
    elif c.re == 0 and c.im < 0:
        unit = unit * CircleConst(Q(3, 2))
        magnitude = GRat(-c.im, Q(0))
    else:
        magnitude = c
    normalized = u.series.scale(c.inverse())
    return UnitDecomposition(unit, magnitude, series_log(normalized))
