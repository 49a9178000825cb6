"""The Heisenberg extension of the dual lattice by units.

Group elements are pairs (xi, z) with xi an integer coordinate vector
over the dual lattice basis and z an invertible scalar; the law is

    (xi, z) . (xi', z') = (xi + xi', z z' c(xi, xi'))

with the 2-cocycle c(xi, xi') = exp(h pi^2 B(xi', xi)).  Restricted to
lattice arguments the multiplicative extension ctilde agrees with c in
the same argument order, i.e. ctilde(w, xi) = exp(h pi^2 B(xi, w)) with
B's bilinear contraction formula applied to the (exact, Gaussian-
rational) coefficient vector of w.

Functions on a fiber F_s = s + dual lattice are finite windows of scalar
values; (xi, z) acts with central weight -1 by

    (rho_(xi,z) f)_w = z^{-1} ctilde(w, xi) f_{w - xi}

and with weight +1 (the lifting convention used by the section
parameterization) by (xi, z): f_w -> z ctilde(w, xi) f_{w + xi}.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct

from .coeff import (
    CIRCLE_ONE,
    CoeffError,
    GRat,
    HbarSeries,
    PiPoly,
    Q,
    Scalar,
)
from .torus import BForm

__all__ = [
    "GammaElement",
    "FiberFunction",
    "heisenberg_cocycle",
    "gamma_mul",
    "gamma_inverse",
    "ctilde",
    "rho_act",
    "weight_plus_act",
    "coordinate_window",
]


@dataclass(frozen=True)
class GammaElement:
    """(xi, z): integer dual coordinates plus an invertible central part."""

    xi: tuple  # integers over the dual basis
    z: Scalar

    @staticmethod
    def identity(rank: int, order: int) -> "GammaElement":
        return GammaElement((0,) * rank, Scalar.one(order))


def _exp_scalar(order: int, value: GRat) -> Scalar:
    """exp(h pi^2 value) as a truncated scalar (closed-form expansion:
    the h^k coefficient is value^k pi^{2k} / k!)."""
    if not value:
        return Scalar.one(order)
    coeffs = {0: PiPoly.pi_power(0)}
    power = GRat(Q(1), Q(0))
    fact = 1
    for k in range(1, order):
        power = power * value
        fact *= k
        coeffs[k] = PiPoly.pi_power(2 * k, power.scale(Q(1, fact)))
    return Scalar(CIRCLE_ONE, HbarSeries.of(order, coeffs))


def heisenberg_cocycle(B: BForm, xi, xi2, order: int) -> Scalar:
    """c(xi, xi') = exp(h pi^2 B(xi', xi)) on integer dual coordinates."""
    return _exp_scalar(order, B.on_coords(xi2, xi))


def gamma_mul(a: GammaElement, b: GammaElement, B: BForm, order: int) -> GammaElement:
    if len(a.xi) != len(b.xi):
        raise CoeffError("dual coordinate ranks differ")
    xi = tuple(x + y for x, y in zip(a.xi, b.xi))
    return GammaElement(xi, a.z * b.z * heisenberg_cocycle(B, a.xi, b.xi, order))


def gamma_inverse(a: GammaElement, B: BForm, order: int) -> GammaElement:
    """(xi, z)^(-1) = (-xi, z^(-1) c(xi, -xi)^(-1))."""
    neg = tuple(-x for x in a.xi)
    c = heisenberg_cocycle(B, a.xi, neg, order)
    return GammaElement(neg, a.z.inverse() * c.inverse())


def ctilde(w, xi, B: BForm, order: int) -> Scalar:
    """Multiplicative extension of c to arbitrary exact base points:
    ctilde(w, xi) = exp(h pi^2 B(xi, w)), with w a GRat coefficient
    vector in the dual space and xi integer dual coordinates."""
    xivec = B.basis.combination(xi)
    return _exp_scalar(order, B.value(xivec, w))


@dataclass(frozen=True)
class FiberFunction:
    """Finitely supported function on F_s = s + dual lattice.

    Keys are integer offset tuples n; the actual point is
    w_n = s + sum_k n_k xi^(k).  Values are scalars.
    """

    base: tuple  # GRat coefficient vector of s
    values: tuple  # sorted ((offset tuple, Scalar), ...)

    @staticmethod
    def of(base, mapping: dict) -> "FiberFunction":
        return FiberFunction(tuple(base), tuple(sorted(mapping.items())))

    def as_dict(self) -> dict:
        return dict(self.values)

    def point(self, offset, basis) -> tuple:
        shift = basis.combination(offset)
        return tuple(a + b for a, b in zip(self.base, shift))


def coordinate_window(rank: int, radius: int):
    """All integer coordinate tuples with entries in [-radius, radius]."""
    return list(iproduct(range(-radius, radius + 1), repeat=rank))


def _act(a: GammaElement, f: FiberFunction, B: BForm, order: int, weight: int):
    vals = f.as_dict()
    out = {}
    zpart = a.z.inverse() if weight < 0 else a.z
    for offset in vals:
        src = tuple(o + weight * x for o, x in zip(offset, a.xi))
        if src not in vals:
            continue  # the window shrinks by the shift
        w = f.point(offset, B.basis)
        out[offset] = zpart * ctilde(w, a.xi, B, order) * vals[src]
    if vals and not out:
        raise CoeffError("fiber window too small for this shift")
    return FiberFunction.of(f.base, out)


def rho_act(a: GammaElement, f: FiberFunction, B: BForm, order: int) -> FiberFunction:
    """The weight (-1) action: (rho f)_w = z^{-1} ctilde(w, xi) f_{w-xi}."""
    return _act(a, f, B, order, weight=-1)


def weight_plus_act(a: GammaElement, f: FiberFunction, B: BForm, order: int) -> FiberFunction:
    """The weight (+1) action: f_w -> z ctilde(w, xi) f_{w+xi}."""
    return _act(a, f, B, order, weight=+1)
