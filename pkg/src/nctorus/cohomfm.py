"""Cohomological Fourier-Mukai transform on exterior-algebra models.

Torus cohomology is modeled over the Gaussian rationals on the real
lattice generators: 4g exterior generators, the first 2g (e_1..e_2g)
spanning H^1 of the torus and the last 2g (f_1..f_2g) spanning H^1 of
the dual, with the dual lattice basis normalized to be integrally dual.
In that normalization the first Chern class of the Poincare bundle is
the canonical pairing class c1 = sum_k e_k wedge f_k.

The transform wedges with exp(c1) and integrates out one block: the
coefficient of the ordered volume form of that block (generators
ascending; the e-block precedes the f-block) is extracted.  Composing
the two directions gives pullback-by-(-1) (which is (-1)^deg on H^deg)
times a per-degree sign; the table of those signs is emitted rather
than asserted.

``fm_hh2`` transports a Poisson bivector: write it in real lattice
coordinates, contract twice into exp(c1), read the pure dual-side
2-form, then take the (0,2) Hodge component using the complex structure
of the dual space (with the -4 normalization making the round trip
exact).  The result must equal the B-field matrix of the torus.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .coeff import GRAT_ZERO, CoeffError, GRat, Q
from .torus import BForm, DualLatticeBasis, TorusData, bfield, dual_lattice, pairing

__all__ = [
    "ExtClass",
    "c1_poincare",
    "exp_c1",
    "fm_transform",
    "fm_square_table",
    "fm_hh2",
    "ORIENTATION_NOTE",
]

ORIENTATION_NOTE = (
    "generators e1..e2g, f1..f2g; monomials ascending; volume coefficient "
    "taken against the ordered block"
)


@dataclass(frozen=True)
class ExtClass:
    """Element of the exterior algebra on 4g ordered generators."""

    ngen: int
    terms: tuple  # ((sorted index tuple, GRat), ...) sorted, no zeros

    @staticmethod
    def of(ngen: int, mapping: dict) -> "ExtClass":
        items = tuple(sorted((m, c) for m, c in mapping.items() if c))
        return ExtClass(ngen, items)

    @staticmethod
    def zero(ngen: int) -> "ExtClass":
        return ExtClass(ngen, ())

    @staticmethod
    def unit(ngen: int) -> "ExtClass":
        return ExtClass.of(ngen, {(): GRat.of(1)})

    @staticmethod
    def generator(ngen: int, k: int) -> "ExtClass":
        return ExtClass.of(ngen, {(k,): GRat.of(1)})

    def __add__(self, other: "ExtClass") -> "ExtClass":
        acc = dict(self.terms)
        for m, c in other.terms:
            s = acc.get(m)
            acc[m] = c if s is None else s + c
        return ExtClass.of(self.ngen, acc)

    def scale(self, c: GRat) -> "ExtClass":
        if not c:
            return ExtClass.zero(self.ngen)
        return ExtClass(self.ngen, tuple((m, x * c) for m, x in self.terms))

    def __neg__(self) -> "ExtClass":
        return self.scale(GRat.of(-1))

    def wedge(self, other: "ExtClass") -> "ExtClass":
        acc: dict = {}
        for m1, c1 in self.terms:
            s1 = set(m1)
            for m2, c2 in other.terms:
                if s1 & set(m2):
                    continue
                mono, sign = _merge_sign(m1, m2)
                c = c1 * c2
                if sign < 0:
                    c = -c
                s = acc.get(mono)
                acc[mono] = c if s is None else s + c
        return ExtClass.of(self.ngen, acc)

    def contract(self, index: int) -> "ExtClass":
        """Interior product with the vector dual to generator ``index``."""
        acc: dict = {}
        for m, c in self.terms:
            if index in m:
                pos = m.index(index)
                mono = m[:pos] + m[pos + 1 :]
                if pos % 2:
                    c = -c
                s = acc.get(mono)
                acc[mono] = c if s is None else s + c
        return ExtClass.of(self.ngen, acc)

    def homogeneous(self, degree: int) -> "ExtClass":
        return ExtClass(
            self.ngen, tuple((m, c) for m, c in self.terms if len(m) == degree)
        )

    def is_zero(self) -> bool:
        return not self.terms


def _merge_sign(m1, m2):
    """Merge two disjoint sorted tuples; sign counts transpositions."""
    out = []
    i = j = 0
    sign = 1
    while i < len(m1) and j < len(m2):
        if m1[i] < m2[j]:
            out.append(m1[i])
            i += 1
        else:
            out.append(m2[j])
            if (len(m1) - i) % 2:
                sign = -sign
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    return tuple(out), sign


def c1_poincare(torus: TorusData) -> ExtClass:
    """c1 of the Poincare bundle: the duality pairing class sum e_k f_k."""
    n = 4 * torus.g
    two_g = 2 * torus.g
    return ExtClass.of(
        n, {(k, two_g + k): GRat.of(1) for k in range(two_g)}
    )


def exp_c1(torus: TorusData) -> ExtClass:
    c1 = c1_poincare(torus)
    acc = ExtClass.unit(4 * torus.g)
    term = ExtClass.unit(4 * torus.g)
    for k in range(1, 2 * torus.g + 1):
        term = term.wedge(c1).scale(GRat.of(Q(1, k)))
        if term.is_zero():
            break
        acc = acc + term
    return acc


def _integrate_block(element: ExtClass, block) -> ExtClass:
    """Coefficient of the full ordered block; keeps the complement."""
    bset = set(block)
    acc: dict = {}
    for m, c in element.terms:
        inside = tuple(k for k in m if k in bset)
        if len(inside) != len(block):
            continue
        outside = tuple(k for k in m if k not in bset)
        # reorder m into (block part)(outside part): count transpositions
        sign = 1
        seen_outside = 0
        for k in m:
            if k in bset:
                if seen_outside % 2:
                    sign = -sign
            else:
                seen_outside += 1
        # then outside part should follow the block; we moved block left
        mono = outside
        cc = c if sign > 0 else -c
        s = acc.get(mono)
        acc[mono] = cc if s is None else s + cc
    return ExtClass.of(element.ngen, acc)


def fm_transform(alpha: ExtClass, torus: TorusData, reverse: bool = False) -> ExtClass:
    """p_*(exp(c1) wedge alpha), integrating the e-block (or, reversed,
    the f-block); degree d goes to 2g - d on the other side."""
    two_g = 2 * torus.g
    block = tuple(range(two_g)) if not reverse else tuple(range(two_g, 4 * torus.g))
    return _integrate_block(exp_c1(torus).wedge(alpha), block)


def _square_gaussian_torus(g: int, order: int = 2) -> TorusData:
    lat = []
    for i in range(g):
        for im in (0, 1):
            lat.append(
                tuple(
                    GRat.of(0 if j != i else (0 if im else 1), 0 if j != i or not im else 1)
                    for j in range(g)
                )
            )
    zero = GRAT_ZERO
    poisson = tuple(tuple(zero for _ in range(g)) for _ in range(g))
    # interleaved (1, i) per coordinate
    return TorusData(g, tuple(lat), poisson, order)


def fm_square_table(g: int) -> dict:
    """Compose the two transforms on every basis class and compare with
    pullback by (-1) times a per-degree sign.

    Returns {"table": {degree: sign}, "status": "PASS"|"FAIL",
    "orientation": ...}; PASS means the composite equals
    sign_d * (-1)^d * identity on each degree-d basis class.
    """
    if g > 3:
        raise CoeffError("fm_square_table is intended for g <= 3")
    torus = _square_gaussian_torus(g)
    two_g = 2 * g
    n = 4 * g
    from itertools import combinations

    table = {}
    ok = True
    for d in range(two_g + 1):
        sign_d = None
        for mono in combinations(range(two_g), d):
            alpha = ExtClass.of(n, {mono: GRat.of(1)})
            out = fm_transform(fm_transform(alpha, torus), torus, reverse=True)
            expected_mono = mono
            entries = dict(out.terms)
            coeff = entries.pop(expected_mono, GRAT_ZERO)
            if entries:
                ok = False
                continue
            # composite = sign_d * (-1)^d * identity
            want_unit = GRat.of((-1) ** d)
            if coeff == want_unit:
                s = 1
            elif coeff == -want_unit:
                s = -1
            else:
                ok = False
                continue
            if sign_d is None:
                sign_d = s
            elif sign_d != s:
                ok = False
        table[d] = sign_d
    return {
        "table": table,
        "status": "PASS" if ok else "FAIL",
        "orientation": ORIENTATION_NOTE,
    }


def fm_hh2(poisson, torus: TorusData) -> tuple:
    """Transport a Poisson bivector through exp(c1) and take the (0,2)
    component on the dual side; returns the 2g x 2g GRat matrix on the
    dual lattice basis.  Equality with ``bfield`` is the executable
    content of the HH^2 matching.
    """
    basis = dual_lattice(torus)
    g = torus.g
    two_g = 2 * g
    n = 4 * g

    # real coordinates: t_k(v) = Im<xi^(k), v>; for the standard complex
    # basis u_i this is Im(xi^(k)_i)
    treal = [[basis.vectors[k][i].im for i in range(g)] for k in range(two_g)]
    # Pi in real lattice coordinates
    preal = [[Q(0)] * two_g for _ in range(two_g)]
    for i in range(g):
        for j in range(g):
            w = poisson[i][j]
            if not w:
                continue
            if w.im != 0:
                raise CoeffError("fm_hh2 expects a real-matrix bivector in this chart")
            for a in range(two_g):
                ta = treal[a][i]
                if not ta:
                    continue
                for b in range(two_g):
                    tb = treal[b][j]
                    if tb:
                        preal[a][b] += w.re * ta * tb

    # contract twice into exp(c1); keep the pure dual-side 2-form
    ec = exp_c1(torus)
    transported = ExtClass.zero(n)
    for a in range(two_g):
        for b in range(a + 1, two_g):
            w = preal[a][b]
            if not w:
                continue
            piece = ec.contract(b).contract(a).homogeneous(2)
            pure = ExtClass(
                n,
                tuple(
                    (m, c)
                    for m, c in piece.terms
                    if all(k >= two_g for k in m)
                ),
            )
            transported = transported + pure.scale(GRat.of(w))
    # read the dual-basis matrix E[k][m] of the transported real 2-form
    emat = [[GRAT_ZERO] * two_g for _ in range(two_g)]
    for m, c in transported.terms:
        k1, k2 = m[0] - two_g, m[1] - two_g
        emat[k1][k2] = c
        emat[k2][k1] = -c

    # (0,2) Hodge component: for each dual basis vector xi, the
    # anti-holomorphic projection has real coordinates
    # (rvec(xi) + i rvec(i xi)) / 2; B = -4 E(xi^{01}, eta^{01})
    def rvec(eta):
        return [pairing(eta, lam).im for lam in torus.lattice]

    proj = []
    for k in range(two_g):
        xi = basis.vectors[k]
        r1 = rvec(xi)
        r2 = rvec(tuple(GRat(-a.im, a.re) for a in xi))  # i * xi
        proj.append([GRat(Q(r1[j], 2), Q(r2[j], 2)) for j in range(two_g)])

    out = []
    for k in range(two_g):
        row = []
        for m in range(two_g):
            acc = GRAT_ZERO
            for a in range(two_g):
                pa = proj[k][a]
                if not pa:
                    continue
                for b in range(two_g):
                    if emat[a][b] and proj[m][b]:
                        acc = acc + pa * emat[a][b] * proj[m][b]
            row.append(acc.scale(Q(-4)))
        out.append(tuple(row))
    return tuple(out)
