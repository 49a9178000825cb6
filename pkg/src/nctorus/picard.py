"""Classical and quantum Appell-Humbert theory on the lattice.

Line bundles are handled through factors of automorphy: maps e from a
group of deck transformations to invertible elements of the function
algebra, subject to the left cocycle condition

    e(u1 u2) = e(u2) * (e(u1) . u2)

with the star product and the translation action of the group on
values.  ``cocycle_defect`` returns e(u1 u2)^{-1} * e(u2) * (e(u1).u2),
which equals 1 exactly when the condition holds at the pair.

The classical factor for Neron-Severi data (H, chi) is

    chi(lam) exp(pi H(v, lam) + (pi/2) H(lam, lam)),

and the first-order obstruction to quantizing it along a constant
Poisson structure is the group 2-cocycle (lam1, lam2) -> {h_lam2, h_lam1}
with h_lam = pi H(., lam).  When that vanishes, every series
l(h) = sum_j h^j l_j of conjugate-linear functionals yields the quantum
factor

    chi(lam) exp(pi H(v,lam) + (pi/2) H(lam,lam) + sum_j h^j pi <l_j, lam>)

which is an exact noncommutative cocycle.  ``reduce_to_qah`` inverts
this parameterization on exponential-class cocycles, recovering the data
and the (unique, normalized) coboundary witness.

Semicharacter validity follows the classical definition: the stored
generator values always extend along chi(lam+mu) = chi(lam) chi(mu)
exp(pi i Im H(lam, mu)), and validity is exactly integrality of
Im H on lattice pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

from math import comb

from .coeff import (
    CIRCLE_ONE,
    GRAT_ZERO,
    CircleConst,
    CoeffError,
    GRat,
    HbarSeries,
    PiPoly,
    Q,
    Scalar,
    exp_decompose,
)
from .expalg import (
    ExpSum,
    LinForm,
    Slot,
    SlotSpec,
    star_inverse,
    translate,
)
from .gerbe import coordinate_window
from .linalg import rat_solve
from .torus import TorusData, pairing

__all__ = [
    "NSData",
    "Semicharacter",
    "QAHData",
    "Factor",
    "LatticeGroup",
    "lattice_slotspec",
    "validate_ns",
    "validate_semicharacter",
    "semicharacter_value",
    "ah_factor",
    "qah_factor",
    "obstruction0",
    "is_quantizable",
    "cocycle_defect",
    "cocycle_holds",
    "coboundary_twist",
    "extension_obstruction",
    "reduce_to_qah",
    "classify_cohomology",
    "CohomologyVerdict",
]


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class NSData:
    """Hermitian g x g matrix; H(v, w) = sum H[i][j] v_i conj(w_j)."""

    matrix: tuple

    def value(self, v, w) -> GRat:
        acc = GRAT_ZERO
        for i, row in enumerate(self.matrix):
            if not v[i]:
                continue
            for j, h in enumerate(row):
                if h and w[j]:
                    acc = acc + v[i] * h * w[j].conj()
        return acc

    def row_form(self, lam) -> tuple:
        """Coefficient vector of v -> H(v, lam) (the pi-cofactor of h_lam)."""
        g = len(self.matrix)
        return tuple(
            sum(
                (self.matrix[i][j] * lam[j].conj() for j in range(g) if self.matrix[i][j] and lam[j]),
                GRAT_ZERO,
            )
            for i in range(g)
        )

    def is_hermitian(self) -> bool:
        g = len(self.matrix)
        return all(
            self.matrix[j][i] == self.matrix[i][j].conj()
            for i in range(g)
            for j in range(g)
        )


@dataclass(frozen=True)
class Semicharacter:
    """Values of chi on the 2g lattice generators, as circle constants."""

    values: tuple  # 2g CircleConst


@dataclass(frozen=True)
class QAHData:
    """((H, chi), l(h)): quantum Appell-Humbert data."""

    ns: NSData
    chi: Semicharacter
    l: tuple  # entries: dual coefficient vectors for h^1 .. h^{order-1}


def lattice_slotspec(torus: TorusData, slot_name: str = "v") -> SlotSpec:
    return SlotSpec((Slot(slot_name, torus.g, poisson=torus.poisson),), torus.order)


# ---------------------------------------------------------------------------
# groups and factors


@dataclass(frozen=True)
class LatticeGroup:
    """Z^{2g} in generator coordinates, acting by lattice translations."""

    torus: TorusData
    spec: SlotSpec
    slot_name: str = "v"

    @property
    def rank(self) -> int:
        return 2 * self.torus.g

    @property
    def identity(self):
        return (0,) * self.rank

    def compose(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inverse(self, a):
        return tuple(-x for x in a)

    def vector(self, a) -> tuple:
        g = self.torus.g
        out = [GRAT_ZERO] * g
        for c, lam in zip(a, self.torus.lattice):
            if c:
                for i in range(g):
                    out[i] = out[i] + lam[i].scale(Q(c))
        return tuple(out)

    def act(self, value: ExpSum, a) -> ExpSum:
        return translate(value, self.slot_name, self.vector(a))

    def window(self, radius: int = 1):
        return coordinate_window(self.rank, radius)


@dataclass(frozen=True)
class Factor:
    """A factor of automorphy: group model plus evaluation map."""

    group: object
    fn: object

    def value(self, element) -> ExpSum:
        return self.fn(element)

    def cached(self) -> "Factor":
        """Memoize evaluations (elements must be hashable)."""
        table = {}
        def fn(e):
            out = table.get(e)
            if out is None:
                out = self.fn(e)
                table[e] = out
            return out
        return Factor(self.group, fn)

    def translated(self, slot_name: str, w) -> "Factor":
        """Pull the factor back along translation by w on one slot."""
        return Factor(self.group, lambda e: translate(self.value(e), slot_name, w))

    def tabulated(self, elements) -> "Factor":
        table = {e: self.value(e) for e in elements}
        def fn(e):
            if e not in table:
                raise CoeffError("element outside the tabulated window")
            return table[e]
        return Factor(self.group, fn)


def lattice_pairs(grp: LatticeGroup, radius: int = 1, max_exhaustive: int = 20000, extra: int = 300):
    """Window-pair enumeration mirroring the Poincare strategy: exhaustive
    when affordable, else all pairs with at most two nonzero coordinates
    in total plus a fixed-seed sample of unrestricted pairs."""
    import random

    window = grp.window(radius)
    if len(window) ** 2 <= max_exhaustive:
        return [(a, b) for a in window for b in window]
    def nnz(t):
        return sum(1 for c in t if c)
    pairs = []
    for a in window:
        na = nnz(a)
        if na > 2:
            continue
        for b in window:
            if na + nnz(b) <= 2:
                pairs.append((a, b))
    rng = random.Random(171)
    for _ in range(extra):
        pairs.append((rng.choice(window), rng.choice(window)))
    return pairs


def cocycle_defect(factor: Factor, e1, e2) -> ExpSum:
    """e(e1 e2)^{-1} * e(e2) * (e(e1) . e2); equals 1 iff the left cocycle
    condition holds at this pair."""
    grp = factor.group
    lhs = factor.value(grp.compose(e1, e2))
    rhs = factor.value(e2).star(grp.act(factor.value(e1), e2))
    return star_inverse(lhs).star(rhs)


def cocycle_holds(factor: Factor, e1, e2) -> bool:
    """Equality form of the defect-is-one check (no inversions)."""
    grp = factor.group
    lhs = factor.value(grp.compose(e1, e2))
    rhs = factor.value(e2).star(grp.act(factor.value(e1), e2))
    return lhs == rhs


def coboundary_twist(factor: Factor, u: ExpSum) -> Factor:
    """e'(el) = u^{-1} * e(el) * (u . el): the twisted, cohomologous factor."""
    grp = factor.group
    uinv = star_inverse(u)
    return Factor(
        grp, lambda e: uinv.star(factor.value(e)).star(grp.act(u, e))
    )


# ---------------------------------------------------------------------------
# Neron-Severi data and semicharacters


def validate_ns(ns: NSData, torus: TorusData) -> bool:
    """Hermitian plus Im H(lambda_i, lambda_j) in Z on generator pairs."""
    if not ns.is_hermitian():
        raise CoeffError("matrix is not Hermitian")
    for li in torus.lattice:
        for lj in torus.lattice:
            v = ns.value(li, lj).im
            if v.denominator != 1:
                return False
    return True


def _im_table(ns: NSData, torus: TorusData):
    lat = torus.lattice
    return [[ns.value(a, b).im for b in lat] for a in lat]


def semicharacter_value(
    ns: NSData, chi: Semicharacter, torus: TorusData, coords
) -> CircleConst:
    """chi extended to generator coordinates in a fixed generator order:

    chi(sum n_k lam_k) = prod chi_k^{n_k} * exp(pi i sum_{k<l} n_k n_l E_kl)

    with E = Im H on generators.  This is the unique extension satisfying
    the semicharacter identity once Im H is integral.
    """
    imt = _im_table(ns, torus)
    q = Q(0)
    for k, n in enumerate(coords):
        if n:
            q += chi.values[k].q * n
            for m in range(k + 1, len(coords)):
                if coords[m]:
                    q += Q(n * coords[m]) * imt[k][m]
    return CircleConst.of(q)


def validate_semicharacter(ns: NSData, chi: Semicharacter, torus: TorusData, radius: int = 1) -> bool:
    """True iff the extended chi satisfies
    chi(a+b) = chi(a) chi(b) exp(pi i Im H(lam_a, lam_b)) on window pairs."""
    if not validate_ns(ns, torus):
        return False
    grp_window = coordinate_window(2 * torus.g, radius)
    grp = LatticeGroup(torus, lattice_slotspec(torus))
    for a in grp_window:
        for b in grp_window:
            lhs = semicharacter_value(ns, chi, torus, grp.compose(a, b))
            e = ns.value(grp.vector(a), grp.vector(b)).im
            rhs = (
                semicharacter_value(ns, chi, torus, a)
                * semicharacter_value(ns, chi, torus, b)
                * CircleConst.of(e)
            )
            if lhs != rhs:
                return False
    return True


# ---------------------------------------------------------------------------
# the factors


def _ah_term(ns: NSData, unit: CircleConst, torus: TorusData, lam, spec: SlotSpec, lseries=None):
    """chi-part * E(pi H(v,lam) + (pi/2) H(lam,lam) [+ sum h^j pi <l_j,lam>])."""
    row = ns.row_form(lam)
    hll = ns.value(lam, lam)
    if hll.im != 0:
        raise CoeffError("H(lam, lam) must be real for Hermitian H")
    const = GRat(hll.re / 2, Q(0))
    const_hbar = None
    if lseries:
        coeffs = {}
        for j, lj in enumerate(lseries, start=1):
            if lj is None:
                continue
            val = pairing(lj, lam)
            if val:
                coeffs[j] = PiPoly.pi_power(1, val)
        if coeffs:
            const_hbar = HbarSeries.of(spec.order, coeffs)
    form = LinForm((row,), const, const_hbar)
    return ExpSum.exponential(spec, form, Scalar.from_circle(spec.order, unit))


def ah_factor(ns: NSData, chi: Semicharacter, torus: TorusData, spec: SlotSpec = None) -> Factor:
    """The classical Appell-Humbert factor of automorphy."""
    if spec is None:
        spec = lattice_slotspec(torus)
    grp = LatticeGroup(torus, spec)

    def fn(coords):
        unit = semicharacter_value(ns, chi, torus, coords)
        return _ah_term(ns, unit, torus, grp.vector(coords), spec)

    return Factor(grp, fn)


def qah_factor(data: QAHData, torus: TorusData, spec: SlotSpec = None) -> Factor:
    """The quantum Appell-Humbert cocycle; requires vanishing obstruction."""
    if not is_quantizable(data.ns, torus):
        raise CoeffError("obstructed Neron-Severi class cannot be quantized")
    if spec is None:
        spec = lattice_slotspec(torus)
    grp = LatticeGroup(torus, spec)

    def fn(coords):
        unit = semicharacter_value(data.ns, data.chi, torus, coords)
        return _ah_term(data.ns, unit, torus, grp.vector(coords), spec, data.l)

    return Factor(grp, fn)


# ---------------------------------------------------------------------------
# obstruction theory


def _bracket(torus: TorusData, f1, f2) -> GRat:
    """sum_ij Pi[i][j] f1_i f2_j on plain coefficient vectors."""
    acc = GRAT_ZERO
    for i, row in enumerate(torus.poisson):
        if not f1[i]:
            continue
        for j, w in enumerate(row):
            if w and f2[j]:
                acc = acc + f1[i] * w * f2[j]
    return acc


def obstruction0(ns: NSData, torus: TorusData):
    """Matrix of {h_lam_j, h_lam_i} on generator pairs (i row, j column):
    entry (i, j) is the obstruction value at the pair (lam_i, lam_j),
    a pi^2 multiple as a PiPoly."""
    rows = [ns.row_form(lam) for lam in torus.lattice]
    n = len(rows)
    out = []
    for i in range(n):
        line = []
        for j in range(n):
            val = _bracket(torus, rows[j], rows[i])
            line.append(PiPoly.pi_power(2, val))
        out.append(tuple(line))
    return tuple(out)


def is_quantizable(ns: NSData, torus: TorusData) -> bool:
    """ob_0 vanishes identically on generator pairs."""
    return all(p.is_zero() for row in obstruction0(ns, torus) for p in row)


def extension_obstruction(factor: Factor, n: int, radius: int = 1):
    """Order-(n+1) defect table of a factor satisfying the cocycle
    condition modulo h^{n+1}.

    Returns {(a, b): PiPoly} on window pairs; verifies the group-cocycle
    closedness delta(ob) = 0 on window triples.  Raises if the factor has
    a defect at some order <= n.
    """
    grp = factor.group
    win = grp.window(radius)
    if len(win) ** 2 > 4000:
        win = [w for w in win if sum(1 for c in w if c) <= 2]
    table = {}
    for a in win:
        for b in win:
            d = cocycle_defect(factor, a, b)
            t = d.single_term()
            if any(c for s in t.form.coeffs for c in s) or t.form.const_pi:
                raise CoeffError("defect is not scalar: not a cocycle mod h")
            if not t.coeff.unit.is_one():
                raise CoeffError("defect has a unit part: not a cocycle mod h")
            series = t.coeff.series
            if series.coeffs[0] != PiPoly.pi_power(0):
                raise CoeffError("defect does not reduce to 1 mod h")
            for k in range(1, min(n + 1, series.order)):
                if series.coeffs[k]:
                    raise CoeffError(
                        f"defect already present at order h^{k} <= h^{n}"
                    )
            table[(a, b)] = (
                series.coeffs[n + 1] if n + 1 < series.order else PiPoly.pi_power(0, GRAT_ZERO)
            )
    # closedness on triples whose partial sums stay inside the window
    win_set = set(win)
    for a in win:
        for b in win:
            ab = grp.compose(a, b)
            if ab not in win_set:
                continue
            for c in win:
                bc = grp.compose(b, c)
                if bc not in win_set:
                    continue
                delta = (
                    table[(b, c)]
                    - table[(ab, c)]
                    + table[(a, bc)]
                    - table[(a, b)]
                )
                if not delta.is_zero():
                    raise CoeffError("obstruction table is not a 2-cocycle")
    return table


# ---------------------------------------------------------------------------
# canonicalization


def _solve_complex_rows(columns, rhs_rows, g):
    """Solve sum_k X_k columns[j][k] = rhs[j] for a complex g-vector X,
    splitting into real parts.  columns: per-j list of g GRat known
    coefficients; rhs_rows: per-j GRat.  Returns tuple of GRat or None."""
    m = []
    rhs = []
    for j, row in enumerate(columns):
        re_row = [c.re for c in row] + [-c.im for c in row]
        im_row = [c.im for c in row] + [c.re for c in row]
        m.append(re_row)
        m.append(im_row)
        rhs.append([rhs_rows[j].re])
        rhs.append([rhs_rows[j].im])
    sol = rat_solve(m, rhs)
    if sol is None:
        return None
    return tuple(GRat(sol[k][0], sol[g + k][0]) for k in range(g))


def reduce_to_qah(factor: Factor, torus: TorusData, radius: int = 1):
    """Canonicalize an exponential-class lattice cocycle.

    Returns (QAHData, witness) with

        factor(el) = witness^{-1} * qah(el) * (witness . el)

    exactly on the window; the witness is the normalized single
    exponential E(pi b.v).  Raises when the input is not cohomologous to
    quantum Appell-Humbert data within the exponential class.
    """
    grp = factor.group
    g = torus.g
    spec = grp.spec
    gens = []
    n = 2 * g
    for k in range(n):
        gens.append(tuple(1 if i == k else 0 for i in range(n)))
    terms = [factor.value(e).single_term() for e in gens]

    # H from the v-linear parts: a_j = H(. , lam_j)
    lat = torus.lattice
    hmat = []
    for i in range(g):
        cols = [[lam[k].conj() for k in range(g)] for lam in lat]
        rhs = [terms[j].form.coeffs[0][i] for j in range(n)]
        row = _solve_complex_rows(cols, rhs, g)
        if row is None:
            raise CoeffError("v-linear parts are not Neron-Severi consistent")
        hmat.append(tuple(row))
    ns = NSData(tuple(hmat))
    if not ns.is_hermitian():
        raise CoeffError("recovered form is not Hermitian")
    if not validate_ns(ns, torus):
        raise CoeffError("recovered form has non-integral Im H on the lattice")
    if not is_quantizable(ns, torus):
        raise CoeffError("recovered form is obstructed")

    # witness from the residual symbolic constants: Re(b . lam_j) = r_j
    rows = []
    rhs = []
    for j, e in enumerate(gens):
        lam = grp.vector(e)
        hll = ns.value(lam, lam)
        r = terms[j].form.const_pi - GRat(hll.re / 2, Q(0))
        if r.im != 0:
            raise CoeffError("exponent constants are not normalized")
        rows.append([lam[i].re for i in range(g)] + [-lam[i].im for i in range(g)])
        rhs.append([r.re])
    sol = rat_solve(rows, rhs)
    if sol is None:
        raise CoeffError("residual constants are not a coboundary")
    b = tuple(GRat(sol[i][0], sol[g + i][0]) for i in range(g))

    # untwist the scalars: chi and the l-series
    chi_vals = []
    log_rows = {}
    for j, e in enumerate(gens):
        lam = grp.vector(e)
        hrow = ns.row_form(lam)
        corr = GRAT_ZERO
        for i in range(g):
            if b[i]:
                corr = corr + b[i] * lam[i]
        unit_fix = CircleConst.of(-corr.im)
        br = _bracket(torus, hrow, b)
        s = terms[j].coeff * Scalar.from_circle(spec.order, unit_fix)
        if br:
            from .coeff import series_exp

            fix = HbarSeries.of(
                spec.order, {1: PiPoly.pi_power(2, br.scale(Q(-2)))}
            )
            s = s * Scalar(CIRCLE_ONE, series_exp(fix))
        dec = exp_decompose(s)
        if dec.magnitude != GRat.of(1):
            raise CoeffError("scalar part is not a circle constant times exp")
        chi_vals.append(dec.unit)
        logs = dec.log
        for k in range(1, spec.order):
            poly = logs.coeffs[k]
            if poly.is_zero():
                val = GRAT_ZERO
            else:
                if [d for d, _ in poly.terms] != [1]:
                    raise CoeffError("log series is not pi-linear")
                val = poly.terms[0][1]
            log_rows.setdefault(k, []).append(val)

    lout = []
    for k in range(1, spec.order):
        vals = log_rows.get(k, [GRAT_ZERO] * n)
        if all(not v for v in vals):
            lout.append(tuple([GRAT_ZERO] * g))
            continue
        cols = [[lam[i].conj() for i in range(g)] for lam in lat]
        lk = _solve_complex_rows(cols, vals, g)
        if lk is None:
            raise CoeffError("h-series constants are not conjugate-linear in the lattice")
        lout.append(lk)

    data = QAHData(ns, Semicharacter(tuple(chi_vals)), tuple(lout))
    witness = ExpSum.exponential(
        spec, LinForm((tuple(b),), GRAT_ZERO, None)
    )
    canonical = qah_factor(data, torus, spec)
    twisted = coboundary_twist(canonical, witness)
    for a in grp.window(radius):
        if factor.value(a) != twisted.value(a):
            raise CoeffError("roundtrip verification failed: not cohomologous")
    return data, witness


# ---------------------------------------------------------------------------
# cohomology classifier


@dataclass(frozen=True)
class CohomologyVerdict:
    kind: str  # AllVanish | FreeTrivial | NontrivialDeformation
    dims: tuple = None  # FreeTrivial: dim H^k for k = 0..g
    h0_zero: bool = None
    h1_nonzero: bool = None


def classify_cohomology(data: QAHData, torus: TorusData) -> CohomologyVerdict:
    """Degree-zero classifier (H = 0 required):

    chi nontrivial       -> all cohomology vanishes;
    chi = 1, l = 0       -> free module, dims C(g, k);
    chi = 1, some l != 0 -> H^0 = 0 and nonzero H^1 flag.
    """
    if any(e for row in data.ns.matrix for e in row):
        raise CoeffError("classifier requires degree-zero data (H = 0)")
    chi_trivial = all(u.is_one() for u in data.chi.values)
    l_zero = all(all(not c for c in lk) for lk in data.l)
    if not chi_trivial:
        return CohomologyVerdict("AllVanish")
    if l_zero:
        g = torus.g
        return CohomologyVerdict(
            "FreeTrivial", dims=tuple(comb(g, k) for k in range(g + 1))
        )
    return CohomologyVerdict("NontrivialDeformation", h0_zero=True, h1_nonzero=True)
