"""The exponential function algebra.

Elements are finite sums of terms ``scalar * E(pi*(linear form) + const)``
over named variable slots.  Exponents are complex-linear in the slot
variables, with every variable coefficient carrying exactly one implicit
factor of pi; constants split into a symbolic real pi-multiple (kept in
the exponent), a circle constant, and an h-divisible part (both folded
into the scalar coefficient).

The slot-wise Moyal product closes on this class:

    E(l1) * E(l2) = exp(h * {l1, l2}) * E(l1 + l2)

with {l1, l2} the constant Poisson pairing of the linear parts, computed
per slot.  Commutative slots contribute nothing; opposite-orientation
slots contribute with reversed argument order (equivalently, a sign).

Slots of "conjugate pair" kind expose 2*dim variables (the coordinate
values and their conjugates) so that both pairing orientations against a
conjugate-linear functional stay inside the linear-exponent class; a
translation of such a slot shifts the two halves by conjugate vectors.

``poisson_pairing`` is also exported on its own.  The first-order
commutator of the product is exp(h*p) - exp(-h*p) applied to E(l1+l2)
with p the pairing; the package deliberately does not identify the
commutator normalization with any induced-bracket convention.
"""

from __future__ import annotations

from dataclasses import dataclass

from .coeff import (
    CIRCLE_ONE,
    GRAT_ZERO,
    CircleConst,
    CoeffError,
    GRat,
    HbarSeries,
    NotInvertible,
    PiPoly,
    Q,
    Scalar,
    series_exp,
)

__all__ = [
    "Slot",
    "SlotSpec",
    "LinForm",
    "ExpTerm",
    "ExpSum",
    "AffineMap",
    "SlotMismatch",
    "poisson_pairing",
    "star_inverse",
    "substitute",
    "translate",
    "scalar_add",
]


class SlotMismatch(CoeffError):
    """Operands live over different slot specifications."""


@dataclass(frozen=True)
class Slot:
    """One named variable group.

    ``poisson`` is a dim x dim antisymmetric GRat matrix (rows as tuples)
    or None for a commutative slot.  ``conjugate_pair`` slots expose
    2*dim variables: the coordinates followed by their formal conjugates.
    """

    name: str
    dim: int
    poisson: tuple = None
    opposite: bool = False
    conjugate_pair: bool = False
    labels: tuple = None  # optional display names for the coordinates

    @property
    def nvars(self) -> int:
        return 2 * self.dim if self.conjugate_pair else self.dim

    def var_names(self):
        if self.labels:
            base = list(self.labels)
        elif self.dim == 1 and not self.conjugate_pair:
            base = [self.name]
        else:
            base = [f"{self.name}{i+1}" for i in range(self.dim)]
        if self.conjugate_pair:
            base = base + [f"{n}~" for n in base]
        return base

    def shift_vector(self, vec):
        """Translation vector (tuple of GRat, length nvars) for a complex
        dim-vector; conjugate-pair slots shift both halves conjugately."""
        if len(vec) != self.dim:
            raise SlotMismatch(f"slot {self.name}: expected {self.dim} entries")
        if self.conjugate_pair:
            return tuple(vec) + tuple(v.conj() for v in vec)
        return tuple(vec)


def _check_poisson(slot: Slot) -> None:
    p = slot.poisson
    if p is None:
        return
    if slot.conjugate_pair:
        raise CoeffError("conjugate-pair slots must be commutative")
    n = slot.dim
    if len(p) != n or any(len(row) != n for row in p):
        raise CoeffError(f"slot {slot.name}: poisson matrix must be {n}x{n}")
    for i in range(n):
        for j in range(n):
            if p[i][j] != -p[j][i]:
                raise CoeffError(f"slot {slot.name}: poisson matrix not antisymmetric")


@dataclass(frozen=True)
class SlotSpec:
    """Ordered slots plus the global truncation order."""

    slots: tuple
    order: int

    def __post_init__(self):
        for slot in self.slots:
            _check_poisson(slot)

    @property
    def nvars(self) -> int:
        return sum(s.nvars for s in self.slots)

    def slot_index(self, name: str) -> int:
        for i, s in enumerate(self.slots):
            if s.name == name:
                return i
        raise SlotMismatch(f"no slot named {name!r}")

    def var_names(self):
        out = []
        for s in self.slots:
            out.extend(s.var_names())
        return out

    def zero_form(self) -> "LinForm":
        return LinForm(
            tuple(tuple([GRAT_ZERO] * s.nvars) for s in self.slots),
            GRAT_ZERO,
            None,
        )


def poisson_pairing(spec: SlotSpec, f1: "LinForm", f2: "LinForm") -> GRat:
    """{l1, l2} per slot; the implicit pi on each side is NOT included
    (the Moyal correction is exp(h * pi^2 * pairing))."""
    total = GRAT_ZERO
    for s, c1, c2 in zip(spec.slots, f1.coeffs, f2.coeffs):
        p = s.poisson
        if p is None:
            continue
        acc = GRAT_ZERO
        for i in range(s.dim):
            a = c1[i]
            if not a:
                continue
            row = p[i]
            for j in range(s.dim):
                if row[j] and c2[j]:
                    acc = acc + a * row[j] * c2[j]
        if s.opposite:
            acc = -acc
        total = total + acc
    return total


@dataclass(frozen=True)
class LinForm:
    """pi * (linear form in the slot variables + const_pi) + const_hbar.

    ``coeffs`` is a tuple of per-slot coefficient tuples (GRat); these are
    the pi-cofactors.  ``const_pi`` is the GRat multiple of the symbolic
    pi in the constant part; after normalization its imaginary part has
    been folded away.  ``const_hbar`` is an h-divisible HbarSeries or
    None; normalization folds it into the scalar coefficient.
    """

    coeffs: tuple
    const_pi: GRat
    const_hbar: object = None

    def __add__(self, other: "LinForm") -> "LinForm":
        ch = self.const_hbar
        if other.const_hbar is not None:
            ch = other.const_hbar if ch is None else ch + other.const_hbar
        return LinForm(
            tuple(
                tuple(a + b for a, b in zip(s1, s2))
                for s1, s2 in zip(self.coeffs, other.coeffs)
            ),
            self.const_pi + other.const_pi,
            ch,
        )

    def __neg__(self) -> "LinForm":
        return LinForm(
            tuple(tuple(-a for a in s) for s in self.coeffs),
            -self.const_pi,
            None if self.const_hbar is None else -self.const_hbar,
        )

    def is_zero(self) -> bool:
        return (
            not self.const_pi
            and (self.const_hbar is None or self.const_hbar.is_zero())
            and all(not a for s in self.coeffs for a in s)
        )

    def sort_key(self):
        flat = [(a.re, a.im) for s in self.coeffs for a in s]
        flat.append((self.const_pi.re, self.const_pi.im))
        return tuple(flat)


@dataclass(frozen=True)
class ExpTerm:
    """scalar coefficient times E(form); always stored normalized."""

    coeff: Scalar
    form: LinForm


@dataclass(frozen=True)
class ExpSum:
    """Normalized sum of ExpTerms with pairwise distinct exponents."""

    spec: SlotSpec
    terms: tuple

    # -- constructors -------------------------------------------------

    @staticmethod
    def make(spec: SlotSpec, raw_terms) -> "ExpSum":
        """Build from (Scalar, LinForm) pairs, normalizing and merging."""
        acc = {}
        for coeff, form in raw_terms:
            coeff, form = _normalize(spec, coeff, form)
            key = form.sort_key()
            if key in acc:
                old_c, _ = acc[key]
                acc[key] = (scalar_add(old_c, coeff), form)
            else:
                acc[key] = (coeff, form)
        terms = tuple(
            ExpTerm(c, f)
            for _, (c, f) in sorted(acc.items())
            if not c.is_zero()
        )
        return ExpSum(spec, terms)

    @staticmethod
    def zero(spec: SlotSpec) -> "ExpSum":
        return ExpSum(spec, ())

    @staticmethod
    def one(spec: SlotSpec) -> "ExpSum":
        return ExpSum.make(spec, [(Scalar.one(spec.order), spec.zero_form())])

    @staticmethod
    def exponential(spec: SlotSpec, form: LinForm, coeff: Scalar = None) -> "ExpSum":
        if coeff is None:
            coeff = Scalar.one(spec.order)
        return ExpSum.make(spec, [(coeff, form)])

    @staticmethod
    def scalar(spec: SlotSpec, s: Scalar) -> "ExpSum":
        return ExpSum.make(spec, [(s, spec.zero_form())])

    # -- ring structure -----------------------------------------------

    def _check(self, other: "ExpSum") -> None:
        if self.spec != other.spec:
            raise SlotMismatch("operands live over different slot specs")

    def __add__(self, other: "ExpSum") -> "ExpSum":
        self._check(other)
        return ExpSum.make(
            self.spec,
            [(t.coeff, t.form) for t in self.terms]
            + [(t.coeff, t.form) for t in other.terms],
        )

    def __neg__(self) -> "ExpSum":
        return ExpSum(
            self.spec,
            tuple(ExpTerm(t.coeff.scale(GRat.of(-1)), t.form) for t in self.terms),
        )

    def __sub__(self, other: "ExpSum") -> "ExpSum":
        return self + (-other)

    def __mul__(self, other: "ExpSum") -> "ExpSum":
        """Commutative pointwise product: exponents add."""
        self._check(other)
        out = []
        for t1 in self.terms:
            for t2 in other.terms:
                out.append((t1.coeff * t2.coeff, t1.form + t2.form))
        return ExpSum.make(self.spec, out)

    def star(self, other: "ExpSum") -> "ExpSum":
        """Moyal product; reduces to ``*`` modulo h."""
        self._check(other)
        spec = self.spec
        out = []
        for t1 in self.terms:
            for t2 in other.terms:
                p = poisson_pairing(spec, t1.form, t2.form)
                coeff = t1.coeff * t2.coeff
                if p:
                    corr = series_exp(
                        HbarSeries.of(spec.order, {1: PiPoly.pi_power(2, p)})
                    )
                    coeff = coeff * Scalar(CIRCLE_ONE, corr)
                out.append((coeff, t1.form + t2.form))
        return ExpSum.make(spec, out)

    # -- helpers -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def single_term(self) -> ExpTerm:
        if len(self.terms) != 1:
            raise CoeffError("expected a single exponential term")
        return self.terms[0]

    def scale(self, s: Scalar) -> "ExpSum":
        return ExpSum.make(self.spec, [(t.coeff * s, t.form) for t in self.terms])

    def __str__(self) -> str:
        from .textfmt import expsum_str

        return expsum_str(self)


def scalar_add(a: Scalar, b: Scalar) -> Scalar:
    """Add two canonical scalars with the same truncation order.

    Both are unit*series; addition only stays in the class when the units
    agree (always true for merged like-exponent terms coming out of
    normalization) or one side folds to a plain series.
    """
    if a.unit == b.unit:
        return Scalar(a.unit, a.series + b.series)
    ga, gb = a.unit.as_grat(), b.unit.as_grat()
    if ga is not None and gb is not None:
        return Scalar(CIRCLE_ONE, a.series.scale(ga) + b.series.scale(gb))
    raise CoeffError(
        "sum of scalars with incompatible circle constants is not representable"
    )


def _normalize(spec: SlotSpec, coeff: Scalar, form: LinForm):
    """Fold h-divisible and imaginary-pi constants into the coefficient."""
    ch = form.const_hbar
    if ch is not None and not ch.is_zero():
        coeff = coeff * Scalar(CIRCLE_ONE, series_exp(ch))
    cp = form.const_pi
    if cp.im != 0:
        coeff = coeff * Scalar.from_circle(spec.order, CircleConst.of(cp.im))
        cp = GRat(cp.re, Q(0))
    if form.const_hbar is not None or cp.im != form.const_pi.im:
        form = LinForm(form.coeffs, cp, None)
    return coeff, form


def star_inverse(f: ExpSum) -> ExpSum:
    """Star inverse of a single invertible exponential term: negate the
    exponent, invert the coefficient.  Exact since {l, -l} = 0."""
    t = f.single_term()
    if t.coeff.is_zero():
        raise NotInvertible("zero coefficient")
    return ExpSum.make(f.spec, [(t.coeff.inverse(), -t.form)])


@dataclass(frozen=True)
class AffineMap:
    """x = matrix . y + shift, mapping functions of x (on ``target``) to
    functions of y (on ``source``) by composition."""

    source: SlotSpec
    target: SlotSpec
    matrix: tuple  # target.nvars rows, each of source.nvars GRat entries
    shift: tuple  # target.nvars GRat entries

    @staticmethod
    def identity(spec: SlotSpec) -> "AffineMap":
        n = spec.nvars
        eye = tuple(
            tuple(GRat.of(1) if i == j else GRAT_ZERO for j in range(n))
            for i in range(n)
        )
        return AffineMap(spec, spec, eye, tuple([GRAT_ZERO] * n))

    @staticmethod
    def translation(spec: SlotSpec, slot_name: str, vec) -> "AffineMap":
        """v -> v + vec on one slot (complex dim-vector, conjugate-aware)."""
        base = AffineMap.identity(spec)
        idx = spec.slot_index(slot_name)
        slot = spec.slots[idx]
        offset = sum(s.nvars for s in spec.slots[:idx])
        shift = list(base.shift)
        for k, v in enumerate(slot.shift_vector(vec)):
            shift[offset + k] = v
        return AffineMap(spec, spec, base.matrix, tuple(shift))


def substitute(f: ExpSum, m: AffineMap) -> ExpSum:
    """Pull back f along the affine map: E(l) -> normalize(E(l o m))."""
    if f.spec != m.target:
        raise SlotMismatch("map target does not match the operand's slots")
    src = m.source
    n_t, n_s = f.spec.nvars, src.nvars
    out = []
    for t in f.terms:
        flat = [a for s in t.form.coeffs for a in s]
        new_flat = [GRAT_ZERO] * n_s
        const = t.form.const_pi
        for i in range(n_t):
            ci = flat[i]
            if not ci:
                continue
            row = m.matrix[i]
            for j in range(n_s):
                if row[j]:
                    new_flat[j] = new_flat[j] + ci * row[j]
            if m.shift[i]:
                const = const + ci * m.shift[i]
        coeffs = []
        pos = 0
        for s in src.slots:
            coeffs.append(tuple(new_flat[pos : pos + s.nvars]))
            pos += s.nvars
        out.append((t.coeff, LinForm(tuple(coeffs), const, t.form.const_hbar)))
    return ExpSum.make(src, out)


def translate(f: ExpSum, slot_name: str, vec) -> ExpSum:
    """Substitute along v -> v + vec on the named slot.

    Equivalent to ``substitute`` along the translation map, but computed
    directly: only the exponent constants move.
    """
    spec = f.spec
    idx = spec.slot_index(slot_name)
    shift = spec.slots[idx].shift_vector(vec)
    if all(not s for s in shift):
        return f
    out = []
    for t in f.terms:
        add = GRAT_ZERO
        for a, s in zip(t.form.coeffs[idx], shift):
            if a and s:
                add = add + a * s
        form = t.form
        if add:
            form = LinForm(form.coeffs, form.const_pi + add, form.const_hbar)
        out.append((t.coeff, form))
    return ExpSum.make(spec, out)
