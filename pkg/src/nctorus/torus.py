"""Complex torus data: period lattice, dual lattice, pairings, B-field.

A torus is V/Lambda with V = C^g and Lambda spanned by 2g vectors with
Gaussian-rational coordinates.  The dual lattice lives in the space of
conjugate-linear functionals xi, stored by the coefficient vectors of

    <xi, v> = sum_i xi_i * conj(v_i)

(linear in xi, conjugate-linear in v).  Duality is integrality of
Im<xi, lambda>; the dual basis is normalized so Im<xi^(k), lambda_j> is
the identity matrix.

The B-field transports a constant Poisson bivector Pi to the dual side:

    B(xi1, xi2) = Pi contracted with conj(xi1) wedge conj(xi2)
                = sum_ij Pi[i][j] conj(xi1_i) conj(xi2_j),

an alternating biadditive form, zero when g = 1 or Pi = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

from .coeff import GRAT_ZERO, CoeffError, GRat, Q
from .linalg import grat_rank, rat_det, rat_inverse

__all__ = [
    "TorusData",
    "DualLatticeBasis",
    "BForm",
    "TorusError",
    "validate_torus",
    "pairing",
    "dual_lattice",
    "bfield",
]


class TorusError(CoeffError):
    """Degenerate or ill-formed torus data."""


@dataclass(frozen=True)
class TorusData:
    """g, 2g lattice column vectors in C^g, Poisson matrix, truncation."""

    g: int
    lattice: tuple  # 2g vectors, each a tuple of g GRat
    poisson: tuple  # g x g antisymmetric GRat matrix
    order: int

    def __post_init__(self):
        g = self.g
        if g < 1:
            raise TorusError("dimension must be positive")
        if len(self.lattice) != 2 * g or any(len(v) != g for v in self.lattice):
            raise TorusError("lattice must consist of 2g vectors in C^g")
        if len(self.poisson) != g or any(len(r) != g for r in self.poisson):
            raise TorusError("poisson matrix must be g x g")
        for i in range(g):
            for j in range(g):
                if self.poisson[i][j] != -self.poisson[j][i]:
                    raise TorusError("poisson matrix must be antisymmetric")

    def pairing_rows(self):
        """Row j maps the flattened (Re xi, Im xi) to Im<xi, lambda_j>.

        Im(xi_i * conj(l_i)) = -Re(xi_i) Im(l_i) + Im(xi_i) Re(l_i).
        """
        rows = []
        for lam in self.lattice:
            rows.append([-e.im for e in lam] + [e.re for e in lam])
        return rows


@dataclass(frozen=True)
class DualLatticeBasis:
    """2g coefficient vectors xi^(k); Im<xi^(k), lambda_j> = delta_kj."""

    vectors: tuple  # 2g tuples of g GRat

    def combination(self, coords) -> tuple:
        """Integer/rational combination sum_k coords[k] * xi^(k)."""
        g = len(self.vectors[0])
        out = [GRAT_ZERO] * g
        for c, vec in zip(coords, self.vectors):
            if c:
                for i in range(g):
                    out[i] = out[i] + vec[i].scale(c)
        return tuple(out)


@dataclass(frozen=True)
class BForm:
    """The transported bivector as a bilinear form on dual coefficient
    vectors, with its matrix on the dual lattice basis precomputed."""

    poisson: tuple
    basis: DualLatticeBasis
    matrix: tuple  # 2g x 2g GRat values B(xi^(k), xi^(m))

    def value(self, xi1, xi2) -> GRat:
        """B on arbitrary coefficient vectors (the Q-bilinear extension)."""
        acc = GRAT_ZERO
        for i, row in enumerate(self.poisson):
            a = xi1[i]
            if not a:
                continue
            ac = a.conj()
            for j, w in enumerate(row):
                if w and xi2[j]:
                    acc = acc + ac * w * xi2[j].conj()
        return acc

    def on_coords(self, c1, c2) -> GRat:
        """B on integer coordinate vectors over the dual basis."""
        acc = GRAT_ZERO
        for k, a in enumerate(c1):
            if not a:
                continue
            row = self.matrix[k]
            for m, b in enumerate(c2):
                if b and row[m]:
                    acc = acc + row[m].scale(Q(a) * Q(b))
        return acc

    def is_zero(self) -> bool:
        return all(not e for row in self.matrix for e in row)


def validate_torus(data: TorusData) -> dict:
    """Rank-2g real independence check plus the rank of Pi."""
    det = rat_det(data.pairing_rows())
    if det == 0:
        raise TorusError("lattice vectors are linearly dependent over R")
    return {
        "g": data.g,
        "period_det": det,
        "poisson_rank": grat_rank([list(r) for r in data.poisson]),
    }


def pairing(xi, v) -> GRat:
    """<xi, v> = sum_i xi_i conj(v_i); linear in xi, conjugate-linear in v."""
    acc = GRAT_ZERO
    for a, b in zip(xi, v):
        acc = acc + a * b.conj()
    return acc


def im_pairing(xi, v):
    """Im<xi, v> as a rational."""
    return pairing(xi, v).im


def dual_lattice(data: TorusData) -> DualLatticeBasis:
    """Exact basis of {xi : Im<xi, lambda_j> in Z}, integrally dual.

    Solves the real 2g x 2g pairing system over Q and verifies the
    defining congruences afterwards.
    """
    rows = data.pairing_rows()
    if rat_det(rows) == 0:
        raise TorusError("degenerate lattice")
    inv = rat_inverse(rows)
    g = data.g
    vectors = []
    for k in range(2 * g):
        col = [inv[r][k] for r in range(2 * g)]
        vec = tuple(GRat(col[i], col[g + i]) for i in range(g))
        vectors.append(vec)
    basis = DualLatticeBasis(tuple(vectors))
    for k, xi in enumerate(basis.vectors):
        for j, lam in enumerate(data.lattice):
            expected = 1 if j == k else 0
            if im_pairing(xi, lam) != expected:
                raise TorusError("dual basis verification failed")
    return basis


def bfield(data: TorusData, basis: DualLatticeBasis = None) -> BForm:
    """Matrix of B on the dual basis (and its bilinear extension)."""
    if basis is None:
        basis = dual_lattice(data)
    n = len(basis.vectors)
    tmp = BForm(data.poisson, basis, ())
    matrix = tuple(
        tuple(tmp.value(basis.vectors[k], basis.vectors[m]) for m in range(n))
        for k in range(n)
    )
    return BForm(data.poisson, basis, matrix)
