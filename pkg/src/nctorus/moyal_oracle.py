"""Independent Taylor-truncation check of the Moyal product.

The closed form used by ``ExpSum.star`` never differentiates anything;
this module does the opposite.  It expands the exponentials as honest
polynomials in the slot variables up to a total degree bound, applies the
bidifferential operator

    P = sum over Poisson slots of  Pi^{ij} (d_i (x) d_j)

term by term as sum_k h^k P^k / k!, and truncates at h^order and the
degree bound.  Polynomial prefactors exist only here; the core algebra
never needs them.

Since derivatives only ever touch Poisson-slot variables, each input
splits as (Poisson-variable factor) x (commutative factor); the operator
machinery runs on the first tensor leg alone and the commutative product
is multiplied back in afterwards.  Input expansions go out to
degree + (order - 1) on the Poisson leg because every application of P
consumes one derivative per side.  Internally coefficients are raw
(re, im) rational pairs; they become Scalars only on the way out.

Results are reported as a two-level mapping

    {symbolic-pi constant -> {monomial -> Scalar}}

keyed first by the residual real pi-constant of the exponents (which no
derivative ever touches) so that a star-product output can be expanded
with ``taylor_expand`` and compared for exact equality.
"""

from __future__ import annotations

from .coeff import (
    CIRCLE_ONE,
    GRat,
    HbarSeries,
    PiPoly,
    Q,
    Scalar,
)
from .expalg import ExpSum, SlotSpec, scalar_add

__all__ = ["taylor_star_oracle", "taylor_expand"]

_ZERO = Q(0)
_ONE = Q(1)


def _exp_poly(lin, nvars: int, degree: int):
    """Taylor expansion of E(pi * sum lin[i] x_i) to total degree bound.

    ``lin`` holds (re, im) pairs; monomials (exponent tuples) map to
    (re, im) coefficients.  A monomial of total degree d carries an
    implicit pi^d tracked by the caller.
    """
    support = [(i, c) for i, c in enumerate(lin) if c[0] or c[1]]
    poly = {(0,) * nvars: (_ONE, _ZERO)}
    layer = poly
    for m in range(1, degree + 1):
        nxt = {}
        inv_m = Q(1, m)
        for mono, (a, b) in layer.items():
            for i, (c, d) in support:
                key = mono[:i] + (mono[i] + 1,) + mono[i + 1 :]
                re = (a * c - b * d) * inv_m
                im = (a * d + b * c) * inv_m
                old = nxt.get(key)
                nxt[key] = (re, im) if old is None else (old[0] + re, old[1] + im)
        if not nxt:
            break
        layer = nxt
        poly.update(nxt)
    return {k: v for k, v in poly.items() if v[0] or v[1]}


def _diff(poly, var: int):
    out = {}
    for mono, (a, b) in poly.items():
        e = mono[var]
        if e:
            out[mono[:var] + (e - 1,) + mono[var + 1 :]] = (a * e, b * e)
    return out


def _mul_trunc(p1, p2, degree: int):
    """Product of two monomial->(re,im) dicts, truncated by total degree."""
    buckets = {}
    for mono, c in p2.items():
        buckets.setdefault(sum(mono), []).append((mono, c))
    out = {}
    for m1, (a, b) in p1.items():
        d1 = sum(m1)
        if d1 > degree:
            continue
        for d2, items in buckets.items():
            if d1 + d2 > degree:
                continue
            for m2, (c, d) in items:
                key = tuple(x + y for x, y in zip(m1, m2))
                re = a * c - b * d
                im = a * d + b * c
                old = out.get(key)
                out[key] = (re, im) if old is None else (old[0] + re, old[1] + im)
    return {k: v for k, v in out.items() if v[0] or v[1]}


def _var_split(spec: SlotSpec):
    """Global indices of Poisson-slot variables vs commutative ones."""
    pvars, cvars = [], []
    offset = 0
    for s in spec.slots:
        idx = range(offset, offset + s.nvars)
        (pvars if s.poisson is not None else cvars).extend(idx)
        offset += s.nvars
    return pvars, cvars


def _pairing_entries(spec: SlotSpec, pvars):
    """(i, j, weight) triples of P in Poisson-leg-local indices."""
    local = {g: k for k, g in enumerate(pvars)}
    entries = []
    offset = 0
    for s in spec.slots:
        if s.poisson is not None:
            sign = -1 if s.opposite else 1
            for i in range(s.dim):
                for j in range(s.dim):
                    w = s.poisson[i][j]
                    if w:
                        entries.append(
                            (
                                local[offset + i],
                                local[offset + j],
                                (w.re * sign, w.im * sign),
                            )
                        )
        offset += s.nvars
    return entries


def _deriv_cached(cache, alpha, n):
    if alpha in cache:
        return cache[alpha]
    for i in range(n - 1, -1, -1):
        if alpha[i]:
            prev = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1 :]
            out = _diff(_deriv_cached(cache, prev, n), i)
            cache[alpha] = out
            return out
    raise AssertionError("zero multi-index is always cached")


def _accumulate(result, const_key, mono, scalar: Scalar):
    bucket = result.setdefault(const_key, {})
    old = bucket.get(mono)
    total = scalar if old is None else scalar_add(old, scalar)
    if total.is_zero():
        bucket.pop(mono, None)
    else:
        bucket[mono] = total


def _merge_mono(nvars, pvars, cvars, pm, cm):
    out = [0] * nvars
    for g, e in zip(pvars, pm):
        out[g] = e
    for g, e in zip(cvars, cm):
        out[g] = e
    return tuple(out)


def _flat_pairs(form):
    return [(a.re, a.im) for s in form.coeffs for a in s]


def taylor_star_oracle(f: ExpSum, g: ExpSum, degree: int):
    """Moyal product via explicit polynomial differentiation.

    Used only as an independent cross-check of ``ExpSum.star``; agreement
    is through h^(order-1) and total degree ``degree``.
    """
    spec = f.spec
    if g.spec != spec:
        raise ValueError("operands live over different slot specs")
    n = spec.nvars
    order = spec.order
    pvars, cvars = _var_split(spec)
    np_, nc = len(pvars), len(cvars)
    entries = _pairing_entries(spec, pvars)
    in_degree = degree + order - 1
    result = {}
    for t1 in f.terms:
        flat1 = _flat_pairs(t1.form)
        p1 = _exp_poly([flat1[i] for i in pvars], np_, in_degree)
        c1 = _exp_poly([flat1[i] for i in cvars], nc, degree)
        d1_cache = {(0,) * np_: p1}
        for t2 in g.terms:
            flat2 = _flat_pairs(t2.form)
            p2 = _exp_poly([flat2[i] for i in pvars], np_, in_degree)
            c2 = _exp_poly([flat2[i] for i in cvars], nc, degree)
            d2_cache = {(0,) * np_: p2}
            comm = _mul_trunc(c1, c2, degree)
            comm_buckets = {}
            for cm, cc in comm.items():
                comm_buckets.setdefault(sum(cm), []).append((cm, cc))
            base = t1.coeff * t2.coeff
            const_key = (t1.form.const_pi + t2.form.const_pi).re
            state = {((0,) * np_, (0,) * np_): (_ONE, _ZERO)}
            fact = _ONE
            local = {}  # mono -> {h level -> (re, im)}
            for k in range(order):
                if k:
                    fact *= k
                inv_fact = 1 / fact
                level = {}
                for (alpha, beta), w in state.items():
                    da = _deriv_cached(d1_cache, alpha, np_)
                    if not da:
                        continue
                    db = _deriv_cached(d2_cache, beta, np_)
                    if not db:
                        continue
                    wa, wb = w
                    for pm, (a, b) in _mul_trunc(da, db, degree).items():
                        re = a * wa - b * wb
                        im = a * wb + b * wa
                        old = level.get(pm)
                        level[pm] = (
                            (re, im) if old is None else (old[0] + re, old[1] + im)
                        )
                for pm, (a, b) in level.items():
                    if not (a or b):
                        continue
                    dp = sum(pm)
                    a *= inv_fact
                    b *= inv_fact
                    for dc, items in comm_buckets.items():
                        if dp + dc > degree:
                            continue
                        for cm, (c, d) in items:
                            mono = _merge_mono(n, pvars, cvars, pm, cm)
                            re = a * c - b * d
                            im = a * d + b * c
                            levels = local.get(mono)
                            if levels is None:
                                local[mono] = {k: (re, im)}
                            else:
                                old = levels.get(k)
                                levels[k] = (
                                    (re, im)
                                    if old is None
                                    else (old[0] + re, old[1] + im)
                                )
                if k + 1 >= order:
                    break
                nxt = {}
                for (alpha, beta), (wa, wb) in state.items():
                    for i, j, (pa, pb) in entries:
                        na = alpha[:i] + (alpha[i] + 1,) + alpha[i + 1 :]
                        nb = beta[:j] + (beta[j] + 1,) + beta[j + 1 :]
                        re = wa * pa - wb * pb
                        im = wa * pb + wb * pa
                        old = nxt.get((na, nb))
                        nxt[(na, nb)] = (
                            (re, im) if old is None else (old[0] + re, old[1] + im)
                        )
                state = {k2: v for k2, v in nxt.items() if v[0] or v[1]}
                if not state:
                    break
            for mono, levels in local.items():
                d = sum(mono)
                coeffs = {
                    k: PiPoly.pi_power(d + 2 * k, GRat(c[0], c[1]))
                    for k, c in levels.items()
                    if c[0] or c[1]
                }
                if not coeffs:
                    continue
                scal = base * Scalar(CIRCLE_ONE, HbarSeries.of(order, coeffs))
                _accumulate(result, const_key, mono, scal)
    return result


def taylor_expand(f: ExpSum, degree: int):
    """Expand an ExpSum into the oracle's polynomial form (no products)."""
    spec = f.spec
    n = spec.nvars
    order = spec.order
    result = {}
    for t in f.terms:
        poly = _exp_poly(_flat_pairs(t.form), n, degree)
        const_key = t.form.const_pi.re
        for mono, (a, b) in poly.items():
            d = sum(mono)
            scal = t.coeff * Scalar(
                CIRCLE_ONE,
                HbarSeries.of(order, {0: PiPoly.pi_power(d, GRat(a, b))}),
            )
            _accumulate(result, const_key, mono, scal)
    return result
