"""
Centered differences [x] - [y] and the Hilbert spaces they span.

Nothing infinite-dimensional is built: every statement is evaluated on a
finite family of differences through the four-term formula
<[x1]-[y1], [x2]-[y2]> = g(x1,x2) - g(x1,y2) - g(y1,x2) + g(y1,y2).
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import FormError, GridError
from .forms import InnerForm, min_eigenvalue, psd_tolerance
from .pathspace import concat_box, propagator_k

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CenteredVector:
    plus: object
    minus: object
    form: object

    def __post_init__(self):
        if self.plus.grid != self.minus.grid or self.plus.len_k != self.minus.len_k:
            raise GridError("both sides of a centered difference must share one fiber")

    @property
    def len_k(self):
        return self.plus.len_k

    def extend(self, filler):
        """[x e] - [y e]; represents the same vector one level up."""
        return CenteredVector(concat_box(self.plus, filler),
                              concat_box(self.minus, filler), self.form)


def _four_term(g, v1, v2):
    return (g(v1.plus, v2.plus) - g(v1.plus, v2.minus)
            - g(v1.minus, v2.plus) + g(v1.minus, v2.minus))


def diff_inner(v1, v2, filler=None):
    """
    Inner product of two centered differences.

    When lengths differ the shorter one is right-extended by filler, which
    must have exactly the missing length.
    """
    if v1.form is not v2.form and v1.form != v2.form:
        raise FormError("centered vectors built on different forms")
    if v1.len_k != v2.len_k:
        if filler is None:
            raise GridError("lengths differ and no filler was supplied")
        gap = abs(v1.len_k - v2.len_k)
        if filler.len_k != gap:
            raise GridError(f"filler must have {gap} cells, got {filler.len_k}")
        if v1.len_k < v2.len_k:
            v1 = v1.extend(filler)
        else:
            v2 = v2.extend(filler)
    return _four_term(v1.form.evaluate, v1, v2)


def centered_gram(vectors, filler=None):
    n = len(vectors)
    G = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            G[i, j] = diff_inner(vectors[i], vectors[j], filler)
    return G


def psd_check(G):
    """
    Returns:
        (float, bool): minimum eigenvalue and the scale-relative verdict
    """
    value = min_eigenvalue(G)
    return value, value >= -psd_tolerance(G)


def embed_check_45(form, x_pairs, y_pairs, z_pairs, filler):
    """
    Isometry of H_s into H_t on the sample.

    Args:
        form: AdditiveForm
        x_pairs, y_pairs: pairs of paths in P(s)
        z_pairs: pairs in P(t - s), zipped with y_pairs
        filler: e in P(t - s) appended to the x pairs

    Returns:
        float: max |<[x1 e]-[x2 e], [y1 z1]-[y2 z2]>_t - <[x1]-[x2], [y1]-[y2]>_s|
    """
    if len(y_pairs) != len(z_pairs):
        raise GridError("y_pairs and z_pairs must have the same number of entries")
    worst = 0.0
    for x1, x2 in x_pairs:
        vx = CenteredVector(x1, x2, form)
        vxe = vx.extend(filler)
        for (y1, y2), (z1, z2) in zip(y_pairs, z_pairs):
            vy = CenteredVector(y1, y2, form)
            vyz = CenteredVector(concat_box(y1, z1), concat_box(y2, z2), form)
            worst = max(worst, abs(diff_inner(vxe, vyz) - diff_inner(vx, vy)))
    return float(worst)


def shift_apply(u, v):
    """[u x] - [u y]; u=None is the identity."""
    if u is None:
        return v
    return CenteredVector(concat_box(u, v.plus), concat_box(u, v.minus), v.form)


def shift_isometry_residual(u, vectors):
    worst = 0.0
    for v1 in vectors:
        for v2 in vectors:
            lhs = diff_inner(shift_apply(u, v1), shift_apply(u, v2))
            worst = max(worst, abs(lhs - diff_inner(v1, v2)))
    return float(worst)


def shift_representative_residual(u, u_alt, vectors, witnesses):
    """Max change of <U v, p> when u is replaced by another path of its length."""
    if u.len_k != u_alt.len_k:
        raise GridError("representatives must have equal length")
    worst = 0.0
    for v in vectors:
        a = shift_apply(u, v)
        b = shift_apply(u_alt, v)
        for p in witnesses:
            worst = max(worst, abs(diff_inner(a, p) - diff_inner(b, p)))
    return float(worst)


def purity_check_413(form, t_k, x_pairs, y_pairs, filler, span_pairs=()):
    """
    Orthogonality of N_t and U_t H, and the decomposition of differences
    across the cut at t.

    Args:
        form: AdditiveForm
        t_k: cut index
        x_pairs: pairs in P(t)
        y_pairs: pairs in P(r)
        filler: f in P(t) used as the shift representative
        span_pairs: pairs in P(t + r') with r' > 0 to decompose

    Returns:
        (float, float): orthogonality residual and span residual
    """
    if filler.len_k != t_k:
        raise GridError(f"filler must have {t_k} cells")
    orth = 0.0
    for x1, x2 in x_pairs:
        if x1.len_k != t_k:
            raise GridError("x pairs must lie in P(t)")
        vx = CenteredVector(x1, x2, form)
        for y1, y2 in y_pairs:
            shifted = shift_apply(filler, CenteredVector(y1, y2, form))
            orth = max(orth, abs(diff_inner(vx, shifted, filler=y1)))
    span = 0.0
    for x1, x2 in span_pairs:
        r_k = x1.len_k
        if r_k <= t_k:
            raise GridError("span pairs must be longer than the cut")
        a = CenteredVector(propagator_k(x1, 0, t_k), propagator_k(x2, 0, t_k), form)
        tail = CenteredVector(propagator_k(x1, t_k, r_k), propagator_k(x2, t_k, r_k), form)
        b = shift_apply(a.minus, tail)
        whole = CenteredVector(x1, x2, form)
        rest = _combine([(1, whole), (-1, a.extend(tail.plus)), (-1, b)])
        span = max(span, _combination_norm(form, rest))
    log.debug("purity check: orthogonality %.3e, span %.3e", orth, span)
    return float(orth), float(span)


def _combine(terms):
    """Collect c * ([x] - [y]) terms into path class -> coefficient, dropping zeros."""
    coeffs = {}
    for c, v in terms:
        coeffs[v.plus] = coeffs.get(v.plus, 0) + c
        coeffs[v.minus] = coeffs.get(v.minus, 0) - c
    return {p: c for p, c in coeffs.items() if c != 0}


def _combination_norm(form, coeffs):
    # coefficients of a difference combination sum to zero
    if not coeffs:
        return 0.0
    paths = list(coeffs)
    lam = np.array([coeffs[p] for p in paths], dtype=complex)
    G = np.array([[form.evaluate(p, q) for q in paths] for p in paths])
    return float(max(0.0, (lam @ G @ lam.conj()).real) ** 0.5)


def coordinates(v):
    """[x] - [y] as a grid vector; only for the inner form."""
    if not isinstance(v.form, InnerForm):
        raise FormError("coordinates exist only for the inner form")
    return v.form.coordinates(v.plus) - v.form.coordinates(v.minus)
