"""
Product structure generated by a metric path space.

A ProductVector is a formal span of symbols F_t(x) with
<F_t(x), F_t(y)> = e^{g(x, y)}.  Multiplication follows
F_s(x) F_t(y) = e^{-psi(x, y)} F_{s+t}(x y).
"""

import logging

import numpy as np
from scipy import linalg

from . import settings
from .cocycles import build_log, rho_eval
from .errors import FormError, GridError
from .fock import ExpSpanVector, exp_multiply
from .forms import InnerForm
from .pathspace import concat_box

log = logging.getLogger(__name__)


class ProductVector:
    """sum_k coeff_k F_t(x_k) for paths x_k of one length; equal paths merge."""

    def __init__(self, form, terms):
        merged = {}
        for c, x in terms:
            merged[x] = merged.get(x, 0j) + complex(c)
        if not merged:
            raise GridError("a product vector needs at least one term")
        lengths = {x.len_k for x in merged}
        grids = {x.grid for x in merged}
        if len(lengths) != 1 or len(grids) != 1:
            raise GridError("all terms of a product vector must lie in one fiber")
        self.form = form
        self.terms = tuple((c, x) for x, c in merged.items())

    @classmethod
    def single(cls, form, x, coeff=1.0):
        return cls(form, [(coeff, x)])

    @property
    def len_k(self):
        return self.terms[0][1].len_k

    def __add__(self, other):
        _check_compatible(self, other)
        return ProductVector(self.form, self.terms + other.terms)

    def __mul__(self, scalar):
        return ProductVector(self.form, [(c * scalar, x) for c, x in self.terms])

    __rmul__ = __mul__

    def __repr__(self):
        return f"ProductVector(len_k={self.len_k}, {len(self.terms)} terms)"


def _check_compatible(u, v, same_length=True):
    if u.form is not v.form and u.form != v.form:
        raise FormError("product vectors built on different forms")
    if same_length and u.len_k != v.len_k:
        raise GridError(f"product vectors of different lengths: {u.len_k} vs {v.len_k} cells")


def pvec_inner(u, v):
    _check_compatible(u, v)
    g = u.form.evaluate
    total = 0j
    for c, x in u.terms:
        for d, y in v.terms:
            total += c * np.conj(d) * np.exp(g(x, y))
    return complex(total)


def multiply(u, v, psi=None):
    """
    Bilinear product with defect correction.

    Args:
        u: ProductVector at s
        v: ProductVector at t
        psi: callable (x, y) -> complex, e.g. a DefectTable; zero when None
    """
    _check_compatible(u, v, same_length=False)
    terms = []
    for c, x in u.terms:
        for d, y in v.terms:
            factor = 1.0 if psi is None else np.exp(-psi(x, y))
            terms.append((c * d * factor, concat_box(x, y)))
    return ProductVector(u.form, terms)


def multiplicativity_residual(pairs_1, pairs_2, psi=None):
    """Max |<u1 v1, u2 v2> - <u1, u2><v1, v2>| relative to the product size."""
    worst = 0.0
    for u1, v1 in pairs_1:
        for u2, v2 in pairs_2:
            lhs = pvec_inner(multiply(u1, v1, psi), multiply(u2, v2, psi))
            rhs = pvec_inner(u1, u2) * pvec_inner(v1, v2)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return float(worst)


def associativity_residual(psi, triples):
    """Max |psi(x,y) + psi(xy,z) - psi(x,yz) - psi(y,z)|."""
    worst = 0.0
    for x, y, z in triples:
        val = (psi(x, y) + psi(concat_box(x, y), z)
               - psi(x, concat_box(y, z)) - psi(y, z))
        worst = max(worst, abs(val))
    return float(worst)


def product_gram(vectors):
    n = len(vectors)
    G = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            G[i, j] = pvec_inner(vectors[i], vectors[j])
    return G


def gram_rank(G, cutoff=settings.PINV_CUTOFF):
    """Number of eigenvalues above cutoff times the largest one."""
    ev = linalg.eigvalsh(0.5 * (G + G.conj().T))
    top = float(np.max(np.abs(ev))) if ev.size else 0.0
    if top == 0.0:
        return 0
    return int(np.sum(ev > cutoff * top))


def standard_iso(form, section, phi, u, rho=None):
    """
    Map sum c_k F_t(x_k) to sum c_k e^{rho(x_k)} exp(log x_k).

    Args:
        form: InnerForm
        section: reference PathSection
        phi: trivializing CocycleFamily
        u: ProductVector
        rho: callable x -> complex, rho_eval by default
    """
    if not isinstance(form, InnerForm):
        raise FormError("the standard isomorphism needs a coordinatized (inner) form")
    if rho is None:
        def rho(x):
            return rho_eval(form, section, phi, x)
    return ExpSpanVector([(c * np.exp(rho(x)), build_log(form, section, phi, x))
                          for c, x in u.terms])


def iso_isometry_residual(chart, vectors):
    """Max |<W u, W v> - <u, v>| relative to max(1, |<u, v>|)."""
    images = [standard_iso(chart.form, chart.section, chart.phi, u) for u in vectors]
    worst = 0.0
    for u, wu in zip(vectors, images):
        for v, wv in zip(vectors, images):
            ref = pvec_inner(u, v)
            worst = max(worst, abs(wu.inner(wv) - ref) / max(1.0, abs(ref)))
    return float(worst)


def iso_multiplicativity_residual(chart, pairs, witnesses):
    """
    Max |<W(u v), p> - <W(u) W(v), p>| over witness exponential vectors,
    relative to max(1, |<W(u v), p>|).
    """
    def W(x):
        return standard_iso(chart.form, chart.section, chart.phi, x)

    worst = 0.0
    for u, v in pairs:
        lhs = W(multiply(u, v))
        rhs = exp_multiply(W(u), W(v))
        for p in witnesses:
            a = lhs.inner(p)
            worst = max(worst, abs(a - rhs.inner(p)) / max(1.0, abs(a)))
    return float(worst)
