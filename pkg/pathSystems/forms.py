"""
Additive forms on pairs of same-length paths.

Every built-in form is a Riemann cell sum over the shared grid, so
g(x1 y1, x2 y2) = g(x1, x2) + g(y1, y2) holds cell by cell.  Diagnostics
cover conditional positive definiteness, infinite divisibility of e^g and
the splitting of the additivity defect.
"""

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import linalg
from scipy.interpolate import RegularGridInterpolator

from . import settings
from .errors import FormError, ResidualError
from .pathspace import StepPath, concat_box

log = logging.getLogger(__name__)


class AdditiveForm:
    """Base class; subclasses implement cell_terms."""
    kind = "abstract"
    real_only = False

    def cell_terms(self, x, y, h):
        """Per-cell contributions for value arrays x, y of shape (len_k, d)."""
        raise NotImplementedError

    def params(self):
        return {}

    def describe(self):
        return {"kind": self.kind, "params": self.params()}

    def _check(self, x, y):
        if x.grid != y.grid:
            raise FormError("form arguments live on different grids")
        if x.len_k != y.len_k:
            raise FormError(f"form arguments differ in length: {x.length:g} vs {y.length:g}")
        if x.dim != y.dim:
            raise FormError(f"form arguments differ in dimension: {x.dim} vs {y.dim}")
        if self.real_only:
            if x.dim != 1 or y.dim != 1:
                raise FormError(f"{self.kind} form needs d=1 paths")
            if not (x.is_real and y.is_real):
                raise FormError(f"{self.kind} form needs real-valued cells")

    def evaluate(self, x, y):
        self._check(x, y)
        return complex(np.sum(self.cell_terms(x.values, y.values, x.grid.step)))

    __call__ = evaluate

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


class InnerForm(AdditiveForm):
    """
    g(x, y) = <x - c, y - c> in L^2 of the grid, c an optional centring
    profile (a constant d-vector or a half-line profile of cells).
    """
    kind = "inner"

    def __init__(self, centre=None):
        if centre is not None:
            centre = np.array(centre, dtype=complex)
            if centre.ndim not in (1, 2):
                raise FormError(f"centre must be a vector or a cell profile, got {centre.shape}")
            centre.setflags(write=False)
        self.centre = centre

    def params(self):
        if self.centre is None:
            return {}
        return {"centre": [[z.real, z.imag] for z in self.centre.ravel()],
                "centre_shape": list(self.centre.shape)}

    def centred(self, values):
        """Subtract the centre from an array of cells."""
        if self.centre is None:
            return values
        if self.centre.ndim == 1:
            return values - self.centre
        n = values.shape[0]
        if n > self.centre.shape[0]:
            raise FormError(f"path of {n} cells runs past the centring profile")
        return values - self.centre[:n]

    def coordinates(self, x):
        """Grid vector of [x] in the coordinatized picture."""
        return StepPath(x.grid, self.centred(x.values))

    def cell_terms(self, x, y, h):
        return h * np.sum(self.centred(x) * np.conj(self.centred(y)), axis=1)

    def __eq__(self, other):
        if not isinstance(other, InnerForm):
            return NotImplemented
        if self.centre is None or other.centre is None:
            return self.centre is None and other.centre is None
        return self.centre.shape == other.centre.shape and np.array_equal(self.centre, other.centre)

    def __hash__(self):
        return hash(("inner", None if self.centre is None else self.centre.tobytes()))


class GaussianForm(AdditiveForm):
    """g(x, y) = -c * integral (x - y)^2 on real d=1 paths."""
    kind = "gaussian"
    real_only = True

    def __init__(self, c=1.0):
        if not c > 0:
            raise FormError(f"Gaussian constant must be positive, got {c}")
        self.c = float(c)

    def params(self):
        return {"c": self.c}

    def cell_terms(self, x, y, h):
        d = (x - y).real[:, 0]
        return -self.c * h * d ** 2


class PoissonForm(AdditiveForm):
    """g(x, y) = c * integral (exp(i h0 (x - y)) - 1) on real d=1 paths."""
    kind = "poisson"
    real_only = True

    def __init__(self, c=1.0, h0=1.0):
        if not (c > 0 and h0 > 0):
            raise FormError(f"Poisson parameters must be positive, got c={c}, h0={h0}")
        self.c = float(c)
        self.h0 = float(h0)

    def params(self):
        return {"c": self.c, "h0": self.h0}

    def cell_terms(self, x, y, h):
        d = (x - y).real[:, 0]
        return self.c * h * (np.exp(1j * self.h0 * d) - 1.0)


class GammaKernelForm(AdditiveForm):
    """
    g(x, y) = integral gamma(x(s), y(s)) ds with gamma given by a table on a
    square node grid, bilinearly interpolated.
    """
    kind = "gamma"
    real_only = True

    def __init__(self, nodes, table):
        nodes = np.asarray(nodes, dtype=float)
        table = np.asarray(table, dtype=complex)
        if nodes.ndim != 1 or nodes.size < 2 or np.any(np.diff(nodes) <= 0):
            raise FormError("gamma nodes must be a strictly increasing 1-d array")
        if table.shape != (nodes.size, nodes.size):
            raise FormError(f"gamma table must be {nodes.size}x{nodes.size}, got {table.shape}")
        self.nodes = nodes
        self.table = table
        self._re = RegularGridInterpolator((nodes, nodes), table.real, method="linear")
        self._im = RegularGridInterpolator((nodes, nodes), table.imag, method="linear")

    @classmethod
    def from_function(cls, gamma, nodes):
        a, b = np.meshgrid(nodes, nodes, indexing="ij")
        return cls(nodes, gamma(a, b))

    def params(self):
        return {"nodes": self.nodes.tolist(),
                "table": [[[z.real, z.imag] for z in row] for row in self.table]}

    def cell_terms(self, x, y, h):
        pts = np.column_stack([x.real[:, 0], y.real[:, 0]])
        try:
            vals = self._re(pts) + 1j * self._im(pts)
        except ValueError as e:
            raise FormError(f"path values leave the gamma table range: {e}") from e
        return h * vals


class ZeroForm(AdditiveForm):
    """g = 0; every F_t(x) coincides."""
    kind = "zero"

    def cell_terms(self, x, y, h):
        return np.zeros(x.shape[0], dtype=complex)


class PerturbedForm(AdditiveForm):
    """
    base(x, y) + extra(x, y).  Not a cell sum in general; evaluate is
    overridden.
    """
    kind = "perturbed"

    def __init__(self, base, extra, label="extra"):
        self.base = base
        self.extra = extra
        self.label = label
        self.real_only = base.real_only

    def params(self):
        return {"base": self.base.describe(), "extra": self.label}

    def evaluate(self, x, y):
        return self.base.evaluate(x, y) + complex(self.extra(x, y))

    __call__ = evaluate


def eval_form(form, x, y):
    return form.evaluate(x, y)


def gram_matrix(form, samples, others=None):
    """
    G[i, j] = form(samples[i], others[j]), rows filled in parallel when
    PATHSPACE_THREADS > 1.
    """
    others = samples if others is None else others
    G = np.empty((len(samples), len(others)), dtype=complex)

    def fill(i):
        x = samples[i]
        for j, y in enumerate(others):
            G[i, j] = form.evaluate(x, y)

    n_threads = settings.thread_count()
    if n_threads > 1 and len(samples) > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            list(pool.map(fill, range(len(samples))))
    else:
        for i in range(len(samples)):
            fill(i)
    return G


def hermitian_defect(G):
    return float(np.max(np.abs(G - G.conj().T))) if G.size else 0.0


def check_hermitian(G, what="Gram matrix"):
    scale = max(1.0, float(np.max(np.abs(G)))) if G.size else 1.0
    defect = hermitian_defect(G)
    if defect > settings.HERMITIAN_TOL * scale:
        raise FormError(f"{what} is not Hermitian (defect {defect:.3e})")
    return defect


def min_eigenvalue(G):
    """Smallest eigenvalue of the Hermitian part of G."""
    H = 0.5 * (G + G.conj().T)
    return float(linalg.eigvalsh(H)[0])


def psd_tolerance(G):
    scale = max(1.0, float(np.max(np.abs(G)))) if G.size else 1.0
    return settings.EIG_TOL * scale


def sum_zero_basis(n):
    """Orthonormal basis of {lambda in C^n : sum lambda_i = 0}, shape (n, n-1)."""
    return linalg.null_space(np.ones((1, n)))


def projected_gram(form, samples):
    """Gram matrix compressed to the sum-zero subspace, shape (n-1, n-1)."""
    if len(samples) < 2:
        raise FormError("cpd_check needs at least two samples")
    G = gram_matrix(form, samples)
    check_hermitian(G)
    B = sum_zero_basis(len(samples))
    return B.T @ G @ B


def cpd_check(form, samples):
    """
    Minimum eigenvalue of the Gram matrix restricted to sum-zero vectors.

    Args:
        form: AdditiveForm
        samples: at least two paths of equal length

    Returns:
        float: nonnegative (within psd_tolerance) certifies CPD on the sample
    """
    value = min_eigenvalue(projected_gram(form, samples))
    log.debug("cpd_check %s on %d samples: %.3e", form.kind, len(samples), value)
    return value


def pd_root_check(form, samples, roots=(1, 2, 4, 8)):
    """
    Minimum eigenvalue of exp(G / n) over the given roots n.

    Raises:
        FormError: exp(G / n) would overflow
    """
    if not samples:
        raise FormError("pd_root_check needs at least one sample")
    G = gram_matrix(form, samples)
    check_hermitian(G)
    worst = np.inf
    for n in roots:
        if not n > 0:
            raise FormError(f"roots must be positive, got {n}")
        if float(np.max(G.real)) / n > settings.MAX_EXPONENT:
            raise FormError(f"exp(g/{n}) overflows; rescale the samples")
        value = min_eigenvalue(np.exp(G / n))
        log.debug("pd_root_check n=%g: min eig %.3e", n, value)
        worst = min(worst, value)
    return float(worst)


def _check_pairs(pairs):
    if not pairs:
        raise FormError("need at least one (x, y) pair")
    s = pairs[0][0].len_k
    t = pairs[0][1].len_k
    for x, y in pairs:
        if x.len_k != s or y.len_k != t:
            raise FormError("all first entries must share one length, all second entries another")


def split_residuals(form, pairs):
    """R[i, k] = g(x_i y_i, x_k y_k) - g(x_i, x_k) - g(y_i, y_k)."""
    _check_pairs(pairs)
    xs = [x for x, _ in pairs]
    ys = [y for _, y in pairs]
    xy = [concat_box(x, y) for x, y in pairs]
    return gram_matrix(form, xy) - gram_matrix(form, xs) - gram_matrix(form, ys)


def alternation_residual(R):
    worst = 0.0
    for i in range(R.shape[0]):
        M = R[i][None, :] - R
        worst = max(worst, float(np.max(np.abs(M[:, :, None] - M[:, None, :]))))
    return worst


def additivity_split_check(form, pairs):
    """
    Max of |r(a,b;p,q) - r(a,b;u,v) - r(c,d;p,q) + r(c,d;u,v)| over the
    sampled pairs; zero exactly when the defect splits on the sample.
    """
    return alternation_residual(split_residuals(form, pairs))


class DefectTable:
    """
    Sampled defect psi(x, y), gauge-fixed by Im psi(anchor) = 0.
    """

    def __init__(self, entries, anchor, split_residual=0.0):
        self.entries = dict(entries)
        self.anchor = anchor
        self.split_residual = split_residual

    def __call__(self, x, y):
        try:
            return self.entries[(x, y)]
        except KeyError:
            raise FormError(f"no defect entry for the pair ({x!r}, {y!r})") from None

    def __len__(self):
        return len(self.entries)

    def __contains__(self, pair):
        return pair in self.entries


def defect_extract(form, pairs, anchor=None, tol=settings.DEFAULT_TOL):
    """
    Recover psi with r(p; q) = psi(p) + conj psi(q) on the sample.

    Args:
        form: AdditiveForm
        pairs: list of (x, y), x in P(s), y in P(t)
        anchor: pair fixing the gauge, the first sample pair by default
        tol: allowed alternation residual, relative to max(1, |r|)

    Returns:
        DefectTable
    """
    R = split_residuals(form, pairs)
    scale = max(1.0, float(np.max(np.abs(R))))
    residual = alternation_residual(R)
    if residual > tol * scale:
        raise ResidualError(f"defect does not split on the sample (residual {residual:.3e})",
                            residual=residual, tolerance=tol * scale)
    anchor = pairs[0] if anchor is None else anchor
    x0, y0 = anchor
    a0 = concat_box(x0, y0)

    def r(x, y):
        return (form.evaluate(concat_box(x, y), a0)
                - form.evaluate(x, x0) - form.evaluate(y, y0))

    psi0 = r(x0, y0).real / 2
    entries = {(x, y): r(x, y) - psi0 for x, y in pairs}
    psi = np.array([entries[p] for p in pairs])
    split = float(np.max(np.abs(R - psi[:, None] - np.conj(psi)[None, :])))
    log.debug("defect extracted on %d pairs, split residual %.3e", len(pairs), split)
    return DefectTable(entries, anchor, split)
