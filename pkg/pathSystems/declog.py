"""
Decomposable vectors of the exponential model and their logarithms.

A decomposable vector of length t is coeff * exp(f) with f a StepPath of
length t; its inner products are coeff conj(coeff') e^{<f, f'>}.  Sections
are stored as one half-line profile plus one scalar per grid time, which
makes left coherence hold by construction.

Two independent routes to the e-logarithm are provided: continuous branch
tracking of the normalized inner product, and partition sums over
shrinking dyadic partitions.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import settings
from .cocycles import LogChart, trivialize_multiplier, multiplier_residual
from .errors import BranchError, GridError, ResidualError
from .forms import InnerForm, alternation_residual, min_eigenvalue, psd_tolerance
from .pathspace import Partition, PathSection, StepPath, concat_box, propagator_k

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecompVector:
    """coeff * exp(path)."""
    coeff: complex
    path: StepPath

    def __post_init__(self):
        object.__setattr__(self, "coeff", complex(self.coeff))
        if self.coeff == 0:
            raise GridError("a decomposable vector needs a nonzero coefficient")

    @property
    def len_k(self):
        return self.path.len_k

    def scaled(self, c):
        return DecompVector(self.coeff * c, self.path)


def dv_inner(u, v):
    if u.len_k != v.len_k:
        raise GridError(f"decomposables of different lengths: {u.len_k} vs {v.len_k} cells")
    return complex(u.coeff * np.conj(v.coeff) * np.exp(u.path.inner(v.path)))


def dv_norm(u):
    return float(np.sqrt(dv_inner(u, u).real))


def dv_multiply(a, b):
    return DecompVector(a.coeff * b.coeff, concat_box(a.path, b.path))


def left_divide(x, b):
    """
    The a with a * b = x.

    Raises:
        GridError: the tail of x is not the path of b
    """
    s = x.len_k - b.len_k
    if s < 1:
        raise GridError("divisor must be shorter than the vector it divides")
    tail = propagator_k(x.path, s, x.len_k)
    if not np.allclose(tail.values, b.path.values, rtol=0.0, atol=settings.EXACT_TOL):
        raise GridError("b is not a right divisor of x")
    return DecompVector(x.coeff / b.coeff, propagator_k(x.path, 0, s))


class CoherentSection:
    """
    k -> scalars[k-1] * exp(profile[:k]) for k = 1..n_max.

    Args:
        grid: TimeGrid
        profile: (n_max, d) cells
        scalars: n_max nonzero complex numbers, all ones by default
        eps: descriptor of the reference parameter, kept for serialization
    """

    def __init__(self, grid, profile, scalars=None, eps=None):
        self.grid = grid
        self.profile = PathSection(grid, profile).profile
        n = grid.n_max
        scalars = np.ones(n, dtype=complex) if scalars is None else np.array(scalars, dtype=complex)
        if scalars.shape != (n,):
            raise GridError(f"need {n} section scalars, got {scalars.shape}")
        if np.any(scalars == 0):
            raise GridError("section scalars must be nonzero")
        scalars.setflags(write=False)
        self.scalars = scalars
        self.eps = eps

    @property
    def dim(self):
        return self.profile.shape[1]

    @property
    def n_max(self):
        return self.grid.n_max

    def at(self, k):
        if not 1 <= k <= self.n_max:
            raise GridError(f"section index {k} outside 1..{self.n_max}")
        return DecompVector(self.scalars[k - 1], StepPath(self.grid, self.profile[:k]))

    def propagator(self, i, j):
        """x(r, s) with x_s = x_r * x(r, s)."""
        if not 0 <= i < j <= self.n_max:
            raise GridError(f"propagator needs 0 <= r < s <= {self.n_max}, got ({i}, {j})")
        c = self.scalars[j - 1] / (self.scalars[i - 1] if i else 1.0)
        return DecompVector(c, StepPath(self.grid, self.profile[i:j]))

    def with_scalars(self, scalars):
        return CoherentSection(self.grid, self.profile, scalars, self.eps)

    def refine(self):
        """Same profile on the refined grid; half steps reuse the next scalar."""
        return CoherentSection(self.grid.refine(), np.repeat(self.profile, 2, axis=0),
                               np.repeat(self.scalars, 2), self.eps)

    def __repr__(self):
        return f"CoherentSection(n_max={self.n_max}, d={self.dim})"


def _inner_curve(x, y, n=None):
    """<x_k, y_k> for k = 1..n."""
    n = x.n_max if n is None else n
    h = x.grid.step
    cells = h * np.sum(x.profile[:n] * np.conj(y.profile[:n]), axis=1)
    return x.scalars[:n] * np.conj(y.scalars[:n]) * np.exp(np.cumsum(cells))


def reference_section(grid, eps):
    """
    Unit section exp(eps) normalized by e^{-|eps|^2 t / 2}.

    Args:
        grid: TimeGrid
        eps: constant d-vector or an (n_max, d) profile
    """
    eps = np.asarray(eps, dtype=complex)
    profile = np.tile(eps, (grid.n_max, 1)) if eps.ndim <= 1 else eps
    if profile.ndim != 2:
        profile = profile.reshape(grid.n_max, -1)
    cells = grid.step * np.sum(np.abs(profile) ** 2, axis=1)
    return CoherentSection(grid, profile, np.exp(-0.5 * np.cumsum(cells)), eps)


def vacuum_section(grid, dim=1):
    return reference_section(grid, np.zeros(dim))


def random_section(grid, dim, rng, scale=1.0):
    """Random profile with random nonzero scalars."""
    profile = scale * (rng.normal(size=(grid.n_max, dim)) + 1j * rng.normal(size=(grid.n_max, dim)))
    drift = rng.normal(scale=0.1, size=grid.n_max) + 1j * rng.normal(scale=0.1, size=grid.n_max)
    return CoherentSection(grid, profile, np.exp(np.cumsum(drift)))


def section_of(x, grid=None):
    """The section through a single decomposable: prefixes, then zeros."""
    grid = x.path.grid if grid is None else grid
    if x.len_k > grid.n_max:
        raise GridError(f"vector of {x.len_k} cells exceeds the horizon {grid.n_max}")
    profile = np.zeros((grid.n_max, x.path.dim), dtype=complex)
    profile[:x.len_k] = x.path.values
    return CoherentSection(grid, profile, np.full(grid.n_max, x.coeff))


def _as_section(x):
    return x if isinstance(x, CoherentSection) else section_of(x)


def unit_normalize(x):
    """Rescale each x_t to norm 1, keeping the phase of its scalar."""
    norms = np.sqrt(np.abs(_inner_curve(x, x)))
    return x.with_scalars(x.scalars / norms)


def de_normalize(x, e):
    """Rescale so that <x_t, e_t> = 1 for every t."""
    return x.with_scalars(x.scalars / _inner_curve(x, e))


def _check_unit(e, what="reference section", tol=1e-10):
    gap = float(np.max(np.abs(np.abs(_inner_curve(e, e)) - 1.0)))
    if gap > tol:
        raise ResidualError(f"{what} is not unit-normalized (gap {gap:.3e})", residual=gap, tolerance=tol)


def _check_de(x, e, tol=1e-10):
    gap = float(np.max(np.abs(_inner_curve(x, e) - 1.0)))
    if gap > tol:
        raise ResidualError(f"section is not normalized against the reference (gap {gap:.3e})",
                            residual=gap, tolerance=tol)


def normalized_ratio(x, y, e):
    """<x, y> / (<x, e> <e, y>) for decomposables of one length."""
    return dv_inner(x, y) / (dv_inner(x, e) * dv_inner(e, y))


@dataclass(frozen=True)
class ModulusCurve:
    times: np.ndarray
    values: np.ndarray
    max_increase: float
    max_jump: float

    @property
    def first_gap(self):
        return float(abs(1.0 - self.values[0]))


def modulus_curve(x, y, tol=settings.EXACT_TOL):
    """
    t -> |<x_t, y_t>| for unit sections.

    Raises:
        ResidualError: a section is not unit-normalized
    """
    for name, s in (("x", x), ("y", y)):
        _check_unit(s, what=f"section {name}", tol=max(tol, 1e-12))
    values = np.abs(_inner_curve(x, y))
    if np.any(values <= 0) or np.any(values > 1 + 1e-12):
        raise ResidualError("modulus left (0, 1]", residual=float(np.max(values) - 1), tolerance=1e-12)
    steps = np.diff(values)
    return ModulusCurve(times=x.grid.step * np.arange(1, x.n_max + 1), values=values,
                        max_increase=float(max(0.0, np.max(steps, initial=0.0))),
                        max_jump=float(np.max(np.abs(steps), initial=0.0)))


def modulus_continuity(x, y):
    """(max neighbour jump, |1 - first sample|) of the modulus curve."""
    curve = modulus_curve(x, y)
    return curve.max_jump, curve.first_gap


def norm_monotone_check(x, e):
    """
    Returns:
        (float, float): largest decrease of |x_t| between neighbours and |1 - |x_h||
    """
    _check_de(x, e)
    norms = np.sqrt(np.abs(_inner_curve(x, x)))
    decrease = float(max(0.0, np.max(norms[:-1] - norms[1:], initial=0.0)))
    return decrease, float(abs(norms[0] - 1.0))


def ineq_76_check(x, y, e, s_k, t_k, T_k):
    """
    |<x_s,y_s> - <x_t,y_t>| <= |x_T| |y_T| sqrt((|x_t|^2 - |x_s|^2)(|y_t|^2 - |y_s|^2)).

    Returns:
        float: right side minus left side
    """
    if not 0 < s_k < t_k <= T_k <= x.n_max:
        raise GridError(f"need 0 < s < t <= T <= horizon, got ({s_k}, {t_k}, {T_k})")
    _check_de(x, e)
    _check_de(y, e)
    xy = _inner_curve(x, y, T_k)
    xx = _inner_curve(x, x, T_k).real
    yy = _inner_curve(y, y, T_k).real
    lhs = abs(xy[s_k - 1] - xy[t_k - 1])
    rhs = np.sqrt(xx[T_k - 1] * yy[T_k - 1]) * np.sqrt(
        max(0.0, (xx[t_k - 1] - xx[s_k - 1]) * (yy[t_k - 1] - yy[s_k - 1])))
    return float(rhs - lhs)


def _cell_terms(x, y, e, t_k):
    """Per-cell exponent of the normalized inner product."""
    fx = _path_cells(x, t_k)
    fy = _path_cells(y, t_k)
    fe = e.profile[:t_k]
    h = e.grid.step
    a = np.sum(fx * np.conj(fy), axis=1)
    b = np.sum(fx * np.conj(fe), axis=1)
    c = np.sum(fe * np.conj(fy), axis=1)
    d = np.sum(np.abs(fe) ** 2, axis=1)
    return h * (a - b - c + d)


def _path_cells(x, t_k):
    cells = x.profile if isinstance(x, CoherentSection) else x.path.values
    if cells.shape[0] < t_k:
        raise GridError(f"need {t_k} cells, vector has {cells.shape[0]}")
    return cells[:t_k]


def le_oracle(x, y, e, t_k):
    """Closed form of the e-logarithm in the model: <f - eps, g - eps> on (0, t]."""
    return complex(np.sum(_cell_terms(x, y, e, t_k)))


def B_partition(x, y, e, partition):
    """
    sum over cells I of the partition of (<x_I, y_I> - 1), each interval
    propagator normalized against the reference propagator e_I.
    """
    _check_unit(e)
    terms = _cell_terms(x, y, e, partition.length_k)
    sums = np.add.reduceat(terms, np.asarray(partition.cuts[:-1]))
    return complex(np.sum(np.expm1(sums)))


def B_limit(x, y, e, t_k, levels):
    """
    Partition sums over 2^n equal cells, n = 0..levels.

    Returns:
        (complex, list of dict): last value and one row per level with
        n_cells, mesh, value and distance to the closed form
    """
    grid = e.grid
    oracle = le_oracle(x, y, e, t_k)
    rows = []
    value = 0j
    for level in range(levels + 1):
        n = 2 ** level
        if t_k % n:
            raise GridError(f"grid exhausted: {t_k} cells cannot be cut into {n} equal parts")
        P = Partition.dyadic(grid, grid.time(t_k), level)
        value = B_partition(x, y, e, P)
        rows.append({"level": level, "n_cells": n, "mesh": P.mesh,
                     "value": value, "gap": abs(value - oracle)})
    log.debug("partition limit after %d levels: %s (oracle %s)", levels, value, oracle)
    return value, rows


def _branch_log(F):
    """Sum of principal logs of successive ratios, starting from F_0 = 1."""
    ratios = F / np.concatenate([[1.0], F[:-1]])
    guard = float(np.max(np.abs(ratios - 1.0)))
    if guard >= settings.BRANCH_GUARD:
        raise BranchError(f"successive ratio moved by {guard:.3f}; refine the grid")
    return complex(np.sum(np.log(ratios)))


def _ratio_curve(x, y, e, t_k):
    xy = _inner_curve(x, y, t_k)
    xe = _inner_curve(x, e, t_k)
    ye = _inner_curve(y, e, t_k)
    return xy / (xe * np.conj(ye))


def le_branch(x, y, e, t_k):
    """
    e-logarithm by continuous branch tracking of
    F(s) = <x_s, y_s> / (<x_s, e_s> <e_s, y_s>) along s in (0, t].

    Args:
        x, y: CoherentSection or DecompVector
        e: unit reference CoherentSection
        t_k: grid index of t
    """
    x, y = _as_section(x), _as_section(y)
    _check_unit(e)
    for level in range(settings.BRANCH_REFINE_LEVELS + 1):
        F = _ratio_curve(x, y, e, t_k)
        try:
            L = _branch_log(F)
        except BranchError:
            if level == settings.BRANCH_REFINE_LEVELS:
                raise
            log.warning("branch guard hit at level %d; refining the grid", level)
            x, y = x.refine(), y.refine()
            e = unit_normalize(e.refine())
            t_k *= 2
            continue
        target = F[-1]
        gap = abs(np.exp(L) - target)
        if gap > settings.EXACT_TOL * max(1.0, t_k / 100) * max(1.0, abs(target)):
            raise BranchError(f"branch sum does not exponentiate back ({gap:.3e})")
        return L
    raise BranchError("branch tracking failed")


def le_gram(samples, e):
    t_k = samples[0].len_k
    n = len(samples)
    sections = [section_of(x) for x in samples]
    L = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            L[i, j] = le_branch(sections[i], sections[j], e, t_k)
    return L


def l2_gram(samples, e):
    """Gram of f_i - eps in L^2 of (0, t]."""
    t_k = samples[0].len_k
    eps = e.profile[:t_k]
    h = e.grid.step
    D = np.stack([x.path.values - eps for x in samples])
    return h * np.einsum("ikd,jkd->ij", D, np.conj(D))


def le_pd_gram(samples, e):
    """Minimum eigenvalue of [L^e(t; x_i, x_j)]."""
    if len({x.len_k for x in samples}) != 1:
        raise GridError("all samples must have the same length")
    return min_eigenvalue(le_gram(samples, e))


def rebase_check(e, f, samples):
    """
    Split residual of L^f - L^e over the sample; zero when the change of
    reference is phi(x) + conj phi(y).
    """
    _check_unit(e)
    _check_unit(f, what="second reference section")
    D = le_gram(samples, f) - le_gram(samples, e)
    return alternation_residual(D)


def psi_s(y, e, s_k):
    """
    Defect psi_s(t; y) for a decomposable y of length t: the branch-tracked
    log of <y_tau, e_tau> / <y_tau, e(s, s + tau)> along tau in (0, t].
    """
    if s_k + y.len_k > e.n_max:
        raise GridError("s + t runs past the horizon")
    ys = section_of(y, e.grid)
    t_k = y.len_k
    tail = CoherentSection(e.grid, np.concatenate([e.profile[s_k:], np.zeros((s_k, e.dim))]),
                           np.concatenate([e.scalars[s_k:] / e.scalars[s_k - 1],
                                           np.ones(s_k, dtype=complex)]))
    F = _inner_curve(ys, e, t_k) / _inner_curve(ys, tail, t_k)
    return _branch_log(F)


def psi_s_check(e, s_k, t_k, y_samples, x_pairs):
    """
    Max residual of
    L(s+t; x1 y1, x2 y2) - L(s; x1, x2) - L(t; y1, y2) = psi_s(t; y1) + conj psi_s(t; y2).
    """
    if s_k + t_k > e.n_max:
        raise GridError("s + t runs past the horizon")
    if any(y.len_k != t_k for y in y_samples):
        raise GridError(f"y samples must all have {t_k} cells")
    psis = [psi_s(y, e, s_k) for y in y_samples]
    worst = 0.0
    for x1, x2 in x_pairs:
        Ls = le_branch(x1, x2, e, s_k)
        for y1, p1 in zip(y_samples, psis):
            for y2, p2 in zip(y_samples, psis):
                lhs = (le_branch(dv_multiply(x1, y1), dv_multiply(x2, y2), e, s_k + t_k)
                       - Ls - le_branch(y1, y2, e, t_k))
                worst = max(worst, abs(lhs - p1 - np.conj(p2)))
    return float(worst)


def prop98_check(u, v, e, s_k, t_k):
    """
    Minimum slack of
        |P(s)| <= sqrt((|u_s|^2 - 1)(|v_s|^2 - 1))
        |P(t) - P(s)| <= sqrt((|u_t|^2 - |u_s|^2)(|v_t|^2 - |v_s|^2))
    with P the e-logarithm along u, v in D^e.
    """
    if not 0 < s_k < t_k <= e.n_max:
        raise GridError(f"need 0 < s < t <= horizon, got ({s_k}, {t_k})")
    _check_de(u, e)
    _check_de(v, e)
    uu = _inner_curve(u, u, t_k).real
    vv = _inner_curve(v, v, t_k).real
    Ps = le_branch(u, v, e, s_k)
    Pt = le_branch(u, v, e, t_k)
    b1 = np.sqrt(max(0.0, (uu[s_k - 1] - 1) * (vv[s_k - 1] - 1)))
    b2 = np.sqrt(max(0.0, (uu[t_k - 1] - uu[s_k - 1]) * (vv[t_k - 1] - vv[s_k - 1])))
    return float(min(b1 - abs(Ps), b2 - abs(Pt - Ps)))


def refinement_gram_check(samples, e, P, Q):
    """
    Minimum eigenvalue of [B_P(x_i, x_j) - B_Q(x_i, x_j)] for Q refining P.
    """
    if not Q.refines(P):
        raise GridError("the second partition must refine the first")
    n = len(samples)
    D = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            D[i, j] = B_partition(samples[i], samples[j], e, P) - B_partition(samples[i], samples[j], e, Q)
    return min_eigenvalue(D)


def range_projection_check(x, s1_k, s2_k, T_k, tails_1, tails_2, witnesses):
    """
    Compressions of the range projections of left multiplication by x_s to
    the witness span: P_{s1} >= P_{s2} on the sampled subspaces.

    Args:
        x: unit CoherentSection
        tails_1: DecompVectors of length T - s1
        tails_2: DecompVectors of length T - s2
        witnesses: DecompVectors of length T

    Returns:
        (float, float): minimum eigenvalue of the compression difference and its tolerance
    """
    if not 0 < s1_k < s2_k < T_k:
        raise GridError(f"need 0 < s1 < s2 < T, got ({s1_k}, {s2_k}, {T_k})")
    step = x.propagator(s1_k, s2_k)
    span_2 = [dv_multiply(x.at(s2_k), z) for z in tails_2]
    # x_{s2} z = x_{s1} (x(s1, s2) z), so span_2 sits inside span_1
    span_1 = ([dv_multiply(x.at(s1_k), dv_multiply(step, z)) for z in tails_2]
              + [dv_multiply(x.at(s1_k), w) for w in tails_1])

    def compression(span):
        G = np.array([[dv_inner(a, b) for b in span] for a in span])
        C = np.array([[dv_inner(p, a) for a in span] for p in witnesses])
        G_pinv = linalg.pinvh(0.5 * (G + G.conj().T), rtol=settings.PINV_CUTOFF)
        # M[k, l] = <P p_k, p_l>
        return C @ G_pinv @ C.conj().T

    M = compression(span_1) - compression(span_2)
    M = 0.5 * (M + M.conj().T)
    return min_eigenvalue(M), psd_tolerance(M)


@dataclass(frozen=True)
class NetProductReport:
    products: np.ndarray
    gaps: np.ndarray
    bounds: np.ndarray

    @property
    def ok(self):
        return bool(np.all(self.gaps <= self.bounds))


def lemma911(net, zeta):
    """
    Products prod(1 + z_k) along a net of sequences, against e^zeta.

    The bound per element is 2 e^{|sum z|} (e^{|z|_2^2} - 1) + |e^{sum z} - e^zeta|,
    valid when every |z_k| <= 1/2.
    """
    target = np.exp(zeta)
    products, gaps, bounds = [], [], []
    for z in net:
        z = np.asarray(z, dtype=complex)
        p = complex(np.prod(1.0 + z))
        total = complex(np.sum(z))
        if np.max(np.abs(z), initial=0.0) <= 0.5:
            sq = float(np.sum(np.abs(z) ** 2))
            b = 2 * np.exp(abs(total)) * np.expm1(sq) + abs(np.exp(total) - target)
        else:
            b = np.inf
        products.append(p)
        gaps.append(abs(p - target))
        bounds.append(b)
    return NetProductReport(np.array(products), np.array(gaps), np.array(bounds))


@dataclass(frozen=True)
class GaugeReport:
    unimodularity: float
    constancy: float
    multiplier: float
    multiplicativity: float
    isometry: float
    covariance: float
    u: np.ndarray = field(repr=False)
    c0: np.ndarray = field(repr=False)

    @property
    def worst(self):
        return max(self.unimodularity, self.constancy, self.multiplier,
                   self.multiplicativity, self.isometry, self.covariance)


def multiplicative_gauge(e, samples, K=None, tol=settings.DEFAULT_TOL):
    """
    Multiplicative gauge of the exponential model against a unit reference.

    With f0(x) = <x, e_t> e^{rho(x)} and W(x) = f0(x) exp(log x), checks
    that c(x, y) = f0(x y) / (f0(x) f0(y)) is unimodular and depends only
    on the lengths, solves the multiplier equation for u, and reports the
    residuals of f = u f0 being multiplicative, W being isometric and
    W(x y) = c W(x) W(y).

    Args:
        e: unit reference CoherentSection
        samples: DecompVectors of lengths <= K
        K: largest length used, n_max // HORIZON_FACTOR by default
    """
    _check_unit(e)
    grid = e.grid
    K = grid.n_max // settings.HORIZON_FACTOR if K is None else K
    form = InnerForm(centre=e.profile)
    chart = LogChart.for_section(form, PathSection(grid, e.profile), K, tol)

    def f0(x):
        return dv_inner(x, e.at(x.len_k)) * np.exp(chart.rho(x.path))

    def c(x, y):
        return f0(dv_multiply(x, y)) / (f0(x) * f0(y))

    c0 = np.ones((K, K), dtype=complex)
    for s in range(1, K):
        for t in range(1, K - s + 1):
            c0[s - 1, t - 1] = c(e.at(s), e.at(t))
    used = np.add.outer(np.arange(1, K + 1), np.arange(1, K + 1)) <= K
    unimodularity = float(np.max(np.abs(np.abs(c0[used]) - 1.0)))

    pairs = [(x, y) for x in samples for y in samples if x.len_k + y.len_k <= K]
    constancy = max((abs(c(x, y) - c0[x.len_k - 1, y.len_k - 1]) for x, y in pairs), default=0.0)
    multiplier = multiplier_residual(c0)
    u = trivialize_multiplier(c0, tol)

    def f(x):
        return u[x.len_k - 1] * f0(x)

    def W(x):
        return f0(x), chart.log(x.path)

    multiplicativity = 0.0
    covariance = 0.0
    for x, y in pairs:
        xy = dv_multiply(x, y)
        ref = f(xy)
        multiplicativity = max(multiplicativity, abs(ref - f(x) * f(y)) / max(1.0, abs(ref)))
        cw, lw = W(xy)
        ax, lx = W(x)
        ay, ly = W(y)
        coeff_gap = abs(cw - c(x, y) * ax * ay) / max(1.0, abs(cw))
        path_gap = float(np.max(np.abs(lw.values - concat_box(lx, ly).values)))
        covariance = max(covariance, coeff_gap, path_gap)

    isometry = 0.0
    for x1 in samples:
        for x2 in samples:
            if x1.len_k != x2.len_k or x1.len_k > K:
                continue
            a1, l1 = W(x1)
            a2, l2 = W(x2)
            ref = dv_inner(x1, x2)
            val = a1 * np.conj(a2) * np.exp(l1.inner(l2))
            isometry = max(isometry, abs(val - ref) / max(1.0, abs(ref)))

    report = GaugeReport(unimodularity, float(constancy), multiplier, float(multiplicativity),
                         float(isometry), float(covariance), u, c0)
    log.info("multiplicative gauge: worst residual %.3e", report.worst)
    return report
