"""
Additive cocycles on the grid and their trivialization.

Families are stored per grid time k = 1..K as cell arrays.  Two conventions
are in use:

    forward:  phi_{s+t}(x) = phi_s(x) + phi_t(x + s)
    shift:    phi_{s+t} = phi_s + U_s phi_t + Gamma(s, t)

U_s shifts a cell array right by s cells.
"""

import logging
from dataclasses import dataclass

import numpy as np

from . import settings
from .errors import FormError, GridError, ResidualError
from .forms import InnerForm
from .pathspace import PathSection, StepPath, concat_box

log = logging.getLogger(__name__)

FORWARD = "forward"
SHIFT = "shift"


def _cells(a):
    a = np.asarray(a, dtype=complex)
    return a[..., None] if a.ndim == 1 else a


def shift_cells(a, s):
    """U_s on an array whose cell axis is the second to last."""
    out = np.zeros_like(a)
    if s < a.shape[-2]:
        out[..., s:, :] = a[..., :a.shape[-2] - s, :]
    return out


class CocycleFamily:
    """
    k -> phi_k for k = 1..K, each a (n_cells, d) array.

    Args:
        grid: TimeGrid
        values: array of shape (K, n_cells, d)
        convention: FORWARD or SHIFT
    """

    def __init__(self, grid, values, convention=FORWARD):
        values = np.asarray(values, dtype=complex)
        if values.ndim == 2:
            values = values[..., None]
        if values.ndim != 3:
            raise GridError(f"family values must have shape (K, n_cells, d), got {values.shape}")
        if convention not in (FORWARD, SHIFT):
            raise GridError(f"unknown cocycle convention {convention!r}")
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.convention = convention

    @property
    def K(self):
        return self.values.shape[0]

    @property
    def n_cells(self):
        return self.values.shape[1]

    @property
    def dim(self):
        return self.values.shape[2]

    def at(self, k):
        if not 1 <= k <= self.K:
            raise GridError(f"family index {k} outside 1..{self.K}")
        return self.values[k - 1]

    def support_residual(self):
        """Max |phi_k| on cells beyond k."""
        cells = np.arange(self.n_cells)
        ks = np.arange(1, self.K + 1)
        outside = cells[None, :] >= ks[:, None]
        return float(np.max(np.abs(self.values) * outside[:, :, None], initial=0.0))


def cocycle_from_primitive(grid, f, K):
    """phi_k(x) = f(x + k) - f(x) on the window where x + K stays inside f."""
    f = _cells(f)
    n = f.shape[0]
    if K >= n:
        raise GridError(f"need more than {K} cells of f, got {n}")
    n_w = n - K
    values = np.stack([f[k:k + n_w] - f[:n_w] for k in range(1, K + 1)])
    return CocycleFamily(grid, values, FORWARD)


def cocycle1_residual(fam, gamma=None):
    """
    Max residual of the cocycle equation under the family's convention; the
    shift convention subtracts Gamma(s, t) when a table is given.
    """
    K, n = fam.K, fam.n_cells
    worst = 0.0
    for s in range(1, K):
        for t in range(1, K - s + 1):
            if fam.convention == FORWARD:
                m = n - s
                r = fam.at(s + t)[:m] - fam.at(s)[:m] - fam.at(t)[s:s + m]
            else:
                r = fam.at(s + t) - fam.at(s) - shift_cells(fam.at(t), s)
                if gamma is not None:
                    r = r - gamma.at(s, t)[:n]
            if r.size:
                worst = max(worst, float(np.max(np.abs(r))))
    return worst


def solve_cocycle1(fam, tol=settings.DEFAULT_TOL, anchor=None):
    """
    Primitive f with phi_t(x) = f(x + t) - f(x).

    Args:
        fam: forward-convention CocycleFamily
        tol: absolute tolerance, scaled by max(1, |phi|)
        anchor: value of f on the first cell, 0 by default

    Returns:
        ndarray: f on n_cells + 1 cells
    """
    if fam.convention != FORWARD:
        raise GridError("solve_cocycle1 expects a forward-convention family")
    scale = max(1.0, float(np.max(np.abs(fam.values), initial=0.0)))
    residual = cocycle1_residual(fam)
    if residual > tol * scale:
        raise ResidualError(f"family is not a cocycle (residual {residual:.3e})",
                            residual=residual, tolerance=tol * scale)
    start = np.zeros(fam.dim, dtype=complex) if anchor is None else np.broadcast_to(
        np.asarray(anchor, dtype=complex), (fam.dim,))
    f = np.empty((fam.n_cells + 1, fam.dim), dtype=complex)
    f[0] = start
    f[1:] = start + np.cumsum(fam.at(1), axis=0)

    n = fam.n_cells
    check = 0.0
    for t in range(1, fam.K + 1):
        m = min(n, n + 1 - t)
        if m > 0:
            check = max(check, float(np.max(np.abs(fam.at(t)[:m] - (f[t:t + m] - f[:m])))))
    if check > 10 * tol * scale:
        raise ResidualError(f"recovered primitive fails validation ({check:.3e})",
                            residual=check, tolerance=10 * tol * scale)
    log.debug("cocycle solved on %d cells, validation residual %.3e", n, check)
    return f


class GammaTable:
    """
    Gamma(s, t) for 1 <= s <= K and 1 <= t <= n_cells - s, each an
    (n_cells, d) array.  rows[s - 1][t - 1] holds Gamma(s, t).
    """

    def __init__(self, grid, rows):
        self.grid = grid
        self.rows = [np.asarray(r, dtype=complex) for r in rows]
        n = grid.n_max
        for s, r in enumerate(self.rows, start=1):
            if r.ndim != 3 or r.shape[:2] != (n - s, n):
                raise GridError(f"Gamma row {s} must have shape ({n - s}, {n}, d), got {r.shape}")
            r.setflags(write=False)

    @property
    def K(self):
        return len(self.rows)

    @property
    def n_cells(self):
        return self.grid.n_max

    @property
    def dim(self):
        return self.rows[0].shape[2]

    def at(self, s, t):
        if not (1 <= s <= self.K and 1 <= t <= self.n_cells - s):
            raise GridError(f"Gamma({s}, {t}) is outside the table")
        return self.rows[s - 1][t - 1]

    def scale(self):
        return max(1.0, max(float(np.max(np.abs(r), initial=0.0)) for r in self.rows))

    def support_residual(self):
        """Max |Gamma(s, t)| on cells beyond s + t."""
        n = self.n_cells
        worst = 0.0
        cells = np.arange(n)
        for s, r in enumerate(self.rows, start=1):
            ts = np.arange(1, n - s + 1)
            outside = cells[None, :] >= (s + ts)[:, None]
            worst = max(worst, float(np.max(np.abs(r) * outside[:, :, None], initial=0.0)))
        return worst

    def perturbed(self, rng, scale):
        return GammaTable(self.grid, [r + scale * rng.standard_normal(r.shape) for r in self.rows])


def gamma_of_section(section, K=None):
    """
    Gamma(s, t) = (e_s e_t) - e_{s+t} as grid vectors.

    Args:
        section: PathSection, or a mapping len_k -> StepPath checked for coherence
        K: largest first argument, n_max // HORIZON_FACTOR by default
    """
    if not isinstance(section, PathSection):
        first = next(iter(section.values()))
        section = PathSection.from_family(first.grid, section)
    grid = section.grid
    n = grid.n_max
    K = n // settings.HORIZON_FACTOR if K is None else K
    if not 1 <= K < n:
        raise GridError(f"K={K} must lie in 1..{n - 1}")
    p = section.profile
    rows = []
    for s in range(1, K + 1):
        ts = np.arange(1, n - s + 1)
        row = np.zeros((n - s, n, section.dim), dtype=complex)
        for t in ts:
            row[t - 1, s:s + t] = p[:t] - p[s:s + t]
        rows.append(row)
    log.debug("Gamma table built: K=%d, n=%d", K, n)
    return GammaTable(grid, rows)


def cocycle2_residual(G):
    """Max of |Gamma(r+s,t) - Gamma(r,s+t) - U_r Gamma(s,t) + Gamma(r,s)|."""
    n, K = G.n_cells, G.K
    worst = 0.0
    for r in range(1, K):
        for s in range(1, K - r + 1):
            T = n - r - s
            if T < 1:
                continue
            a = G.rows[r + s - 1][:T]
            b = G.rows[r - 1][s:s + T]
            c = shift_cells(G.rows[s - 1][:T], r)
            d = G.rows[r - 1][s - 1]
            worst = max(worst, float(np.max(np.abs(a - b - c + d[None]))))
    return worst


def stabilization_residual(G):
    """Max disagreement of Gamma(s, t) with Gamma(s, n - s) on cells below t - 1."""
    n = G.n_cells
    worst = 0.0
    cells = np.arange(n)
    for s, r in enumerate(G.rows, start=1):
        ref = r[-1]
        inside = cells[None, :] < np.arange(r.shape[0])[:, None]
        worst = max(worst, float(np.max(np.abs(r - ref[None]) * inside[:, :, None], initial=0.0)))
    return worst


@dataclass(frozen=True)
class GammaPipeline:
    u: CocycleFamily
    v: CocycleFamily
    w: np.ndarray
    phi: CocycleFamily
    residual: float


def gamma_pipeline(G, tol=settings.DEFAULT_TOL):
    """
    Trivialize Gamma step by step:

        u_s = -Gamma(s, n - s)              (stabilized)
        v_t(l) = u_t(l + t)                 (a forward cocycle)
        w = primitive of v, w(first) = v_1(first) / 2
        phi_t = (u_t - w) on (0, t]
    """
    n, K, grid = G.n_cells, G.K, G.grid
    if n < settings.HORIZON_FACTOR * K:
        raise GridError(
            f"grid horizon of {n} cells is too short for K={K}; need {settings.HORIZON_FACTOR * K}")
    scale = G.scale()
    res2 = cocycle2_residual(G)
    if res2 > tol * scale:
        raise ResidualError(f"Gamma is not a 2-cocycle (residual {res2:.3e})",
                            residual=res2, tolerance=tol * scale)
    stab = stabilization_residual(G)
    if stab > tol * scale:
        raise ResidualError(f"Gamma does not stabilize on this grid (residual {stab:.3e})",
                            residual=stab, tolerance=tol * scale)

    u = np.stack([-G.at(s, n - s) for s in range(1, K + 1)])
    n_v = n - 2 * K - 1
    v = np.stack([u[t - 1, t:t + n_v] for t in range(1, K + 1)])
    v_fam = CocycleFamily(grid, v, FORWARD)
    w = solve_cocycle1(v_fam, tol, anchor=0.5 * v[0, 0])

    phi = np.zeros((K, n, G.dim), dtype=complex)
    for t in range(1, K + 1):
        phi[t - 1, :t] = u[t - 1, :t] - w[:t]
    phi_fam = CocycleFamily(grid, phi, SHIFT)
    residual = cocycle1_residual(phi_fam, gamma=G)
    if residual > 10 * tol * scale:
        raise ResidualError(f"trivialization fails the cocycle check ({residual:.3e})",
                            residual=residual, tolerance=10 * tol * scale)
    log.info("Gamma trivialized: K=%d, residual %.3e", K, residual)
    return GammaPipeline(CocycleFamily(grid, u, SHIFT), v_fam, w, phi_fam, residual)


def trivialize_gamma(G, tol=settings.DEFAULT_TOL):
    """phi with phi_{s+t} = phi_s + U_s phi_t + Gamma(s, t), supported in (0, t]."""
    return gamma_pipeline(G, tol).phi


def _require_chart(form, phi):
    if not isinstance(form, InnerForm):
        raise FormError("log and rho need a coordinatized (inner) form")
    if phi.support_residual() != 0.0:
        raise ResidualError("phi is not supported in (0, t]", residual=phi.support_residual(),
                            tolerance=0.0)


def build_log(form, section, phi, z):
    """log(z) = [z] - [e_t] - phi_t as a path of the same length as z."""
    _require_chart(form, phi)
    k = z.len_k
    e = section.at(k)
    vals = form.centred(z.values) - form.centred(e.values) - phi.at(k)[:k]
    return StepPath(z.grid, vals)


def rho_eval(form, section, phi, x):
    """rho(x) = <[x]-[e_t], phi_t> + g(x, e_t) - (g(e_t, e_t) + |phi_t|^2) / 2."""
    _require_chart(form, phi)
    k = x.len_k
    e = section.at(k)
    h = x.grid.step
    ph = phi.at(k)[:k]
    diff = form.centred(x.values) - form.centred(e.values)
    pairing = h * np.sum(diff * np.conj(ph))
    return complex(pairing + form.evaluate(x, e)
                   - 0.5 * (form.evaluate(e, e) + h * np.sum(np.abs(ph) ** 2)))


@dataclass(frozen=True)
class LogChart:
    """Form, reference section and trivializing phi bundled together."""
    form: object
    section: object
    phi: object

    @classmethod
    def for_section(cls, form, section, K=None, tol=settings.DEFAULT_TOL):
        return cls(form, section, trivialize_gamma(gamma_of_section(section, K), tol))

    def log(self, z):
        return build_log(self.form, self.section, self.phi, z)

    def rho(self, x):
        return rho_eval(self.form, self.section, self.phi, x)

    def identity_residual(self, samples):
        """Max |g(x1,x2) - <log x1, log x2> - rho(x1) - conj rho(x2)|."""
        logs = [self.log(x) for x in samples]
        rhos = [self.rho(x) for x in samples]
        worst = 0.0
        for x1, l1, r1 in zip(samples, logs, rhos):
            for x2, l2, r2 in zip(samples, logs, rhos):
                val = self.form.evaluate(x1, x2) - l1.inner(l2) - r1 - np.conj(r2)
                worst = max(worst, abs(val))
        return float(worst)

    def additivity_residual(self, pairs):
        worst = 0.0
        for x, y in pairs:
            lhs = self.log(concat_box(x, y)).values
            rhs = concat_box(self.log(x), self.log(y)).values
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        return worst


def multiplier_residual(c0):
    """Max |c(r,s+t)c(s,t) - c(r+s,t)c(r,s)| over r + s + t <= K."""
    c0 = np.asarray(c0, dtype=complex)
    K = c0.shape[0]
    worst = 0.0
    for r in range(1, K):
        for s in range(1, K - r):
            t = np.arange(1, K - r - s + 1)
            lhs = c0[r - 1, s + t - 1] * c0[s - 1, t - 1]
            rhs = c0[r + s - 1, t - 1] * c0[r - 1, s - 1]
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def coboundary(u):
    """c(s, t) = u(s) u(t) / u(s + t) for s + t <= K, 1 elsewhere."""
    u = np.asarray(u, dtype=complex)
    K = u.size
    c0 = np.ones((K, K), dtype=complex)
    for s in range(1, K):
        t = np.arange(1, K - s + 1)
        c0[s - 1, t - 1] = u[s - 1] * u[t - 1] / u[s + t - 1]
    return c0


def _reconstruction_residual(c0, u):
    K = u.size
    worst = 0.0
    for s in range(1, K):
        t = np.arange(1, K - s + 1)
        worst = max(worst, float(np.max(np.abs(c0[s - 1, t - 1] - u[s - 1] * u[t - 1] / u[s + t - 1]))))
    return worst


def trivialize_multiplier(c0, tol=settings.DEFAULT_TOL):
    """
    Unit-modulus u on the grid with c0(s, t) = u(s) u(t) / u(s + t).

    Args:
        c0: (K, K) array, c0[s-1, t-1] = c0(s h, t h); entries with s + t > K unused
        tol: absolute tolerance

    Returns:
        ndarray: u(k h) for k = 1..K, anchored by u(h) = 1
    """
    c0 = np.asarray(c0, dtype=complex)
    K = c0.shape[0]
    if c0.shape != (K, K) or K < 2:
        raise GridError(f"multiplier table must be square with K >= 2, got {c0.shape}")
    used = np.add.outer(np.arange(1, K + 1), np.arange(1, K + 1)) <= K
    modulus = float(np.max(np.abs(np.abs(c0[used]) - 1.0)))
    if modulus > tol:
        raise ResidualError(f"multiplier is not unimodular ({modulus:.3e})",
                            residual=modulus, tolerance=tol)
    residual = multiplier_residual(c0)
    if residual > tol:
        raise ResidualError(f"multiplier equation fails (residual {residual:.3e})",
                            residual=residual, tolerance=tol)
    u = np.empty(K, dtype=complex)
    u[0] = 1.0
    for k in range(1, K):
        u[k] = u[k - 1] * u[0] / c0[k - 1, 0]
    check = _reconstruction_residual(c0, u)
    if check > 10 * tol:
        raise ResidualError(f"multiplier reconstruction fails ({check:.3e})",
                            residual=check, tolerance=10 * tol)
    log.debug("multiplier trivialized on K=%d, residual %.3e", K, check)
    return u
