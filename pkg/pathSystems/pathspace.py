"""
Path spaces on a uniform time grid.

A path of length t = k*h is a list of k cells; cell k carries the value on
((k-1)h, kh].  Three concatenation rules are provided: cell append for step
paths, offset concatenation for sampled real paths, and concatenation through
driving functions of a repulsive potential.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import GridError, ObstacleError

log = logging.getLogger(__name__)

# Relative slack when snapping a time onto the grid
SNAP_TOL = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """
    Uniform grid t_k = k*h, 1 <= k <= n_max.

    Args:
        step: cell width h
        n_max: number of cells up to the horizon
    """
    step: float
    n_max: int

    def __post_init__(self):
        if not self.step > 0:
            raise GridError(f"grid step must be positive, got {self.step}")
        if int(self.n_max) != self.n_max or self.n_max < 2:
            raise GridError(f"n_max must be an integer >= 2, got {self.n_max}")

    @property
    def horizon(self):
        return self.n_max * self.step

    def index(self, t):
        """Snap a time to its grid index; off-grid times are rejected."""
        k = t / self.step
        kr = int(round(k))
        if abs(k - kr) > SNAP_TOL * max(1.0, abs(k)):
            raise GridError(f"time {t} is not a multiple of h={self.step}")
        return kr

    def time(self, k):
        return k * self.step

    def midpoints(self, len_k):
        return (np.arange(len_k) + 0.5) * self.step

    def refine(self):
        """Grid with half the step and the same horizon."""
        return TimeGrid(self.step / 2, 2 * self.n_max)


def _as_cells(values):
    arr = np.array(values, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise GridError(f"cell values must have shape (len_k, d), got {arr.shape}")
    arr.setflags(write=False)
    return arr


class StepPath:
    """
    Element of the fiber P(t): one complex d-vector per grid cell.

    Instances are immutable; equality is exact cell comparison and paths of
    different lengths never compare equal.
    """
    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", _as_cells(values))

    def __setattr__(self, name, value):
        raise AttributeError("StepPath is immutable")

    @classmethod
    def constant(cls, grid, len_k, value):
        value = np.atleast_1d(np.asarray(value, dtype=complex))
        return cls(grid, np.tile(value, (len_k, 1)))

    @classmethod
    def from_function(cls, grid, len_k, fn):
        """Sample fn at cell midpoints; fn maps an array of times to values."""
        vals = np.asarray(fn(grid.midpoints(len_k)), dtype=complex)
        return cls(grid, vals)

    @classmethod
    def ramp(cls, grid, len_k):
        return cls.from_function(grid, len_k, lambda s: s)

    @classmethod
    def random(cls, grid, len_k, dim, rng, scale=1.0, real=False):
        vals = rng.normal(scale=scale, size=(len_k, dim))
        if not real:
            vals = vals + 1j * rng.normal(scale=scale, size=(len_k, dim))
        return cls(grid, vals)

    @classmethod
    def random_smooth(cls, grid, len_k, dim, rng, scale=1.0):
        """a + b s + c sin(2 pi s) with complex normal coefficients."""
        a, b, c = scale * (rng.normal(size=(3, dim)) + 1j * rng.normal(size=(3, dim)))
        s = grid.midpoints(len_k)[:, None]
        return cls(grid, a + b * s + c * np.sin(2 * np.pi * s))

    @property
    def len_k(self):
        return self.values.shape[0]

    @property
    def dim(self):
        return self.values.shape[1]

    @property
    def length(self):
        return self.len_k * self.grid.step

    @property
    def is_real(self):
        return not np.any(self.values.imag)

    def prefix(self, k):
        if not 1 <= k <= self.len_k:
            raise GridError(f"prefix of {k} cells from a path of {self.len_k}")
        return StepPath(self.grid, self.values[:k])

    def inner(self, other):
        """L^2 inner product h * sum <x_k, y_k>, linear in the first slot."""
        self._check_same_fiber(other)
        return complex(self.grid.step * np.sum(self.values * np.conj(other.values)))

    def norm2(self):
        return float(self.grid.step * np.sum(np.abs(self.values) ** 2))

    def upsample(self):
        """The same step function on the refined grid."""
        return StepPath(self.grid.refine(), np.repeat(self.values, 2, axis=0))

    def _check_same_fiber(self, other):
        if self.grid != other.grid:
            raise GridError("paths live on different grids")
        if self.values.shape != other.values.shape:
            raise GridError(
                f"paths differ in shape: {self.values.shape} vs {other.values.shape}")

    def __add__(self, other):
        self._check_same_fiber(other)
        return StepPath(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check_same_fiber(other)
        return StepPath(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        return StepPath(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return StepPath(self.grid, -self.values)

    def __eq__(self, other):
        if not isinstance(other, StepPath):
            return NotImplemented
        return (self.grid == other.grid
                and self.values.shape == other.values.shape
                and bool(np.array_equal(self.values, other.values)))

    def __hash__(self):
        # + 0.0 folds -0.0 into 0.0 so equal paths hash alike
        return hash((self.grid, self.values.shape, (self.values + 0.0).tobytes()))

    def __repr__(self):
        return f"StepPath(t={self.length:g}, len_k={self.len_k}, d={self.dim})"


def concat_box(f, g):
    """f followed by g: cells of f, then cells of g."""
    if f.grid != g.grid:
        raise GridError("cannot concatenate paths on different grids")
    if f.dim != g.dim:
        raise GridError(f"cannot concatenate d={f.dim} with d={g.dim}")
    return StepPath(f.grid, np.concatenate([f.values, g.values]))


def propagator_k(x, i, j):
    """Cells i+1..j of x, shifted to start at 0 (grid indices)."""
    if not 0 <= i < j <= x.len_k:
        raise GridError(f"propagator needs 0 <= r < s <= {x.len_k} cells, got ({i}, {j})")
    return StepPath(x.grid, x.values[i:j])


def propagator(x, r, s):
    """
    The propagator x(r, s) of a step path.

    Args:
        x: path of length t
        r: left end, 0 <= r < s
        s: right end, s <= t

    Returns:
        StepPath: cells of x over (r, s], of length s - r
    """
    return propagator_k(x, x.grid.index(r), x.grid.index(s))


def unique_factorization(x, s):
    """Split x in P(s+t) into the unique (a, b) with concat_box(a, b) == x."""
    k = x.grid.index(s)
    if not 0 < k < x.len_k:
        raise GridError(f"split point {s} must lie strictly inside (0, {x.length}]")
    return propagator_k(x, 0, k), propagator_k(x, k, x.len_k)


@dataclass(frozen=True)
class Partition:
    """
    Cut points 0 = c_0 < c_1 < ... < c_n of (0, t], stored as grid indices.
    """
    grid: TimeGrid
    cuts: tuple

    def __post_init__(self):
        cuts = tuple(int(c) for c in self.cuts)
        if len(cuts) < 2 or cuts[0] != 0:
            raise GridError("a partition needs at least one cell and must start at 0")
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise GridError(f"cut points must be strictly increasing: {cuts}")
        object.__setattr__(self, "cuts", cuts)

    @classmethod
    def from_times(cls, grid, times):
        return cls(grid, tuple(grid.index(t) for t in times))

    @classmethod
    def uniform(cls, grid, t, n):
        """n equal cells; t/n must be a grid multiple."""
        k = grid.index(t)
        if n < 1 or k % n:
            raise GridError(f"cannot cut (0, {t}] into {n} equal on-grid cells (h={grid.step})")
        return cls(grid, tuple(range(0, k + 1, k // n)))

    @classmethod
    def dyadic(cls, grid, t, level):
        return cls.uniform(grid, t, 2 ** level)

    @property
    def length_k(self):
        return self.cuts[-1]

    @property
    def length(self):
        return self.grid.time(self.length_k)

    @property
    def times(self):
        return tuple(self.grid.time(c) for c in self.cuts)

    @property
    def n_cells(self):
        return len(self.cuts) - 1

    @property
    def mesh(self):
        return self.grid.step * max(b - a for a, b in self.intervals())

    def intervals(self):
        return list(zip(self.cuts, self.cuts[1:]))

    def refines(self, other):
        """True when every cut of other is a cut of self (other <= self)."""
        return self.length_k == other.length_k and set(other.cuts) <= set(self.cuts)

    def __le__(self, other):
        return other.refines(self)

    def dyadic_refine(self):
        """Halve every cell whose length is an even number of grid steps."""
        cuts = [0]
        for a, b in self.intervals():
            if (b - a) % 2 == 0:
                cuts.append((a + b) // 2)
            cuts.append(b)
        return Partition(self.grid, tuple(cuts))

    def restrict(self, s):
        """The partition of (0, s] cut at s and at the cuts below s."""
        k = self.grid.index(s)
        if not 0 < k <= self.length_k:
            raise GridError(f"cannot restrict a partition of (0, {self.length}] to (0, {s}]")
        return Partition(self.grid, tuple(c for c in self.cuts if c < k) + (k,))


class PathSection:
    """
    Left-coherent section k -> e_k given by the prefixes of one profile
    defined on the whole grid horizon.
    """

    def __init__(self, grid, profile):
        self.grid = grid
        self.profile = _as_cells(profile)
        if self.profile.shape[0] != grid.n_max:
            raise GridError(
                f"section profile needs {grid.n_max} cells, got {self.profile.shape[0]}")

    @classmethod
    def constant(cls, grid, value):
        return cls(grid, StepPath.constant(grid, grid.n_max, value).values)

    @classmethod
    def ramp(cls, grid):
        return cls(grid, StepPath.ramp(grid, grid.n_max).values)

    @classmethod
    def from_family(cls, grid, family):
        """
        Build a section from an explicit map len_k -> StepPath.

        Raises:
            GridError: the family is not left-coherent or does not reach the horizon
        """
        if grid.n_max not in family:
            raise GridError("a section family must contain a value at the grid horizon")
        top = family[grid.n_max]
        for k, x in family.items():
            if x.len_k != k:
                raise GridError(f"family entry {k} has {x.len_k} cells")
            if not np.array_equal(x.values, top.values[:k]):
                raise GridError(f"family is not left-coherent at k={k}")
        return cls(grid, top.values)

    @property
    def dim(self):
        return self.profile.shape[1]

    def at(self, k):
        """The section value e_t for t = k*h."""
        if not 1 <= k <= self.grid.n_max:
            raise GridError(f"section index {k} outside 1..{self.grid.n_max}")
        return StepPath(self.grid, self.profile[:k])

    def value(self, t):
        return self.at(self.grid.index(t))

    def propagator(self, i, j):
        return propagator_k(self.at(j), i, j)


def left_coherent_section(seed, tail=None):
    """
    Section through a given seed element.

    Prefixes of seed for t up to its length; beyond it the tail (the seed
    itself by default) is appended repeatedly until the horizon.

    Args:
        seed: StepPath
        tail: StepPath on the same grid, or None

    Returns:
        PathSection: section whose value at seed.len_k equals seed
    """
    tail = seed if tail is None else tail
    if tail.grid != seed.grid or tail.dim != seed.dim:
        raise GridError("tail must share the grid and dimension of the seed")
    n_max = seed.grid.n_max
    if seed.len_k > n_max:
        raise GridError(f"seed of {seed.len_k} cells exceeds the horizon {n_max}")
    reps = -(-(n_max - seed.len_k) // tail.len_k)
    cells = np.concatenate([seed.values] + [tail.values] * reps)[:n_max]
    return PathSection(seed.grid, cells)


class SampledPath:
    """
    Real path sampled at 0, h, ..., n*h (n + 1 points of dimension dim).
    """

    def __init__(self, step, points):
        if not step > 0:
            raise GridError(f"sample step must be positive, got {step}")
        pts = np.array(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 2:
            raise GridError(f"need at least two sample points, got shape {pts.shape}")
        pts.setflags(write=False)
        self.step = float(step)
        self.points = pts

    @property
    def n_steps(self):
        return self.points.shape[0] - 1

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def length(self):
        return self.n_steps * self.step

    def _check_joinable(self, other):
        if abs(self.step - other.step) > SNAP_TOL * self.step:
            raise GridError(f"sample steps differ: {self.step} vs {other.step}")
        if self.dim != other.dim:
            raise GridError(f"cannot join d={self.dim} with d={other.dim}")

    def __repr__(self):
        return f"{type(self).__name__}(t={self.length:g}, n={self.n_steps}, d={self.dim})"


def _offset_join(f, g):
    f._check_joinable(g)
    return np.concatenate([f.points[:-1], f.points[-1] + g.points])


def concat_offset(f, g):
    """Run f, then g translated to start where f ends."""
    for name, p in (("f", f), ("g", g)):
        if np.any(p.points[0] != 0):
            raise GridError(f"{name} must start at the origin, starts at {p.points[0]}")
    return SampledPath(f.step, _offset_join(f, g))


@dataclass(frozen=True)
class DiskObstacle:
    center: tuple
    radius: float

    def distance(self, x):
        return float(np.linalg.norm(np.asarray(x) - np.asarray(self.center))) - self.radius

    def distance_gradient(self, x):
        d = np.asarray(x, dtype=float) - np.asarray(self.center, dtype=float)
        return d / np.linalg.norm(d)


@dataclass(frozen=True)
class RepulsivePotential:
    """
    V(x) = 1 / dist(x, K) for K a union of disks, shifted by a linear term so
    that grad V(0) = 0.  An empty obstacle list gives V = 0.
    """
    obstacles: tuple = ()
    dim: int = 2
    _grad0: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        origin = np.zeros(self.dim)
        if self.obstacles and self.distance(origin) <= 0:
            raise ObstacleError("the obstacle set contains the origin", time=0.0)
        object.__setattr__(self, "_grad0", self._raw_gradient(origin))

    def distance(self, x):
        if not self.obstacles:
            return np.inf
        return min(k.distance(x) for k in self.obstacles)

    def _raw_gradient(self, x):
        if not self.obstacles:
            return np.zeros(self.dim)
        nearest = min(self.obstacles, key=lambda k: k.distance(x))
        d = nearest.distance(x)
        return -nearest.distance_gradient(x) / d ** 2

    def value(self, x):
        if not self.obstacles:
            return 0.0
        return 1.0 / self.distance(x) - float(np.dot(self._grad0, x))

    def gradient(self, x):
        return self._raw_gradient(x) - self._grad0


class PlanarPath(SampledPath):
    """Sampled path that avoids the obstacle set of its potential."""

    def __init__(self, step, points, potential):
        super().__init__(step, points)
        if np.any(self.points[0] != 0):
            raise GridError(f"planar paths start at the origin, got {self.points[0]}")
        self.potential = potential
        for k, p in enumerate(self.points):
            if potential.distance(p) <= 0:
                raise ObstacleError(f"sample {k} lies inside the obstacle set", time=k * self.step)


def driving_function(path):
    """
    Driving samples phi_k = (p_{k+1} - p_k)/h + grad V(p_k).

    The sample at the right end repeats the last difference quotient.
    """
    pot = path.potential
    p = path.points
    phi = np.empty_like(p)
    phi[:-1] = np.diff(p, axis=0) / path.step
    phi[:-1] += np.array([pot.gradient(x) for x in p[:-1]])
    phi[-1] = phi[-2]
    return SampledPath(path.step, phi)


def integrate_driving(phi, potential):
    """
    Explicit Euler solution of f' = phi - grad V(f), f(0) = 0.

    Raises:
        ObstacleError: a step lands inside the obstacle set
    """
    h = phi.step
    pts = np.zeros_like(phi.points)
    for k in range(phi.n_steps):
        pts[k + 1] = pts[k] + h * (phi.points[k] - potential.gradient(pts[k]))
        if potential.distance(pts[k + 1]) <= 0:
            raise ObstacleError(
                f"Euler step entered the obstacle set at t={(k + 1) * h:g}; reduce the step",
                time=(k + 1) * h)
    return PlanarPath(h, pts, potential)


def concat_potential(f, g, potential=None):
    """
    Concatenate through driving functions: phi_f on [0, s), then
    phi_f(s) + phi_g(lambda - s), integrated from the origin.
    """
    potential = f.potential if potential is None else potential
    if f.potential != potential or g.potential != potential:
        raise GridError("both paths must be built on the same potential")
    phi = _offset_join(driving_function(f), driving_function(g))
    log.debug("integrating composite driving function over %d steps", len(phi) - 1)
    return integrate_driving(SampledPath(f.step, phi), potential)
