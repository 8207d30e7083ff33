"""
Symmetric Fock space over a one-particle space.

Two representations are kept side by side.  ExpSpanVector holds finite
combinations of exponential vectors and computes inner products exactly
through <exp f, exp h> = e^<f,h>.  TruncFockVector holds degree-truncated
symmetric tensors in the orthonormal multiset basis, used where individual
degrees matter.

One-particle vectors are either StepPath instances (the L^2 space of the
grid) or 1-d complex arrays.
"""

import logging
import math
from itertools import combinations_with_replacement

import numpy as np
from scipy.special import gammainc

from . import settings
from .errors import FormError, GridError
from .pathspace import StepPath, concat_box

log = logging.getLogger(__name__)


def one_particle_inner(a, b):
    """<a, b>, linear in a."""
    if isinstance(a, StepPath) and isinstance(b, StepPath):
        return a.inner(b)
    if isinstance(a, StepPath) or isinstance(b, StepPath):
        raise FormError("cannot pair a path with a coordinate vector")
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise FormError(f"one-particle vectors differ in shape: {a.shape} vs {b.shape}")
    return complex(np.vdot(b, a))


def _add(a, b):
    if isinstance(a, StepPath):
        return a + b
    return np.asarray(a, dtype=complex) + np.asarray(b, dtype=complex)


class ExpSpanVector:
    """sum_k coeff_k * exp(f_k)."""

    def __init__(self, terms):
        self.terms = tuple((complex(c), f) for c, f in terms)

    @classmethod
    def single(cls, f, coeff=1.0):
        return cls([(coeff, f)])

    def inner(self, other):
        total = 0j
        for c, f in self.terms:
            for d, h in other.terms:
                total += c * np.conj(d) * np.exp(one_particle_inner(f, h))
        return complex(total)

    def norm2(self):
        return float(self.inner(self).real)

    def __add__(self, other):
        return ExpSpanVector(self.terms + other.terms)

    def __sub__(self, other):
        return self + other * -1

    def __mul__(self, scalar):
        return ExpSpanVector([(c * scalar, f) for c, f in self.terms])

    __rmul__ = __mul__

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"ExpSpanVector({len(self.terms)} terms)"


def exp_gram(vectors):
    """G[k, l] = exp(<f_k, f_l>)."""
    n = len(vectors)
    G = np.empty((n, n), dtype=complex)
    for k in range(n):
        for l in range(n):
            G[k, l] = np.exp(one_particle_inner(vectors[k], vectors[l]))
    return G


def exp_multiply(v, w):
    """exp(f) exp(g) = exp(f concatenated with g), extended bilinearly."""
    terms = []
    for c, f in v.terms:
        for d, g in w.terms:
            if not (isinstance(f, StepPath) and isinstance(g, StepPath)):
                raise GridError("exponential multiplication needs path one-particles")
            terms.append((c * d, concat_box(f, g)))
    return ExpSpanVector(terms)


def weyl_apply(zeta, v):
    """W_zeta exp(eta) = exp(-|zeta|^2/2 - <eta, zeta>) exp(zeta + eta)."""
    half = 0.5 * one_particle_inner(zeta, zeta)
    terms = [(c * np.exp(-half - one_particle_inner(eta, zeta)), _add(zeta, eta))
             for c, eta in v.terms]
    return ExpSpanVector(terms)


def weyl_unitarity_residual(zeta, etas):
    """Max |<W exp a, W exp b> - e^<a,b>| relative to max(1, |e^<a,b>|)."""
    worst = 0.0
    for a in etas:
        wa = weyl_apply(zeta, ExpSpanVector.single(a))
        for b in etas:
            ref = np.exp(one_particle_inner(a, b))
            val = wa.inner(weyl_apply(zeta, ExpSpanVector.single(b)))
            worst = max(worst, abs(val - ref) / max(1.0, abs(ref)))
    return float(worst)


def translation_residual(zeta, xi, samples):
    """
    Check <exp(s + xi), zeta> = e^{|xi|^2/2 + <s, xi>} <exp(s), W_{-xi} zeta>
    over the sample; zeta is an ExpSpanVector.
    """
    moved = weyl_apply(_neg(xi), zeta)
    half = 0.5 * one_particle_inner(xi, xi)
    worst = 0.0
    for s in samples:
        lhs = ExpSpanVector.single(_add(s, xi)).inner(zeta)
        rhs = np.exp(half + one_particle_inner(s, xi)) * ExpSpanVector.single(s).inner(moved)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return float(worst)


def _neg(a):
    return -a if isinstance(a, StepPath) else -np.asarray(a, dtype=complex)


class TruncFockVector:
    """
    Components in the orthonormal multiset basis, degree <= N.

    Keys are sorted tuples of one-particle indices; the key length is the
    degree.  tail bounds the squared norm of whatever was discarded.
    """

    def __init__(self, dim, N, components, tail=0.0):
        self.dim = int(dim)
        self.N = int(N)
        self.components = {}
        for key, val in components.items():
            key = tuple(sorted(int(i) for i in key))
            if len(key) > self.N:
                raise GridError(f"component {key} exceeds degree {self.N}")
            if any(not 0 <= i < self.dim for i in key):
                raise GridError(f"component {key} has an index outside 0..{self.dim - 1}")
            self.components[key] = self.components.get(key, 0j) + complex(val)
        self.tail = float(tail)

    @classmethod
    def vacuum(cls, dim, N=0):
        return cls(dim, N, {(): 1.0})

    def _check(self, other):
        if self.dim != other.dim:
            raise GridError(f"Fock vectors over d={self.dim} and d={other.dim}")

    def inner(self, other):
        self._check(other)
        return complex(sum(v * np.conj(other.components[k])
                           for k, v in self.components.items() if k in other.components))

    def norm2(self):
        return float(sum(abs(v) ** 2 for v in self.components.values()))

    def degree_norms(self):
        """Squared norm of each degree 0..N."""
        out = np.zeros(self.N + 1)
        for k, v in self.components.items():
            out[len(k)] += abs(v) ** 2
        return out

    def __add__(self, other):
        self._check(other)
        comps = dict(self.components)
        for k, v in other.components.items():
            comps[k] = comps.get(k, 0j) + v
        tail = (math.sqrt(self.tail) + math.sqrt(other.tail)) ** 2
        return TruncFockVector(self.dim, max(self.N, other.N), comps, tail)

    def __mul__(self, scalar):
        return TruncFockVector(self.dim, self.N,
                               {k: v * scalar for k, v in self.components.items()},
                               abs(scalar) ** 2 * self.tail)

    __rmul__ = __mul__

    def __repr__(self):
        return f"TruncFockVector(d={self.dim}, N={self.N}, {len(self.components)} components)"


def _multisets(dim, N):
    for n in range(N + 1):
        yield from combinations_with_replacement(range(dim), n)


def _exp_coefficient(xi, key):
    counts = np.bincount(np.asarray(key, dtype=int), minlength=xi.size) if key else np.zeros(xi.size, int)
    norm = math.sqrt(math.prod(math.factorial(int(c)) for c in counts))
    return complex(np.prod(xi ** counts)) / norm


def exp_tail(xi, N):
    """sum_{n > N} |xi|^{2n} / n!"""
    a = float(np.vdot(xi, xi).real)
    if a == 0.0:
        return 0.0
    return float(np.exp(a) * gammainc(N + 1, a))


def trunc_exp(xi, N=settings.DEFAULT_TRUNCATION):
    """exp(xi) cut after degree N, with its tail bound."""
    if N < 0:
        raise GridError(f"truncation degree must be >= 0, got {N}")
    xi = np.atleast_1d(np.asarray(xi, dtype=complex))
    comps = {key: _exp_coefficient(xi, key) for key in _multisets(xi.size, N)}
    return TruncFockVector(xi.size, N, comps, exp_tail(xi, N))


def pair_entire(zeta, xi):
    """f_zeta(xi) = <exp(xi), zeta>, a finite sum over the components of zeta."""
    xi = np.atleast_1d(np.asarray(xi, dtype=complex))
    if xi.size != zeta.dim:
        raise GridError(f"xi has dimension {xi.size}, zeta lives over d={zeta.dim}")
    return complex(sum(_exp_coefficient(xi, k) * np.conj(v) for k, v in zeta.components.items()))


def strong_span_witness(samples, zeta):
    """sup over the sample of |f_zeta|; near zero for nonzero zeta means failure."""
    return float(max(abs(pair_entire(zeta, s)) for s in samples))


def diagonal_witness():
    """The degree-2 tensor e1 e1 - e2 e2 over C^2."""
    return TruncFockVector(2, 2, {(0, 0): 1.0, (1, 1): -1.0})


def diagonal_sample(rng, n=20):
    """lambda (e1 + e2) and lambda (e1 - e2) for n random complex lambda."""
    lam = rng.normal(size=n) + 1j * rng.normal(size=n)
    plus = [l * np.array([1.0, 1.0]) for l in lam]
    minus = [l * np.array([1.0, -1.0]) for l in lam]
    return plus + minus


def to_trunc(v, N=settings.DEFAULT_TRUNCATION):
    """Truncate an ExpSpanVector with coordinate one-particles."""
    out = None
    for c, f in v.terms:
        if isinstance(f, StepPath):
            raise GridError("to_trunc needs coordinate one-particles")
        term = trunc_exp(f, N) * c
        out = term if out is None else out + term
    if out is None:
        raise GridError("cannot truncate an empty combination")
    return out


def truncation_bound(u, v, N=settings.DEFAULT_TRUNCATION):
    """Bound on |<u, v> - <to_trunc(u), to_trunc(v)>|."""
    total = 0.0
    for c, f in u.terms:
        tf = exp_tail(np.atleast_1d(np.asarray(f, dtype=complex)), N)
        for d, h in v.terms:
            th = exp_tail(np.atleast_1d(np.asarray(h, dtype=complex)), N)
            total += abs(c) * abs(d) * math.sqrt(tf * th)
    return total
