import math

import numpy as np
import pytest

from pathSystems.errors import FormError, GridError
from pathSystems.fock import (ExpSpanVector, TruncFockVector, diagonal_sample, diagonal_witness,
                              exp_gram, exp_multiply, exp_tail, one_particle_inner, pair_entire,
                              strong_span_witness, to_trunc, translation_residual, trunc_exp,
                              truncation_bound, weyl_apply, weyl_unitarity_residual)
from pathSystems.forms import min_eigenvalue
from pathSystems.pathspace import StepPath, TimeGrid

GRID = TimeGrid(1 / 16, 48)


def _vec(rng, d=3, scale=0.5):
    return scale * (rng.normal(size=d) + 1j * rng.normal(size=d))


def _path(rng, len_k=8, scale=0.5):
    return StepPath.random(GRID, len_k, 2, rng, scale=scale)


def test_exponential_inner_product(rng):
    a, b = _vec(rng), _vec(rng)
    val = ExpSpanVector.single(a).inner(ExpSpanVector.single(b))
    assert val == pytest.approx(np.exp(np.vdot(b, a)))


def test_one_particle_inner_rejects_mixed_arguments(rng):
    with pytest.raises(FormError, match="path"):
        one_particle_inner(_path(rng), _vec(rng))
    with pytest.raises(FormError, match="shape"):
        one_particle_inner(_vec(rng, 2), _vec(rng, 3))


def test_exponential_gram_is_psd(rng):
    G = exp_gram([_vec(rng) for _ in range(8)])
    assert min_eigenvalue(G) >= -1e-8 * np.max(np.abs(G))


def test_linear_combinations(rng):
    a, b = _vec(rng), _vec(rng)
    v = 2 * ExpSpanVector.single(a) - ExpSpanVector.single(b, 1j)
    assert len(v) == 2
    ea, eb = ExpSpanVector.single(a), ExpSpanVector.single(b)
    expected = 4 * ea.norm2() + eb.norm2() + 2 * (2j * ea.inner(eb)).real
    assert v.norm2() == pytest.approx(expected)


def test_multiplication_factorizes_inner_products(rng):
    f1, f2 = _path(rng, 5), _path(rng, 5)
    g1, g2 = _path(rng, 7), _path(rng, 7)
    prod1 = exp_multiply(ExpSpanVector.single(f1), ExpSpanVector.single(g1))
    prod2 = exp_multiply(ExpSpanVector.single(f2), ExpSpanVector.single(g2))
    expected = np.exp(f1.inner(f2)) * np.exp(g1.inner(g2))
    assert prod1.inner(prod2) == pytest.approx(expected, rel=1e-12)


def test_multiplication_needs_paths(rng):
    with pytest.raises(GridError):
        exp_multiply(ExpSpanVector.single(_vec(rng)), ExpSpanVector.single(_vec(rng)))


@pytest.mark.parametrize("kind", ["vector", "path"])
def test_weyl_operators_are_isometric(kind, rng):
    make = _vec if kind == "vector" else _path
    zeta = make(rng)
    assert weyl_unitarity_residual(zeta, [make(rng) for _ in range(5)]) <= 1e-12


def test_weyl_of_vacuum_is_normalized_coherent_vector(rng):
    zeta = _vec(rng)
    w = weyl_apply(zeta, ExpSpanVector.single(np.zeros(3)))
    assert w.norm2() == pytest.approx(1.0)


def test_translation_identity(rng):
    zeta = ExpSpanVector([(1.0, _vec(rng)), (-0.5j, _vec(rng))])
    xi = _vec(rng)
    assert translation_residual(zeta, xi, [_vec(rng) for _ in range(6)]) <= 1e-12


def test_truncated_exponential_coefficients():
    v = trunc_exp([0.5, 2.0], N=3)
    assert v.components[()] == 1
    assert v.components[(0, 0)] == pytest.approx(0.25 / math.sqrt(2))
    assert v.components[(0, 1)] == pytest.approx(1.0)
    assert v.components[(1, 1, 1)] == pytest.approx(8 / math.sqrt(6))
    assert len(v.components) == 10


def test_truncation_keeps_norm_within_tail(rng):
    xi = _vec(rng, scale=1.0)
    v = trunc_exp(xi, N=6)
    assert v.norm2() + v.tail == pytest.approx(np.exp(np.vdot(xi, xi).real), rel=1e-12)
    np.testing.assert_allclose(v.degree_norms().sum(), v.norm2())


def test_exp_tail_matches_series():
    xi = np.array([1.0, 0.5j])
    a = 1.25
    expected = math.exp(a) - sum(a ** n / math.factorial(n) for n in range(5))
    assert exp_tail(xi, 4) == pytest.approx(expected, rel=1e-10)
    assert exp_tail(np.zeros(2), 4) == 0.0


def test_truncated_inner_product_within_bound(rng):
    u = ExpSpanVector([(1.0, _vec(rng, scale=0.8)), (0.5, _vec(rng, scale=0.8))])
    v = ExpSpanVector([(1j, _vec(rng, scale=0.8))])
    for N in (2, 4, 8):
        err = abs(u.inner(v) - to_trunc(u, N).inner(to_trunc(v, N)))
        assert err <= truncation_bound(u, v, N) + 1e-12


def test_to_trunc_rejects_paths_and_empty_sums(rng):
    with pytest.raises(GridError):
        to_trunc(ExpSpanVector.single(_path(rng)))
    with pytest.raises(GridError):
        to_trunc(ExpSpanVector([]))


def test_fock_vector_validation():
    with pytest.raises(GridError, match="degree"):
        TruncFockVector(2, 1, {(0, 1): 1.0})
    with pytest.raises(GridError, match="index"):
        TruncFockVector(2, 2, {(2,): 1.0})
    with pytest.raises(GridError):
        TruncFockVector.vacuum(2).inner(TruncFockVector.vacuum(3))


def test_fock_vector_arithmetic():
    a = TruncFockVector(2, 2, {(1, 0): 1.0}, tail=0.25)
    assert (0, 1) in a.components
    b = a + TruncFockVector.vacuum(2)
    assert b.norm2() == pytest.approx(2.0)
    assert b.tail == pytest.approx(0.25)
    assert (2 * a).tail == pytest.approx(1.0)
    np.testing.assert_allclose(b.degree_norms(), [1.0, 0.0, 1.0])


def test_pair_entire_matches_exponential_inner_product(rng):
    zeta = trunc_exp(_vec(rng, 2), N=4)
    xi = _vec(rng, 2)
    assert pair_entire(zeta, xi) == pytest.approx(trunc_exp(xi, N=4).inner(zeta))
    with pytest.raises(GridError):
        pair_entire(zeta, _vec(rng, 3))


def test_diagonal_witness_vanishes_on_the_diagonals(rng):
    zeta = diagonal_witness()
    assert zeta.norm2() == pytest.approx(2.0)
    assert strong_span_witness(diagonal_sample(rng), zeta) <= 1e-12
    assert abs(pair_entire(zeta, [1.0, 0.0])) == pytest.approx(1 / math.sqrt(2))
