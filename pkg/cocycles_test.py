import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pathSystems.cocycles import (FORWARD, SHIFT, CocycleFamily, LogChart, build_log, coboundary,
                                  cocycle1_residual, cocycle2_residual, cocycle_from_primitive,
                                  gamma_of_section, gamma_pipeline, multiplier_residual,
                                  rho_eval, shift_cells, solve_cocycle1, stabilization_residual,
                                  trivialize_gamma, trivialize_multiplier)
from pathSystems.errors import FormError, GridError, ResidualError
from pathSystems.forms import GaussianForm, InnerForm
from pathSystems.pathspace import PathSection, StepPath, TimeGrid

GRID = TimeGrid(1 / 16, 48)


def _random_section(rng, dim=2):
    return PathSection(GRID, rng.normal(size=(48, dim)) + 1j * rng.normal(size=(48, dim)))


def test_shift_cells_moves_right():
    a = np.arange(1.0, 6.0)[:, None]
    np.testing.assert_array_equal(shift_cells(a, 2)[:, 0], [0, 0, 1, 2, 3])
    np.testing.assert_array_equal(shift_cells(a, 7), 0)


def test_primitive_is_recovered_up_to_anchor(rng):
    f = rng.normal(size=(40, 2)) + 1j * rng.normal(size=(40, 2))
    fam = cocycle_from_primitive(GRID, f, 10)
    assert cocycle1_residual(fam) <= 1e-12
    rec = solve_cocycle1(fam)
    assert rec.shape == (31, 2)
    np.testing.assert_allclose(rec, f[:31] - f[0], atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), dim=st.integers(1, 3))
def test_random_primitives_are_recovered(seed, dim):
    rng = np.random.default_rng(seed)
    f = rng.normal(size=(30, dim)) + 1j * rng.normal(size=(30, dim))
    rec = solve_cocycle1(cocycle_from_primitive(GRID, f, 8), anchor=f[0])
    assert np.max(np.abs(rec - f[:23])) <= 1e-10


def test_sine_cocycle_has_sine_primitive():
    x = GRID.midpoints(48)
    K, n_w = 8, 40
    values = np.stack([np.sin(x[:n_w] + k * GRID.step) - np.sin(x[:n_w]) for k in range(1, K + 1)])
    fam = CocycleFamily(GRID, values)
    assert cocycle1_residual(fam) <= 1e-13
    rec = solve_cocycle1(fam)
    np.testing.assert_allclose(rec[:, 0], np.sin(x[:n_w + 1]) - np.sin(x[0]), atol=1e-12)


def test_constant_cocycle_has_linear_primitive():
    fam = cocycle_from_primitive(GRID, np.arange(20.0), 5)
    np.testing.assert_allclose(fam.at(3), 3.0)
    np.testing.assert_allclose(solve_cocycle1(fam)[:, 0], np.arange(16.0))
    np.testing.assert_allclose(solve_cocycle1(fam, anchor=2.0)[:, 0], np.arange(16.0) + 2)


def test_non_cocycle_is_rejected(rng):
    fam = cocycle_from_primitive(GRID, rng.normal(size=30), 6)
    bad = CocycleFamily(GRID, fam.values + 1e-3 * rng.normal(size=fam.values.shape))
    with pytest.raises(ResidualError) as err:
        solve_cocycle1(bad)
    assert err.value.residual > err.value.tolerance


def test_family_validation():
    with pytest.raises(GridError):
        CocycleFamily(GRID, np.zeros(5))
    with pytest.raises(GridError, match="convention"):
        CocycleFamily(GRID, np.zeros((2, 3)), convention="backward")
    fam = CocycleFamily(GRID, np.zeros((2, 3)), SHIFT)
    with pytest.raises(GridError):
        fam.at(3)
    with pytest.raises(GridError, match="forward"):
        solve_cocycle1(fam)
    with pytest.raises(GridError):
        cocycle_from_primitive(GRID, np.zeros(5), 5)


def test_ramp_gamma_closed_form():
    G = gamma_of_section(PathSection.ramp(GRID))
    assert G.K == 16
    block = G.at(3, 5)[:, 0]
    np.testing.assert_allclose(block[3:8], -3 / 16, atol=1e-15)
    assert not np.any(block[:3]) and not np.any(block[8:])
    assert G.support_residual() == 0.0


def test_gamma_accepts_a_coherent_family(rng):
    top = StepPath.random(GRID, 48, 1, rng)
    G = gamma_of_section({k: top.prefix(k) for k in (4, 48)}, K=8)
    assert G.K == 8
    with pytest.raises(GridError):
        gamma_of_section(PathSection.ramp(GRID), K=48)
    with pytest.raises(GridError):
        G.at(9, 1)


def test_section_gamma_is_a_stable_two_cocycle(rng):
    G = gamma_of_section(_random_section(rng))
    assert cocycle2_residual(G) <= 1e-12
    assert stabilization_residual(G) <= 1e-12


def test_pipeline_trivializes_random_section(rng):
    G = gamma_of_section(_random_section(rng))
    pipe = gamma_pipeline(G)
    assert pipe.residual <= 1e-10 * G.scale()
    assert pipe.phi.convention == SHIFT
    assert pipe.v.convention == FORWARD
    assert pipe.phi.support_residual() == 0.0
    np.testing.assert_array_equal(trivialize_gamma(G).values, pipe.phi.values)


def test_pipeline_ramp_closed_forms():
    pipe = gamma_pipeline(gamma_of_section(PathSection.ramp(GRID)))
    h = GRID.step
    for s in (1, 5, 16):
        np.testing.assert_allclose(pipe.u.at(s)[s:, 0], s * h, atol=1e-12)
        np.testing.assert_allclose(pipe.u.at(s)[:s, 0], 0.0, atol=1e-12)
        np.testing.assert_allclose(pipe.phi.at(s)[:s, 0], -GRID.midpoints(s), atol=1e-12)


def test_perturbed_gamma_is_rejected(rng):
    G = gamma_of_section(_random_section(rng)).perturbed(rng, 1e-3)
    with pytest.raises(ResidualError, match="2-cocycle"):
        gamma_pipeline(G)


def test_pipeline_needs_a_long_horizon():
    G = gamma_of_section(PathSection.ramp(GRID), K=20)
    with pytest.raises(GridError, match="horizon"):
        gamma_pipeline(G)


@pytest.fixture
def chart(rng):
    return LogChart.for_section(InnerForm(), _random_section(rng))


def test_log_chart_identity(chart, rng):
    samples = [StepPath.random(GRID, 12, 2, rng) for _ in range(6)]
    assert chart.identity_residual(samples) <= 1e-10


def test_log_is_additive(chart, rng):
    pairs = [(StepPath.random(GRID, s, 2, rng), StepPath.random(GRID, t, 2, rng))
             for s, t in [(1, 1), (3, 7), (9, 7), (5, 2)]]
    assert chart.additivity_residual(pairs) <= 1e-10


def test_log_of_the_reference_is_minus_phi(chart):
    e = chart.section.at(10)
    np.testing.assert_allclose(chart.log(e).values, -chart.phi.at(10)[:10], atol=1e-15)


def test_rho_of_the_reference(chart):
    e = chart.section.at(10)
    ph = chart.phi.at(10)[:10]
    g_ee = chart.form(e, e)
    expected = 0.5 * (g_ee - GRID.step * np.sum(np.abs(ph) ** 2))
    assert rho_eval(chart.form, chart.section, chart.phi, e) == pytest.approx(expected, abs=1e-12)
    np.testing.assert_array_equal(build_log(chart.form, chart.section, chart.phi, e).values,
                                  chart.log(e).values)


def test_log_needs_an_inner_form(rng):
    section = _random_section(rng, dim=1)
    chart = LogChart(GaussianForm(), section, trivialize_gamma(gamma_of_section(section)))
    with pytest.raises(FormError):
        chart.rho(StepPath.random(GRID, 3, 1, rng, real=True))


def _unimodular(rng, K):
    return np.exp(1j * rng.uniform(-np.pi, np.pi, size=K))


def test_coboundary_is_a_multiplier(rng):
    assert multiplier_residual(coboundary(_unimodular(rng, 12))) <= 1e-12


def test_multiplier_trivialization_recovers_gauge(rng):
    u = _unimodular(rng, 12)
    rec = trivialize_multiplier(coboundary(u))
    assert rec[0] == 1
    np.testing.assert_allclose(rec, u / u[0] ** np.arange(1, 13), atol=1e-10)


def test_quadratic_character_is_a_coboundary():
    K, h = 16, 1 / 16
    k = np.arange(1, K + 1)
    c0 = np.exp(1j * np.outer(k, k) * h * h)
    u = trivialize_multiplier(c0)
    used = np.add.outer(k, k) <= K
    np.testing.assert_allclose(coboundary(u)[used], c0[used], atol=1e-10)


def test_multiplier_rejections(rng):
    with pytest.raises(GridError):
        trivialize_multiplier(np.ones((1, 1)))
    with pytest.raises(ResidualError, match="unimodular"):
        trivialize_multiplier(2 * np.ones((4, 4)))
    with pytest.raises(ResidualError, match="equation"):
        trivialize_multiplier(np.exp(1j * rng.uniform(-np.pi, np.pi, size=(6, 6))))
