import numpy as np
import pytest

from pathSystems.errors import FormError, GridError
from pathSystems.forms import GaussianForm, InnerForm, PoissonForm
from pathSystems.kernel_hilbert import (CenteredVector, centered_gram, coordinates, diff_inner,
                                        embed_check_45, psd_check, purity_check_413,
                                        shift_apply, shift_isometry_residual,
                                        shift_representative_residual)
from pathSystems.pathspace import StepPath, TimeGrid, concat_box

GRID = TimeGrid(1 / 16, 48)

FORMS = [GaussianForm(1.0), PoissonForm(1.0, 2.0), InnerForm()]


def _path(rng, len_k):
    return StepPath.random(GRID, len_k, 1, rng, real=True)


def _pairs(rng, n, len_k):
    return [(_path(rng, len_k), _path(rng, len_k)) for _ in range(n)]


def _vectors(form, rng, n, len_k):
    return [CenteredVector(x, y, form) for x, y in _pairs(rng, n, len_k)]


def test_gaussian_unit_difference():
    one = StepPath.constant(GRID, 16, 1.0)
    zero = StepPath.constant(GRID, 16, 0.0)
    v = CenteredVector(one, zero, GaussianForm(1.0))
    assert diff_inner(v, v) == pytest.approx(2.0)


@pytest.mark.parametrize("form", FORMS)
def test_centered_gram_is_psd(form, rng):
    G = centered_gram(_vectors(form, rng, 10, 12))
    value, ok = psd_check(G)
    assert ok, value


@pytest.mark.parametrize("form", FORMS)
def test_embedding_is_isometric(form, rng):
    x_pairs = _pairs(rng, 4, 8)
    y_pairs = _pairs(rng, 4, 8)
    z_pairs = _pairs(rng, 4, 6)
    assert embed_check_45(form, x_pairs, y_pairs, z_pairs, _path(rng, 6)) <= 1e-12


def test_embedding_needs_matching_pair_lists(rng):
    with pytest.raises(GridError):
        embed_check_45(InnerForm(), _pairs(rng, 2, 4), _pairs(rng, 2, 4), _pairs(rng, 1, 2),
                       _path(rng, 2))


def test_extension_represents_the_same_vector(rng):
    form = GaussianForm(1.0)
    v1, v2 = _vectors(form, rng, 2, 8)
    filler = _path(rng, 5)
    assert diff_inner(v1.extend(filler), v2.extend(filler)) == pytest.approx(diff_inner(v1, v2),
                                                                           abs=1e-12)


def test_mixed_lengths_use_the_filler(rng):
    form = InnerForm()
    short = _vectors(form, rng, 1, 4)[0]
    long = _vectors(form, rng, 1, 7)[0]
    filler = _path(rng, 3)
    expected = diff_inner(short.extend(filler), long)
    assert diff_inner(short, long, filler) == pytest.approx(expected)
    assert diff_inner(long, short, filler) == pytest.approx(np.conj(expected))
    with pytest.raises(GridError, match="no filler"):
        diff_inner(short, long)
    with pytest.raises(GridError, match="3 cells"):
        diff_inner(short, long, _path(rng, 2))


def test_vectors_on_different_forms_do_not_pair(rng):
    x, y = _pairs(rng, 1, 4)[0]
    with pytest.raises(FormError):
        diff_inner(CenteredVector(x, y, InnerForm()), CenteredVector(x, y, GaussianForm()))


def test_difference_needs_one_fiber(rng):
    with pytest.raises(GridError):
        CenteredVector(_path(rng, 4), _path(rng, 5), InnerForm())


@pytest.mark.parametrize("form", FORMS)
def test_right_shift_is_isometric(form, rng):
    u = _path(rng, 5)
    assert shift_isometry_residual(u, _vectors(form, rng, 5, 8)) <= 1e-12
    assert shift_isometry_residual(None, _vectors(form, rng, 2, 8)) == 0.0


@pytest.mark.parametrize("form", FORMS)
def test_right_shift_ignores_the_representative(form, rng):
    vectors = _vectors(form, rng, 4, 8)
    witnesses = _vectors(form, rng, 4, 13)
    residual = shift_representative_residual(_path(rng, 5), _path(rng, 5), vectors, witnesses)
    assert residual <= 1e-12


def test_shift_representatives_must_share_length(rng):
    with pytest.raises(GridError):
        shift_representative_residual(_path(rng, 5), _path(rng, 4), [], [])


def test_shift_apply_prepends(rng):
    form = InnerForm()
    u = _path(rng, 3)
    v = _vectors(form, rng, 1, 4)[0]
    w = shift_apply(u, v)
    assert w.plus == concat_box(u, v.plus)
    assert w.minus == concat_box(u, v.minus)
    assert shift_apply(None, v) is v


@pytest.mark.parametrize("form", FORMS)
def test_purity_decomposition(form, rng):
    t_k = 6
    orth, span = purity_check_413(form, t_k, _pairs(rng, 4, t_k), _pairs(rng, 4, 5),
                                  _path(rng, t_k), span_pairs=_pairs(rng, 4, 11))
    assert orth <= 1e-12
    assert span <= 1e-6


def test_purity_rejects_bad_inputs(rng):
    with pytest.raises(GridError, match="filler"):
        purity_check_413(InnerForm(), 6, [], [], _path(rng, 5))
    with pytest.raises(GridError, match="longer than the cut"):
        purity_check_413(InnerForm(), 6, [], [], _path(rng, 6), span_pairs=_pairs(rng, 1, 6))


def test_coordinates_of_inner_form(rng):
    form = InnerForm()
    v1, v2 = [CenteredVector(StepPath.random(GRID, 8, 2, rng), StepPath.random(GRID, 8, 2, rng),
                             form) for _ in range(2)]
    c1 = coordinates(v1)
    np.testing.assert_allclose(c1.values, v1.plus.values - v1.minus.values)
    assert diff_inner(v1, v2) == pytest.approx(c1.inner(coordinates(v2)), abs=1e-12)
    with pytest.raises(FormError):
        coordinates(CenteredVector(_path(rng, 2), _path(rng, 2), GaussianForm()))
