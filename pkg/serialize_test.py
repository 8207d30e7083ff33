import io
import json

import numpy as np
import pytest

from pathSystems.cocycles import gamma_of_section, gamma_pipeline
from pathSystems.declog import random_section, reference_section
from pathSystems.errors import ConfigError
from pathSystems.fock import trunc_exp
from pathSystems.forms import (GammaKernelForm, GaussianForm, InnerForm, PerturbedForm,
                               PoissonForm, ZeroForm)
from pathSystems.pathspace import PathSection, StepPath, TimeGrid
from pathSystems.product import ProductVector, pvec_inner
from pathSystems.serialize import (dumps_json, family_from_json, family_to_json, fock_from_json,
                                   fock_to_json, form_from_json, form_to_json, gamma_from_json,
                                   gamma_to_json, path_from_json, path_to_json,
                                   product_from_json, product_to_json, read_gram_csv,
                                   read_path_csv, section_from_json, section_to_json,
                                   write_gram_csv, write_path_csv, write_rows_csv)

GRID = TimeGrid(1 / 16, 48)


def _through_json(data):
    return json.loads(json.dumps(data))


def test_path_json(rng):
    x = StepPath.random(GRID, 7, 2, rng)
    data = _through_json(path_to_json(x))
    assert data["d"] == 2 and data["n_max"] == 48
    y = path_from_json(data)
    assert y == x
    assert y.grid == GRID
    with pytest.raises(ConfigError, match="h="):
        path_from_json(data, TimeGrid(1 / 8, 24))
    data["d"] = 3
    with pytest.raises(ConfigError):
        path_from_json(data)


def test_bad_pairs_are_config_errors():
    with pytest.raises(ConfigError, match="pair"):
        path_from_json({"h": 0.5, "n_max": 4, "d": 1, "cells": [["x"]]})


def test_path_csv(rng):
    x = StepPath.random(GRID, 5, 2, rng)
    fp = io.StringIO()
    write_path_csv(x, fp)
    header = fp.getvalue().splitlines()[0]
    assert header == "cell,re_0,im_0,re_1,im_1"
    fp.seek(0)
    assert read_path_csv(fp, GRID) == x
    with pytest.raises(ConfigError):
        read_path_csv(io.StringIO("cell,re_0,im_0\n"), GRID)


@pytest.mark.parametrize("form", [
    InnerForm(), InnerForm(centre=[1.0, 2j]), GaussianForm(2.0), PoissonForm(0.5, 3.0),
    GammaKernelForm.from_function(lambda a, b: np.exp(-(a - b) ** 2) - 1, np.linspace(-6, 6, 25)),
    ZeroForm(),
])
def test_form_json(form, rng):
    dim = 2 if isinstance(form, InnerForm) and form.centre is not None else 1
    back = form_from_json(_through_json(form_to_json(form)))
    assert type(back) is type(form)
    x = StepPath.random(GRID, 6, dim, rng, real=True)
    y = StepPath.random(GRID, 6, dim, rng, real=True)
    assert back(x, y) == pytest.approx(form(x, y), abs=1e-15)


def test_unknown_form_kind():
    with pytest.raises(ConfigError, match="perturbed"):
        form_from_json(form_to_json(PerturbedForm(InnerForm(), lambda x, y: 0.0)))


def test_gram_csv(rng):
    G = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    fp = io.StringIO()
    write_gram_csv(G, ["a", "b", "c"], fp)
    fp.seek(0)
    back, labels = read_gram_csv(fp)
    assert labels == ["a", "b", "c"]
    np.testing.assert_array_equal(back, G)
    with pytest.raises(ConfigError):
        write_gram_csv(G, ["a", "b"], io.StringIO())


def test_cocycle_tables(rng):
    section = PathSection(GRID, StepPath.random(GRID, 48, 1, rng).values)
    G = gamma_of_section(section, K=6)
    G_back = gamma_from_json(_through_json(gamma_to_json(G)))
    assert G_back.K == 6
    np.testing.assert_array_equal(G_back.at(3, 10), G.at(3, 10))
    phi = gamma_pipeline(gamma_of_section(section)).phi
    phi_back = family_from_json(_through_json(family_to_json(phi)))
    assert phi_back.convention == phi.convention
    np.testing.assert_array_equal(phi_back.values, phi.values)


def test_fock_vector_json():
    v = trunc_exp([0.5, -1j], N=3)
    data = _through_json(fock_to_json(v))
    assert [len(e["index"]) for e in data["degrees"]] == sorted(len(e["index"]) for e in data["degrees"])
    back = fock_from_json(data)
    assert back.components == pytest.approx(v.components)
    assert back.tail == v.tail
    assert back.N == 3


def test_product_vector_json(rng):
    form = GaussianForm(0.5)
    u = ProductVector(form, [(1 + 2j, StepPath.random(GRID, 4, 1, rng, real=True)),
                             (-0.5, StepPath.random(GRID, 4, 1, rng, real=True))])
    data = _through_json(product_to_json(u))
    assert data["t"] == pytest.approx(0.25)
    back = product_from_json(data)
    assert pvec_inner(back, back) == pytest.approx(pvec_inner(u, u))


def test_section_json(rng):
    e = reference_section(GRID, [0.5, 0.25j])
    back = section_from_json(_through_json(section_to_json(e)))
    np.testing.assert_array_equal(back.profile, e.profile)
    np.testing.assert_array_equal(back.scalars, e.scalars)
    np.testing.assert_array_equal(back.eps, [0.5, 0.25j])
    x = random_section(GRID, 1, rng)
    data = _through_json(section_to_json(x))
    assert data["epsilon"] is None
    assert data["entries"][4]["t"] == pytest.approx(5 / 16)
    data["entries"].pop()
    with pytest.raises(ConfigError, match="48 entries"):
        section_from_json(data)


def test_report_json_is_sorted_and_plain():
    text = dumps_json({"b": np.float64(1.5), "a": [1 + 2j, np.arange(2)]})
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [[1.0, 2.0], [0, 1]], "b": 1.5}


def test_rows_csv_collects_all_columns():
    fp = io.StringIO()
    write_rows_csv([{"n": 1, "value": 0.5}, {"n": 2, "value": 0.25, "gap": 1j}], fp)
    lines = fp.getvalue().splitlines()
    assert lines[0] == "n,value,gap"
    assert lines[2] == "2,0.25,1j"
    empty = io.StringIO()
    write_rows_csv([], empty)
    assert empty.getvalue() == ""
