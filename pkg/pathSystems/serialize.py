"""
JSON and CSV formats for paths, forms, Gram matrices, cocycle families,
Fock vectors, product vectors, sections and convergence tables.

Complex numbers are written as [re, im] pairs.  Readers accept what the
writers produce; they raise ConfigError on anything else.
"""

import csv
import json
import logging

import numpy as np

from .cocycles import CocycleFamily, GammaTable
from .declog import CoherentSection
from .errors import ConfigError
from .fock import TruncFockVector
from .forms import GammaKernelForm, GaussianForm, InnerForm, PoissonForm, ZeroForm
from .pathspace import StepPath, TimeGrid
from .product import ProductVector

log = logging.getLogger(__name__)


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


def _unpair(p):
    try:
        re, im = p
    except (TypeError, ValueError) as e:
        raise ConfigError(f"expected an [re, im] pair, got {p!r}") from e
    return complex(float(re), float(im))


def _pairs(a):
    return [[_pair(z) for z in row] for row in np.asarray(a, dtype=complex)]


def _unpairs(rows):
    return np.array([[_unpair(p) for p in row] for row in rows], dtype=complex)


def _grid_json(grid):
    return {"h": grid.step, "n_max": grid.n_max}


def _grid_from(data):
    try:
        return TimeGrid(float(data["h"]), int(data["n_max"]))
    except KeyError as e:
        raise ConfigError(f"grid description lacks {e}") from e


# Paths

def path_to_json(x):
    return {"h": x.grid.step, "n_max": x.grid.n_max, "d": x.dim, "cells": _pairs(x.values)}


def path_from_json(data, grid=None):
    """
    Args:
        data: dict written by path_to_json
        grid: TimeGrid to attach; built from h and n_max when omitted
    """
    cells = _unpairs(data["cells"])
    if cells.ndim != 2 or cells.shape[1] != int(data["d"]):
        raise ConfigError(f"path cells do not match d={data['d']}")
    if grid is None:
        grid = TimeGrid(float(data["h"]), int(data.get("n_max", max(2, cells.shape[0]))))
    elif grid.step != float(data["h"]):
        raise ConfigError(f"path was written on h={data['h']}, grid has h={grid.step}")
    return StepPath(grid, cells)


def write_path_csv(x, fp):
    """One row per cell: index, then re/im per component."""
    names = ["cell"] + [f"{part}_{j}" for j in range(x.dim) for part in ("re", "im")]
    writer = csv.DictWriter(fp, fieldnames=names, lineterminator="\n")
    writer.writeheader()
    for k, row in enumerate(x.values, start=1):
        rec = {"cell": k}
        for j, z in enumerate(row):
            rec[f"re_{j}"] = repr(float(z.real))
            rec[f"im_{j}"] = repr(float(z.imag))
        writer.writerow(rec)


def read_path_csv(fp, grid):
    reader = csv.DictReader(fp)
    dim = sum(1 for name in reader.fieldnames if name.startswith("re_"))
    rows = []
    for rec in reader:
        rows.append([complex(float(rec[f"re_{j}"]), float(rec[f"im_{j}"])) for j in range(dim)])
    if not rows:
        raise ConfigError("path CSV has no cells")
    return StepPath(grid, np.array(rows, dtype=complex))


# Forms

def form_to_json(form):
    return form.describe()


def form_from_json(data):
    kind = data.get("kind")
    params = data.get("params", {})
    if kind == "inner":
        if "centre" not in params:
            return InnerForm()
        centre = np.array([_unpair(p) for p in params["centre"]]).reshape(params["centre_shape"])
        return InnerForm(centre=centre)
    if kind == "gaussian":
        return GaussianForm(params["c"])
    if kind == "poisson":
        return PoissonForm(params["c"], params["h0"])
    if kind == "gamma":
        return GammaKernelForm(params["nodes"], _unpairs(params["table"]))
    if kind == "zero":
        return ZeroForm()
    raise ConfigError(f"unknown or non-serializable form kind {kind!r}")


# Gram matrices

def write_gram_csv(G, labels, fp):
    """Header row of labels; each row a label then re+imj entries."""
    G = np.asarray(G, dtype=complex)
    if G.shape != (len(labels), len(labels)):
        raise ConfigError(f"{len(labels)} labels for a {G.shape} Gram matrix")
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow([""] + list(labels))
    for label, row in zip(labels, G):
        writer.writerow([label] + [repr(complex(z)) for z in row])


def read_gram_csv(fp):
    reader = csv.reader(fp)
    header = next(reader)
    labels = header[1:]
    rows = [[complex(v.strip("()")) for v in rec[1:]] for rec in reader]
    return np.array(rows, dtype=complex), labels


# Cocycle families and Gamma tables

def family_to_json(fam):
    return {"grid": _grid_json(fam.grid), "convention": fam.convention,
            "values": [_pairs(v) for v in fam.values]}


def family_from_json(data):
    values = np.array([_unpairs(v) for v in data["values"]])
    return CocycleFamily(_grid_from(data["grid"]), values, data["convention"])


def gamma_to_json(G):
    return {"grid": _grid_json(G.grid), "rows": [[_pairs(a) for a in r] for r in G.rows]}


def gamma_from_json(data):
    rows = [np.array([_unpairs(a) for a in r]) for r in data["rows"]]
    return GammaTable(_grid_from(data["grid"]), rows)


# Reports and convergence tables

def _plain(v):
    if isinstance(v, (complex, np.complexfloating)):
        return _pair(v)
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return [_plain(z) for z in v.tolist()]
    if isinstance(v, dict):
        return {k: _plain(z) for k, z in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(z) for z in v]
    return v


def _csv_cell(v):
    if isinstance(v, (complex, np.complexfloating)):
        return repr(complex(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def write_rows_csv(rows, fp):
    """Residual and convergence rows, one dict per row."""
    if not rows:
        fp.write("")
        return
    names = list(rows[0].keys())
    for r in rows[1:]:
        names.extend(k for k in r if k not in names)
    writer = csv.DictWriter(fp, fieldnames=names, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: _csv_cell(v) for k, v in r.items()})


def dumps_json(data):
    return json.dumps(_plain(data), indent=2, sort_keys=True)


# Fock and product vectors

def fock_to_json(v):
    return {"d": v.dim, "N": v.N, "tail": v.tail,
            "degrees": [{"index": list(k), "re": c.real, "im": c.imag}
                        for k, c in sorted(v.components.items(), key=lambda kv: (len(kv[0]), kv[0]))]}


def fock_from_json(data):
    comps = {tuple(e["index"]): complex(e["re"], e["im"]) for e in data["degrees"]}
    return TruncFockVector(data["d"], data["N"], comps, data.get("tail", 0.0))


def product_to_json(u):
    return {"t": u.terms[0][1].length, "form": form_to_json(u.form),
            "terms": [{"lambda": _pair(c), "path": path_to_json(x)} for c, x in u.terms]}


def product_from_json(data, grid=None):
    form = form_from_json(data["form"])
    terms = [(_unpair(e["lambda"]), path_from_json(e["path"], grid)) for e in data["terms"]]
    if grid is None and terms:
        grid = terms[0][1].grid
        terms = [(c, StepPath(grid, x.values)) for c, x in terms]
    return ProductVector(form, terms)


# Sections

def section_to_json(x):
    eps = None if x.eps is None else _plain(np.asarray(x.eps, dtype=complex))
    return {"grid": _grid_json(x.grid), "epsilon": eps,
            "entries": [{"t": x.grid.time(k), "lambda": _pair(x.scalars[k - 1]),
                         "path": _pairs(x.profile[k - 1:k])[0]}
                        for k in range(1, x.n_max + 1)]}


def section_from_json(data):
    """Entries carry the scalar and the newest cell of each section value."""
    grid = _grid_from(data["grid"])
    entries = data["entries"]
    if len(entries) != grid.n_max:
        raise ConfigError(f"section needs {grid.n_max} entries, got {len(entries)}")
    profile = np.array([[_unpair(p) for p in e["path"]] for e in entries], dtype=complex)
    scalars = np.array([_unpair(e["lambda"]) for e in entries])
    eps = data.get("epsilon")
    if eps is not None:
        arr = np.asarray(eps, dtype=float)
        eps = arr[..., 0] + 1j * arr[..., 1]
    return CoherentSection(grid, profile, scalars, eps)
