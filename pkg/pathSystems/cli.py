"""
Experiment harness.

Each subcommand runs one pipeline on seeded random input and returns a
Report; main() writes it as JSON or CSV and turns the verdict into the exit
code (0 passed, 1 violation, 2 bad input).

    python -m pathSystems.cli converge-log --t 1 --levels 10 --format csv
    python -m pathSystems.cli cocycle --demo ramp
    python -m pathSystems.cli span --counterexample
"""

import argparse
import logging
import sys
from dataclasses import dataclass, field, fields, asdict
from datetime import datetime, timezone

import numpy as np

from . import settings
from .cocycles import (LogChart, cocycle2_residual, cocycle_from_primitive, coboundary,
                       gamma_of_section, gamma_pipeline, solve_cocycle1,
                       stabilization_residual, trivialize_multiplier)
from .declog import (B_limit, DecompVector, de_normalize, le_branch, le_oracle,
                     modulus_curve, multiplicative_gauge, norm_monotone_check,
                     ineq_76_check, prop98_check, random_section, reference_section,
                     unit_normalize)
from .errors import ConfigError, PathSystemError, ResidualError
from .fock import (ExpSpanVector, diagonal_sample, diagonal_witness, pair_entire,
                   strong_span_witness, translation_residual, weyl_unitarity_residual)
from .forms import (GaussianForm, InnerForm, PoissonForm, min_eigenvalue, pd_root_check,
                    projected_gram, psd_tolerance)
from .pathspace import (DiskObstacle, PathSection, RepulsivePotential, SampledPath,
                        StepPath, TimeGrid, concat_potential, integrate_driving)
from .product import ProductVector, iso_isometry_residual, iso_multiplicativity_residual
from .serialize import dumps_json, write_rows_csv

log = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_BAD_INPUT = 2


@dataclass
class ExperimentConfig:
    command: str
    grid_step: float = settings.DEFAULT_STEP
    grid_max: int = settings.DEFAULT_NMAX
    t: float = 1.0
    dim: int = 1
    seed: int = settings.DEFAULT_SEED
    tol: float = settings.DEFAULT_TOL
    format: str = "json"
    out: str = None
    levels: int = 10
    samples: int = 20
    demo: str = None
    counterexample: bool = False
    verbose: bool = False

    def grid(self):
        return TimeGrid(self.grid_step, self.grid_max)

    def rng(self):
        return np.random.default_rng(self.seed)


@dataclass
class Report:
    """Outcome of one experiment: the tolerance used and the worst residual seen."""
    name: str
    tolerance: float
    worst: float
    passed: bool
    rows: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def to_dict(self):
        return asdict(self)


def _report(cfg, name, rows, tolerance, checks):
    """
    Args:
        checks: list of (label, value, ok) triples
    """
    violations = [f"{label}: {value:.3e}" for label, value, ok in checks if not ok]
    worst = max((float(v) for _, v, _ in checks), default=0.0)
    params = {k: v for k, v in asdict(cfg).items() if k not in ("out", "verbose", "format")}
    return Report(name, float(tolerance), worst, not violations, rows, violations, params)


def run_converge_log(cfg):
    """Partition sums for f = h = 1, eps = 0 on n equal cells of (0, t]."""
    n_top = 2 ** cfg.levels
    grid = TimeGrid(cfg.t / n_top, max(2, n_top))
    one = DecompVector(1.0, StepPath.constant(grid, n_top, np.ones(cfg.dim)))
    e = reference_section(grid, np.zeros(cfg.dim))
    _, table = B_limit(one, one, e, n_top, cfg.levels)
    rows, checks = [], []
    for r in table:
        n = r["n_cells"]
        value = r["value"]
        rows.append({"n": n, "mesh": r["mesh"], "B": value.real, "gap": r["gap"]})
        if n >= 4:
            closed = abs(value - cfg.dim * cfg.t - cfg.dim ** 2 * cfg.t ** 2 / (2 * n))
            checks.append((f"second-order term at n={n}", closed, closed <= (cfg.dim * cfg.t) ** 3 / n ** 2))
    final = table[-1]["gap"]
    checks.append(("final gap", final, final <= (cfg.dim * cfg.t) ** 2 / n_top))
    return _report(cfg, "converge-log", rows, 1e-3, checks)


def _ramp_gamma(cfg, grid):
    n = grid.n_max
    K = n // settings.HORIZON_FACTOR
    pipe = gamma_pipeline(gamma_of_section(PathSection.ramp(grid), K), cfg.tol)
    h = grid.step
    mid = grid.midpoints(n)
    u_gap = phi_gap = 0.0
    rows = []
    for t in range(1, K + 1):
        u_closed = np.where(np.arange(n) >= t, t * h, 0.0)
        u_err = float(np.max(np.abs(pipe.u.at(t)[:, 0] - u_closed)))
        phi_err = float(np.max(np.abs(pipe.phi.at(t)[:t, 0] + mid[:t])))
        u_gap, phi_gap = max(u_gap, u_err), max(phi_gap, phi_err)
        rows.append({"t": t * h, "u_gap": u_err, "phi_gap": phi_err})
    checks = [("u closed form", u_gap, u_gap <= settings.EXACT_TOL),
              ("phi closed form", phi_gap, phi_gap <= settings.EXACT_TOL),
              ("trivialization residual", pipe.residual, pipe.residual <= settings.EXACT_TOL)]
    return rows, checks


def run_cocycle(cfg):
    grid = cfg.grid()
    if cfg.demo == "ramp":
        rows, checks = _ramp_gamma(cfg, grid)
        return _report(cfg, "cocycle", rows, settings.EXACT_TOL, checks)
    if cfg.demo is not None:
        raise ConfigError(f"unknown demo {cfg.demo!r}; the cocycle demo is 'ramp'")
    rng = cfg.rng()
    n = grid.n_max
    K = n // settings.HORIZON_FACTOR
    rows, checks = [], []
    for i in range(cfg.samples):
        f = rng.normal(size=(n, cfg.dim)) + 1j * rng.normal(size=(n, cfg.dim))
        fam = cocycle_from_primitive(grid, f, K)
        g = solve_cocycle1(fam, cfg.tol, anchor=f[0])
        err = float(np.max(np.abs(g - f[:g.shape[0]])))
        rows.append({"sample": i, "residual": err})
        checks.append((f"recovery of sample {i}", err, err <= cfg.tol * max(1.0, float(np.max(np.abs(f))))))
    return _report(cfg, "cocycle", rows, cfg.tol, checks)


def run_gamma(cfg):
    """Gamma trivialization for a random left-coherent section."""
    grid = cfg.grid()
    rng = cfg.rng()
    n = grid.n_max
    K = n // settings.HORIZON_FACTOR
    section = PathSection(grid, StepPath.random(grid, n, cfg.dim, rng, scale=0.5).values)
    G = gamma_of_section(section, K)
    res2 = cocycle2_residual(G)
    stab = stabilization_residual(G)
    pipe = gamma_pipeline(G, cfg.tol)
    scale = G.scale()
    rows = [{"check": "cocycle", "residual": res2},
            {"check": "stabilization", "residual": stab},
            {"check": "trivialization", "residual": pipe.residual}]
    checks = [(r["check"], r["residual"], r["residual"] <= cfg.tol * scale) for r in rows]
    return _report(cfg, "gamma", rows, cfg.tol, checks)


def run_multiplier(cfg):
    grid = cfg.grid()
    rng = cfg.rng()
    K = grid.n_max // settings.HORIZON_FACTOR
    h = grid.step
    rows, checks = [], []
    for i in range(cfg.samples):
        u = np.exp(1j * rng.uniform(-np.pi, np.pi, size=K))
        c0 = coboundary(u)
        w = trivialize_multiplier(c0, cfg.tol)
        err = float(np.max(np.abs(coboundary(w) - c0)))
        rows.append({"case": f"coboundary {i}", "residual": err})
        checks.append((f"coboundary {i}", err, err <= settings.EXACT_TOL * K))

    ts = h * np.arange(1, K + 1)
    c0 = np.exp(1j * np.outer(ts, ts))
    w = trivialize_multiplier(c0, cfg.tol)
    ratio = w / np.exp(-0.5j * ts ** 2)
    character = float(np.max(np.abs(ratio - ratio[0] ** np.arange(1, K + 1))))
    rows.append({"case": "exp(i s t)", "residual": character})
    checks.append(("character gap for exp(i s t)", character, character <= settings.EXACT_TOL * K))
    return _report(cfg, "multiplier", rows, settings.EXACT_TOL, checks)


def _real_samples(grid, t_k, n, rng):
    return [StepPath.random(grid, t_k, 1, rng, real=True) for _ in range(n)]


def run_cpd(cfg):
    grid = cfg.grid()
    rng = cfg.rng()
    t_k = grid.index(cfg.t)
    samples = _real_samples(grid, t_k, cfg.samples, rng)
    rows, checks = [], []
    for form in (GaussianForm(1.0), PoissonForm(1.0, 1.0), InnerForm()):
        P = projected_gram(form, samples)
        value = min_eigenvalue(P)
        tol = psd_tolerance(P)
        rows.append({"form": form.kind, "min_eig": value, "tolerance": tol})
        checks.append((f"{form.kind} projected eigenvalue", -value, value >= -tol))
    return _report(cfg, "cpd", rows, settings.EIG_TOL, checks)


def run_pd_root(cfg):
    grid = cfg.grid()
    rng = cfg.rng()
    t_k = grid.index(cfg.t)
    samples = _real_samples(grid, t_k, cfg.samples, rng)
    rows, checks = [], []
    for form in (GaussianForm(1.0), PoissonForm(1.0, 1.0)):
        for n in (1, 2, 4, 8):
            value = pd_root_check(form, samples, roots=(n,))
            rows.append({"form": form.kind, "root": n, "min_eig": value})
            checks.append((f"{form.kind} root {n}", -value, value >= -settings.EIG_TOL * len(samples)))
    return _report(cfg, "pd-root", rows, settings.EIG_TOL, checks)


def run_span(cfg):
    rng = cfg.rng()
    if cfg.counterexample:
        zeta = diagonal_witness()
        witness = strong_span_witness(diagonal_sample(rng), zeta)
        control = abs(pair_entire(zeta, np.array([1.0, 0.0])))
        rows = [{"quantity": "witness", "value": witness},
                {"quantity": "control", "value": control}]
        gap = abs(control - 2 ** -0.5)
        checks = [("witness", witness, witness <= settings.EXACT_TOL),
                  ("control gap", gap, gap <= settings.EXACT_TOL)]
        return _report(cfg, "span", rows, settings.EXACT_TOL, checks)
    grid = cfg.grid()
    t_k = grid.index(cfg.t)

    def path():
        return StepPath.random(grid, t_k, cfg.dim, rng, scale=0.5)

    rows, checks = [], []
    for i in range(cfg.samples):
        zeta = path()
        unitary = weyl_unitarity_residual(zeta, [path(), path()])
        target = ExpSpanVector([(1.0, path()), (0.5j, path())])
        moved = translation_residual(target, zeta, [path() for _ in range(3)])
        rows.append({"sample": i, "weyl": unitary, "translation": moved})
        checks.append((f"Weyl unitarity {i}", unitary, unitary <= settings.EXACT_TOL))
        checks.append((f"translation {i}", moved, moved <= settings.EXACT_TOL))
    return _report(cfg, "span", rows, settings.EXACT_TOL, checks)


def _references(grid, dim):
    n = grid.n_max
    return {"constant": PathSection.constant(grid, np.ones(dim)),
            "vacuum": PathSection.constant(grid, np.zeros(dim)),
            "ramp": PathSection(grid, np.tile(grid.midpoints(n)[:, None], (1, dim)))}


def run_iso(cfg):
    grid = cfg.grid()
    rng = cfg.rng()
    K = grid.n_max // settings.HORIZON_FACTOR
    s_k = max(1, K // 3)
    t_k = max(1, K - s_k - 1)
    form = InnerForm()

    def vec(k):
        return ProductVector(form, [(rng.normal() + 1j * rng.normal(), StepPath.random(grid, k, cfg.dim, rng, 0.3))
                                    for _ in range(2)])

    rows, checks = [], []
    for name, section in _references(grid, cfg.dim).items():
        chart = LogChart.for_section(form, section, K, cfg.tol)
        vectors = [vec(s_k) for _ in range(4)]
        pairs = [(vec(s_k), vec(t_k)) for _ in range(3)]
        witnesses = [ExpSpanVector.single(StepPath.random(grid, s_k + t_k, cfg.dim, rng, 0.3)) for _ in range(3)]
        iso = iso_isometry_residual(chart, vectors)
        mult = iso_multiplicativity_residual(chart, pairs, witnesses)
        rows.append({"reference": name, "isometry": iso, "multiplicativity": mult})
        checks.append((f"{name} isometry", iso, iso <= settings.EXACT_TOL))
        checks.append((f"{name} multiplicativity", mult, mult <= settings.EXACT_TOL))
    return _report(cfg, "iso", rows, settings.EXACT_TOL, checks)


def _de_pair(grid, dim, rng, e):
    x = de_normalize(random_section(grid, dim, rng, scale=0.5), e)
    y = de_normalize(random_section(grid, dim, rng, scale=0.5), e)
    return x, y


def run_ineq(cfg):
    grid = cfg.grid()
    rng = cfg.rng()
    n = grid.n_max
    eps = 0.5 * (rng.normal(size=cfg.dim) + 1j * rng.normal(size=cfg.dim))
    e = reference_section(grid, eps)
    rows, checks = [], []
    for i in range(cfg.samples):
        x, y = _de_pair(grid, cfg.dim, rng, e)
        s_k, t_k, T_k = np.sort(rng.choice(np.arange(1, n + 1), size=3, replace=False))
        slack = ineq_76_check(x, y, e, int(s_k), int(t_k), int(T_k))
        decrease, _ = norm_monotone_check(x, e)
        p98 = prop98_check(x, y, e, int(s_k), int(t_k))
        rows.append({"sample": i, "s": s_k * grid.step, "t": t_k * grid.step, "T": T_k * grid.step,
                     "slack": slack, "monotone_decrease": decrease, "estimate_slack": p98})
        checks.append((f"inequality slack {i}", -slack, slack >= -settings.EXACT_TOL))
        checks.append((f"norm decrease {i}", decrease, decrease <= settings.EXACT_TOL))
        checks.append((f"estimate slack {i}", -p98, p98 >= -settings.EXACT_TOL))
    return _report(cfg, "ineq", rows, settings.EXACT_TOL, checks)


def run_modulus(cfg):
    grid = cfg.grid()
    rng = cfg.rng()
    rows, checks = [], []
    for i in range(cfg.samples):
        x = unit_normalize(random_section(grid, cfg.dim, rng, scale=0.5))
        y = unit_normalize(random_section(grid, cfg.dim, rng, scale=0.5))
        gaps = []
        for level in range(3):
            curve = modulus_curve(x, y)
            gaps.append(curve.first_gap)
            if level == 0:
                checks.append((f"monotonicity {i}", curve.max_increase,
                               curve.max_increase <= settings.EXACT_TOL))
            x, y = unit_normalize(x.refine()), unit_normalize(y.refine())
        rows.append({"sample": i, "gap_h": gaps[0], "gap_h2": gaps[1], "gap_h4": gaps[2]})
        shrink = max(gaps[1] - gaps[0], gaps[2] - gaps[1])
        checks.append((f"first-sample refinement {i}", shrink, shrink <= settings.EXACT_TOL))
    return _report(cfg, "modulus", rows, settings.EXACT_TOL, checks)


def _driven_path(step, t, potential, phase):
    n = int(round(t / step))
    lam = step * np.arange(n + 1)
    phi = 0.8 * np.column_stack([np.cos(lam + phase), np.sin(lam + phase)])
    return integrate_driving(SampledPath(step, phi), potential)


def run_demo_obstacle(cfg):
    """Concatenation through driving functions near a disk obstacle, at h and h/2."""
    potential = RepulsivePotential((DiskObstacle((3.0, 0.0), 1.0),))
    rows, checks = [], []
    for step in (cfg.grid_step, cfg.grid_step / 2):
        f = _driven_path(step, cfg.t, potential, 0.0)
        g = _driven_path(step, cfg.t, potential, 1.0)
        fg = concat_potential(f, g)
        dev = float(np.max(np.abs(fg.points[:f.n_steps + 1] - f.points)))
        rows.append({"h": step, "prefix_deviation": dev, "end_x": fg.points[-1, 0],
                     "end_y": fg.points[-1, 1], "min_distance": min(potential.distance(p) for p in fg.points)})
        checks.append((f"prefix deviation at h={step:g}", dev, dev <= max(settings.EXACT_TOL, step)))
    return _report(cfg, "demo-obstacle", rows, cfg.grid_step, checks)


def run_gauge(cfg):
    grid = cfg.grid()
    rng = cfg.rng()
    K = grid.n_max // settings.HORIZON_FACTOR
    profile = np.tile(grid.midpoints(grid.n_max)[:, None], (1, cfg.dim)) * (1 + 0.5j)
    e = reference_section(grid, profile)
    samples = [DecompVector(rng.normal() + 1j * rng.normal(),
                            StepPath.random(grid, int(k), cfg.dim, rng, 0.3))
               for k in rng.integers(1, K // 2 + 1, size=cfg.samples)]
    report = multiplicative_gauge(e, samples, K, cfg.tol)
    names = ("unimodularity", "constancy", "multiplier", "multiplicativity", "isometry", "covariance")
    rows = [{"check": name, "residual": getattr(report, name)} for name in names]
    checks = [(r["check"], r["residual"], r["residual"] <= settings.EIG_TOL) for r in rows]
    return _report(cfg, "gauge", rows, settings.EIG_TOL, checks)


def run_agree(cfg):
    """Branch-tracked logarithm, dyadic partition limit and closed form on random pairs."""
    grid = cfg.grid()
    rng = cfg.rng()
    t_k = grid.index(cfg.t)
    levels = min(cfg.levels, (t_k & -t_k).bit_length() - 1)
    eps = 0.3 * (rng.normal(size=cfg.dim) + 1j * rng.normal(size=cfg.dim))
    e = reference_section(grid, eps)
    rows, checks = [], []
    for i in range(cfg.samples):
        x = DecompVector(1.0, StepPath.random_smooth(grid, t_k, cfg.dim, rng, 0.3))
        y = DecompVector(1.0, StepPath.random_smooth(grid, t_k, cfg.dim, rng, 0.3))
        oracle = le_oracle(x, y, e, t_k)
        branch = le_branch(x, y, e, t_k)
        limit, table = B_limit(x, y, e, t_k, levels)
        eps_cells = e.profile[:t_k]
        norm = np.sqrt(grid.step * np.sum(np.abs(x.path.values - eps_cells) ** 2)
                       * grid.step * np.sum(np.abs(y.path.values - eps_cells) ** 2))
        bound = max(1e-10, 2 * table[-1]["mesh"] * norm)
        rows.append({"sample": i, "oracle": oracle, "branch": branch, "limit": limit, "bound": bound})
        checks.append((f"branch vs closed form {i}", abs(branch - oracle), abs(branch - oracle) <= 1e-10))
        checks.append((f"limit vs closed form {i}", abs(limit - oracle), abs(limit - oracle) <= bound))
        checks.append((f"limit vs branch {i}", abs(limit - branch), abs(limit - branch) <= bound))
    return _report(cfg, "agree", rows, 1e-10, checks)


COMMANDS = {
    "converge-log": run_converge_log,
    "cocycle": run_cocycle,
    "gamma": run_gamma,
    "multiplier": run_multiplier,
    "cpd": run_cpd,
    "pd-root": run_pd_root,
    "span": run_span,
    "iso": run_iso,
    "ineq": run_ineq,
    "modulus": run_modulus,
    "demo-obstacle": run_demo_obstacle,
    "gauge": run_gauge,
    "agree": run_agree,
}


def build_parser():
    p = argparse.ArgumentParser(prog="pathSystems",
                                description="Path-space and product-system experiments")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=(fn.__doc__ or "").strip().split("\n")[0] or None)
        # None means "not given" so config-file values can fill in
        sp.add_argument("--grid-step", type=float, default=None)
        sp.add_argument("--grid-max", type=int, default=None)
        sp.add_argument("--t", type=float, default=None)
        sp.add_argument("--dim", type=int, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--format", choices=["json", "csv"], default=None)
        sp.add_argument("--out", type=str, default=None)
        sp.add_argument("--levels", type=int, default=None)
        sp.add_argument("--samples", type=int, default=None)
        sp.add_argument("--demo", type=str, default=None)
        sp.add_argument("--counterexample", action="store_true", default=None)
        sp.add_argument("--verbose", action="store_true", default=None)
        sp.add_argument("--config", type=str, default=None)
    return p


def config_from_args(argv=None):
    """Defaults, then the config file, then the command-line flags."""
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        values.update(settings.load_config(args.config))
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key, val in vars(args).items():
        if key in known and val is not None:
            values[key] = val
    values["command"] = args.command
    return ExperimentConfig(**values)


def _validate(cfg):
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown subcommand {cfg.command!r}")
    if cfg.format not in ("json", "csv"):
        raise ConfigError(f"unknown format {cfg.format!r}")
    for name, kind in (("grid_step", float), ("t", float), ("tol", float), ("grid_max", int),
                       ("dim", int), ("samples", int), ("levels", int), ("seed", int)):
        value = getattr(cfg, name)
        allowed = (int, float) if kind is float else int
        if isinstance(value, bool) or not isinstance(value, allowed):
            raise ConfigError(f"{name.replace('_', '-')} must be {kind.__name__}, got {value!r}")
    for name in ("grid_max", "dim", "samples"):
        if getattr(cfg, name) < 1:
            raise ConfigError(f"--{name.replace('_', '-')} must be positive")
    if cfg.levels < 0:
        raise ConfigError("--levels must be >= 0")
    if not cfg.tol > 0:
        raise ConfigError("--tol must be positive")


def write_report(report, cfg, stream=None):
    if cfg.out is None:
        stream = sys.stdout if stream is None else stream
        _emit(report, cfg.format, stream)
        return
    with open(cfg.out, "w", encoding="utf-8", newline="") as fp:
        _emit(report, cfg.format, fp)
    log.info("report written to %s", cfg.out)


def _emit(report, fmt, fp):
    if fmt == "csv":
        write_rows_csv(report.rows, fp)
    else:
        fp.write(dumps_json(report.to_dict()) + "\n")


def run(cfg, stream=None):
    """
    Run one experiment and write its report.

    Returns:
        (Report, int): the report and the exit code
    """
    _validate(cfg)
    log.info("running %s (seed %d)", cfg.command, cfg.seed)
    report = COMMANDS[cfg.command](cfg)
    write_report(report, cfg, stream)
    if report.passed:
        log.info("%s passed, worst residual %.3e", cfg.command, report.worst)
        return report, EXIT_PASS
    for v in report.violations:
        log.warning("violation: %s", v)
    return report, EXIT_VIOLATION


def main(argv=None):
    try:
        cfg = config_from_args(argv)
    except PathSystemError as e:
        logging.basicConfig(level=logging.INFO)
        log.error("%s", e)
        return EXIT_BAD_INPUT
    logging.basicConfig(level=logging.DEBUG if cfg.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        _, code = run(cfg)
    except ResidualError as e:
        log.error("invariant violated: %s", e)
        return EXIT_VIOLATION
    except ValueError as e:
        log.error("bad input: %s", e)
        return EXIT_BAD_INPUT
    return code


if __name__ == "__main__":
    sys.exit(main())
