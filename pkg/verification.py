"""Acceptance experiments; each returns ReportRows and never raises on a failed inequality."""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.special import gammaln

from amalgam import AmalgamSpec, continuous_norm, equivalence_report, retraction_check, window_independence
from duality_interp import duality_bound_check, interpolation_convexity, modulation_vs_amalgam
from field import GaussianForm, Grid, SampledField, gaussian, lemma22_decay_check
from gevrey import GevreySequence, assoc_values, check_assoc_inequalities
from local_norms import modulation_certificate_check, translation_certificate_check
from report_writer import ReportRow
from spaces import FourierLebesgue, WeightedC0, WeightedLp
from ucpu import PointSet, build_lattice_ucpu, check_condition4, lemma39_tail_radius, tail_sums
from weights import ConstantWeight, PolynomialWeight

logger = logging.getLogger("Verify")

DEFAULT_TOLERANCES = {
    "partition": 1e-10,
    "gaussian_oracle": 1e-7,
    "equivalence_spread": 10.0,
    "grid_refinement": 0.05,
    "lattice_refinement": 0.25,
    "window_spread": 10.0,
    "retraction": 1e-8,
    "duality": 1e-7,
    "interpolation": 1e-12,
    "modulation": 1e-6,
    "assoc_match": 1e-12,
    "assoc_inequality": 1e-12,
}


# log-spaced coordinates of the (rho, lambda) samples for the associated-function inequalities
ASSOC_SAMPLE_AXIS = np.logspace(-2, 3, 20)


def parallel_map(func: Callable, items: Sequence, jobs: int = 1) -> list:
    """func over items in submission order; threads, so results never depend on the job count."""
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    return Parallel(n_jobs=jobs, prefer="threads")(delayed(func)(item) for item in items)


@dataclass
class VerifyContext:
    grid: Grid = field(default_factory=Grid)
    sigma: float = 1.0
    a: float = 1.0
    s: float = 1.0
    L_pts: float = 12.0
    outer_margin: float = 4.0
    seed: int = 7
    jobs: int = 1
    trials_duality: int = 200
    trials_interp: int = 500
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    @classmethod
    def from_settings(cls, settings: dict, seed: int = None, jobs: int = 1) -> "VerifyContext":
        grid = settings.get("grid", {}) or {}
        ucpu = settings.get("ucpu", {}) or {}
        verify = settings.get("verify", {}) or {}
        tolerances = dict(DEFAULT_TOLERANCES)
        tolerances.update({k: float(v) for k, v in (settings.get("tolerances", {}) or {}).items()})
        return cls(
            grid=Grid(L=float(grid.get("L", 16.0)), delta=float(grid.get("delta", 0.0625))),
            sigma=float((settings.get("sequence", {}) or {}).get("sigma", 1.0)),
            a=float(ucpu.get("a", 1.0)),
            s=float(ucpu.get("s", 1.0)),
            L_pts=float(ucpu.get("L_pts", 12.0)),
            outer_margin=float((settings.get("amalgam", {}) or {}).get("outer_margin", 4.0)),
            seed=int(verify.get("seed", 7)) if seed is None else seed,
            jobs=jobs,
            trials_duality=int(verify.get("trials_duality", 200)),
            trials_interp=int(verify.get("trials_interp", 500)),
            tolerances=tolerances,
        )

    def tol(self, name: str) -> float:
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name])

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))


def gauss9(grid: Grid) -> List[SampledField]:
    """Translated/modulated unit Gaussians, x0 in {-2, 0, 2}, xi0 in {-1, 0, 1}."""
    return [gaussian(grid, x0, xi0) for x0 in (-2.0, 0.0, 2.0) for xi0 in (-1.0, 0.0, 1.0)]


def _error_row(experiment: str, operation: str, value: float, oracle: float, tol: float, **params) -> ReportRow:
    return ReportRow(experiment, operation, value, -abs(value - oracle), tol, params)


def verify_gaussian_oracle(ctx: VerifyContext) -> List[ReportRow]:
    g = gaussian(ctx.grid)
    rows = []
    for p, oracle in ((1.0, 1.0), (2.0, 2.0 ** -0.5)):
        spec = AmalgamSpec(E=WeightedLp(2.0), p=p, chi=g, outer_margin=ctx.outer_margin)
        value = continuous_norm(g, spec).value
        rows.append(_error_row("gaussian", f"W(L2,L{p:g})", value, oracle, ctx.tol("gaussian_oracle"), p=p))
    return rows


def verify_partition(ctx: VerifyContext) -> List[ReportRow]:
    u = build_lattice_ucpu(ctx.a, ctx.s, ctx.L_pts, ctx.grid)
    report = check_condition4(u)
    return [ReportRow("partition", "condition4", report.max_deviation, -report.max_deviation,
                      ctx.tol("partition"), {"a": ctx.a, "s": ctx.s, "core": report.core})]


def _spread(grid: Grid, a: float, ctx: VerifyContext, p: float, eta) -> float:
    u = build_lattice_ucpu(a, ctx.s, ctx.L_pts, grid)
    spec = AmalgamSpec(E=WeightedLp(2.0), p=p, eta=eta, chi=gaussian(grid), outer_margin=ctx.outer_margin)
    return equivalence_report(gauss9(grid), spec, u).spread


def verify_equivalence(ctx: VerifyContext) -> List[ReportRow]:
    cases = [(p, eta) for p in (1.0, 2.0, math.inf) for eta in (ConstantWeight(), PolynomialWeight(1.0))]

    def run(case):
        p, eta = case
        base = _spread(ctx.grid, ctx.a, ctx, p, eta)
        fine = _spread(ctx.grid.refined(), ctx.a, ctx, p, eta)
        lattice = _spread(ctx.grid, ctx.a / 2.0, ctx, p, eta)
        params = {"p": p, "weight": eta.literal()}
        return [
            ReportRow("equivalence", "spread", base, ctx.tol("equivalence_spread") - base, 0.0, params),
            ReportRow("equivalence", "grid_refinement", abs(fine / base - 1.0),
                      ctx.tol("grid_refinement") - abs(fine / base - 1.0), 0.0, params),
            ReportRow("equivalence", "lattice_refinement", abs(lattice / base - 1.0),
                      ctx.tol("lattice_refinement") - abs(lattice / base - 1.0), 0.0, params),
        ]

    return [row for rows in parallel_map(run, cases, ctx.jobs) for row in rows]


def _window_spread(grid: Grid, ctx: VerifyContext, eta) -> float:
    spec = AmalgamSpec(E=WeightedLp(2.0), p=2.0, eta=eta, outer_margin=ctx.outer_margin)
    return window_independence(gauss9(grid), gaussian(grid, a=1.0), gaussian(grid, a=4.0), spec).spread


def verify_window(ctx: VerifyContext) -> List[ReportRow]:
    rows = []
    for eta in (ConstantWeight(), PolynomialWeight(1.0)):
        base = _window_spread(ctx.grid, ctx, eta)
        fine = _window_spread(ctx.grid.refined(), ctx, eta)
        params = {"weight": eta.literal()}
        change = abs(fine / base - 1.0)
        rows.append(ReportRow("window", "spread", base, ctx.tol("window_spread") - base, 0.0, params))
        rows.append(ReportRow("window", "grid_refinement", change, ctx.tol("grid_refinement") - change, 0.0, params))
    return rows


def verify_retraction(ctx: VerifyContext) -> List[ReportRow]:
    u = build_lattice_ucpu(ctx.a, ctx.s, ctx.L_pts, ctx.grid)
    rows = []
    for i, f in enumerate(gauss9(ctx.grid)):
        report = retraction_check(f, u)
        rows.append(ReportRow("retraction", "P(I(f)) - f", report.rel_error, -report.rel_error,
                              ctx.tol("retraction"), {"f": i, "core": report.core}))
    return rows


def _random_gaussian(rng: np.random.Generator, grid: Grid) -> SampledField:
    x0, xi0 = rng.uniform(-2.0, 2.0, size=2)
    a = rng.uniform(0.5, 2.0)
    return SampledField.from_form(grid, GaussianForm(shift=float(x0), mod=float(xi0), a=float(a)))


def verify_duality(ctx: VerifyContext) -> List[ReportRow]:
    rng = ctx.rng()
    ps = (1.0, 2.0, 4.0)
    # draws happen up front so the parallel part sees a fixed sequence
    trials = [(ps[i % 3], _random_gaussian(rng, ctx.grid), _random_gaussian(rng, ctx.grid))
              for i in range(ctx.trials_duality)]
    chi0 = gaussian(ctx.grid)

    def run(trial):
        p, f, phi = trial
        E = WeightedLp(p)
        return duality_bound_check(f, phi, chi0, E, E.holder_dual(), p, outer_margin=ctx.outer_margin).slack

    slacks = np.array(parallel_map(run, trials, ctx.jobs))
    rows = []
    for p in ps:
        sel = np.array([t[0] == p for t in trials])
        worst = float(np.min(slacks[sel])) if np.any(sel) else 0.0
        rows.append(ReportRow("duality", "pairing_bound", worst, worst, ctx.tol("duality"),
                              {"p": p, "trials": int(np.sum(sel)), "seed": ctx.seed}))

    E = WeightedLp(2.0)
    sharp = duality_bound_check(chi0, chi0, chi0, E, E.holder_dual(), 2.0, outer_margin=ctx.outer_margin)
    rows.append(ReportRow("duality", "sharpness", sharp.slack, -abs(sharp.slack), ctx.tol("duality"), {"p": 2.0}))
    return rows


def verify_interpolation(ctx: VerifyContext) -> List[ReportRow]:
    rng = ctx.rng()
    exponents = (1.0, 1.5, 2.0, 3.0, 4.0, math.inf)
    eta0, eta1 = ConstantWeight(), PolynomialWeight(1.0)
    worst = math.inf
    for _ in range(ctx.trials_interp):
        n = int(rng.integers(1, 9))
        points = rng.choice(np.arange(-10, 11), size=n, replace=False).astype(float)
        c = rng.normal(size=n) + 1j * rng.normal(size=n)
        p0, p1 = rng.choice(exponents, size=2)
        theta = float(rng.uniform(0.05, 0.95))
        report = interpolation_convexity(c, points, float(p0), float(p1), eta0, eta1, theta)
        worst = min(worst, report.slack)
    tol = ctx.tol("interpolation")
    rows = [ReportRow("interpolation", "convexity", worst, worst, tol,
                      {"trials": ctx.trials_interp, "seed": ctx.seed})]

    pair = interpolation_convexity([1.0, 1.0], [0.0, 1.0], 1.0, math.inf, eta0, eta0, 0.5)
    rows.append(ReportRow("interpolation", "equality_pair", pair.lhs, -abs(pair.slack), tol, {"p_theta": pair.p_theta}))
    single = interpolation_convexity([3.0], [2.0], 1.0, 4.0, eta0, eta1, 0.3)
    rows.append(ReportRow("interpolation", "equality_single", single.lhs, -abs(single.slack), tol,
                          {"p_theta": single.p_theta}))
    return rows


def verify_modulation(ctx: VerifyContext) -> List[ReportRow]:
    g = gaussian(ctx.grid)
    rows = []
    for p in (1.0, 2.0):
        for q in (1.0, 2.0):
            report = modulation_vs_amalgam(g, g, p, q, outer_margin=ctx.outer_margin)
            err = abs(report.ratio - 1.0)
            rows.append(ReportRow("modulation", "stft_vs_amalgam", report.ratio, -err, ctx.tol("modulation"),
                                  {"p": p, "q_inner": q}))
    return rows


def verify_certificates(ctx: VerifyContext) -> List[ReportRow]:
    """Empirical translation and modulation growth of stock local spaces against their certificates."""
    family = [gaussian(ctx.grid), gaussian(ctx.grid, 1.0, 0.5, 2.0)]
    spaces = [
        WeightedLp(2.0),
        WeightedLp(1.0, PolynomialWeight(1.0)),
        WeightedC0(PolynomialWeight(1.0)),
        FourierLebesgue(),
        FourierLebesgue(1.0, PolynomialWeight(1.0)),
    ]
    xs = np.linspace(-8.0, 8.0, 33)
    xis = np.linspace(-4.0, 4.0, 17)
    rows = []
    for E in spaces:
        for label, report in (
            ("omega", translation_certificate_check(E, xs, family)),
            ("nu", modulation_certificate_check(E, xis, family)),
        ):
            worst = max(r for _, r, _ in report.rows)
            top = max(b for _, _, b in report.rows)
            rows.append(ReportRow("certificates", label, worst, report.min_slack, 1e-10 * max(top, 1.0),
                                  {"E": E.literal()}))
    return rows


def verify_lemma39(ctx: VerifyContext) -> List[ReportRow]:
    pts = PointSet.lattice(1.0, 50.0)
    seq = GevreySequence(sigma=ctx.sigma)
    rows = []
    for eps in (0.1, 0.01):
        report = lemma39_tail_radius(pts, seq, 1.0, eps)
        oracle = float(np.max(tail_sums(pts, seq, 1.0, report.R)))
        slack = min(eps - oracle, report.R_constructive - report.R)
        rows.append(ReportRow("lemma39", "tail_radius", report.R, slack, 0.0,
                              {"eps": eps, "tail": oracle, "R_constructive": report.R_constructive}))
    return rows


def naive_assoc(sigma: float, rho: np.ndarray, p_max: int = 10_000) -> np.ndarray:
    """max over p <= p_max of p ln(rho) - sigma ln(p!), by full scan."""
    p = np.arange(p_max + 1, dtype=float)
    table = np.outer(np.log(rho), p) - sigma * gammaln(p + 1.0)[None, :]
    return np.maximum(np.max(table, axis=1), 0.0)


def verify_assoc(ctx: VerifyContext) -> List[ReportRow]:
    rows = []
    rho = np.logspace(-1, 3, 100)
    samples = [(r, l) for r in ASSOC_SAMPLE_AXIS for l in ASSOC_SAMPLE_AXIS]
    for sigma in (1.0, 2.0):
        seq = GevreySequence(sigma=sigma)
        fast = assoc_values(seq, rho)[0]
        naive = naive_assoc(sigma, rho)
        err = float(np.max(np.abs(fast - naive) / np.maximum(1.0, np.abs(naive))))
        rows.append(ReportRow("assoc", "scan_match", err, -err, ctx.tol("assoc_match"), {"sigma": sigma}))
        report = check_assoc_inequalities(seq, samples)
        rows.append(ReportRow("assoc", "inequalities", report.min_slack, report.min_slack,
                              ctx.tol("assoc_inequality"), {"sigma": sigma}))
    return rows


def verify_lemma22(ctx: VerifyContext) -> List[ReportRow]:
    report = lemma22_decay_check(gaussian(ctx.grid), GevreySequence(sigma=1.0), 0.5, order=16, xi_max=8.0)
    return [ReportRow("lemma22", "decay_bound", report.seminorm, report.min_slack, 1e-12 * report.seminorm,
                      {"h": 0.5, "K": report.order, "violations": report.violations})]


EXPERIMENTS: Dict[str, Callable[[VerifyContext], List[ReportRow]]] = {
    "gaussian": verify_gaussian_oracle,
    "partition": verify_partition,
    "equivalence": verify_equivalence,
    "window": verify_window,
    "retraction": verify_retraction,
    "duality": verify_duality,
    "interp": verify_interpolation,
    "modulation": verify_modulation,
    "certificates": verify_certificates,
    "lemma39": verify_lemma39,
    "assoc": verify_assoc,
    "lemma22": verify_lemma22,
}


def run_experiment(name: str, ctx: VerifyContext) -> List[ReportRow]:
    """Runs one experiment; an unexpected exception becomes a failed row."""
    if name not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {name!r}")
    try:
        return EXPERIMENTS[name](ctx)
    except Exception as e:
        logger.error(f"Experiment {name} crashed: {e}")
        return [ReportRow(name, "error", math.nan, math.nan, 0.0, {"error": type(e).__name__})]


def verify_all(ctx: VerifyContext) -> List[ReportRow]:
    rows = []
    for name in EXPERIMENTS:
        logger.info(f"Running {name}")
        rows.extend(run_experiment(name, ctx))
    return rows
