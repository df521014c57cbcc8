"""amalgam-lab - numerical checks for weighted Wiener amalgam norms."""
import argparse
import dataclasses
import logging
import math
import sys
from typing import Dict, List, Optional

import numpy as np
import yaml
from colorama import Fore, Style, init as colorama_init

from amalgam import AmalgamSpec, continuous_norm, discrete_norm
from duality_interp import stft
from errors import AmalgamLabError, ConfigError
from experiment_config import ExperimentConfig, parse_weight
from gevrey import assoc_fn, check_m2star, check_sequence_conditions
from report_writer import ReportRow, ReportWriter
from ucpu import (
    RECENTER_TOL,
    PointSet,
    build_lattice_ucpu,
    check_condition1,
    check_condition2,
    check_condition3,
    check_condition4,
    lemma39_tail_radius,
)
from verification import EXPERIMENTS, VerifyContext, run_experiment, verify_all
from weights import certify, check_moderate

VERSION = "1.0"


class AmalgamLab:
    """Batch front end: one subcommand per run, CSV to stdout or --out, logs to stderr."""

    def __init__(self, config_path: str = "config.yaml", verbose: bool = False):
        colorama_init()
        self.config = self._load_config(config_path)
        self._setup_logging(verbose)
        self.logger = logging.getLogger("Lab")

    def _setup_logging(self, verbose: bool):
        level = "DEBUG" if verbose else str((self.config.get("logging", {}) or {}).get("level", "INFO")).upper()
        logging.basicConfig(
            level=getattr(logging, level, logging.INFO),
            format=f'{Fore.CYAN}%(asctime)s{Style.RESET_ALL} | '
                   f'{Fore.YELLOW}%(name)-12s{Style.RESET_ALL} | %(message)s',
            datefmt='%H:%M:%S',
            stream=sys.stderr,
        )

    def _load_config(self, path: str) -> dict:
        try:
            with open(path, 'r', encoding='utf-8') as f:
                return yaml.safe_load(f) or {}
        except FileNotFoundError:
            return {}
        except yaml.YAMLError as e:
            raise ConfigError("config", f"cannot parse {path}: {e}")

    def _banner(self, command: str):
        print(f"""
{Fore.GREEN}=============================================
  AMALGAM LAB v{VERSION} : {command}
============================================={Style.RESET_ALL}
""", file=sys.stderr)

    # ------------------------------------------------------------------ config

    def experiment(self, args: argparse.Namespace, overrides: Optional[Dict[str, str]] = None) -> ExperimentConfig:
        """config.yaml defaults <- experiment file <- --set pairs <- command flags."""
        cfg = ExperimentConfig.from_settings(self.config)
        if getattr(args, "experiment", None):
            try:
                with open(args.experiment, 'r', encoding='utf-8') as f:
                    cfg = ExperimentConfig.from_text(f.read(), cfg)
            except OSError as e:
                raise ConfigError("experiment", str(e))
        values: Dict[str, str] = {}
        for item in getattr(args, "set", None) or []:
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(item, "expected key=value")
            values[key.strip()] = value.strip()
        values.update({k: v for k, v in (overrides or {}).items() if v is not None})
        if getattr(args, "seed", None) is not None:
            values["seed"] = str(args.seed)
        return cfg.with_values(values) if values else cfg

    def verify_context(self, cfg: ExperimentConfig, args: argparse.Namespace) -> VerifyContext:
        ctx = VerifyContext.from_settings(self.config, seed=cfg.seed, jobs=args.jobs)
        ctx = dataclasses.replace(
            ctx, grid=cfg.grid(), sigma=cfg.sigma, a=cfg.a, s=cfg.s, L_pts=cfg.L_pts, outer_margin=cfg.outer_margin
        )
        if getattr(args, "trials", None):
            ctx = dataclasses.replace(ctx, trials_duality=args.trials, trials_interp=args.trials)
        return ctx

    # ---------------------------------------------------------------- commands

    def cmd_assoc(self, args, writer: ReportWriter):
        cfg = self.experiment(args, {"sigma": args.sigma})
        seq = cfg.sequence()
        rows = []
        for rho in args.rho or [math.e]:
            value = assoc_fn(seq, rho)
            rows.append(ReportRow("assoc", "assoc_fn", value.value, 0.0, 0.0,
                                  {"sigma": seq.sigma, "rho": rho, "argmax_p": value.argmax_p}))
        if args.conditions:
            report = check_sequence_conditions(seq)
            for name, slack in (("M1", report.m1_slack), ("M2", report.m2_slack), ("M6", report.m6_slack)):
                rows.append(ReportRow("assoc", f"condition_{name}", slack, slack, 1e-10,
                                      {"sigma": seq.sigma, "p_max": report.p_max}))
            star = check_m2star(seq)
            rows.append(ReportRow("assoc", "m2star", star.N, 0.0 if star.ok else -1.0, 0.0,
                                  {"sigma": seq.sigma, "p0": star.p0}))
        writer.add(rows)
        writer.write()

    def cmd_weights(self, args, writer: ReportWriter):
        cfg = self.experiment(args)
        seq = cfg.sequence()
        weights = [parse_weight(text) for text in args.weight] if args.weight else [cfg.weight]
        rows = []
        for w in weights:
            C, tau = w.certificate
            report = check_moderate(w, seq, C, tau)
            params = {"weight": w.literal(), "tau": tau, "fitted_C": certify(w, seq, tau)}
            if report.witness:
                params["witness"] = f"{report.witness[0]:g}/{report.witness[1]:g}"
            rows.append(ReportRow("weights", "moderation", C, report.worst_slack, 1e-12, params))
        writer.add(rows)
        writer.write()

    def _ucpu_values(self, tokens: List[str]) -> Dict[str, str]:
        """`a=1 s=1 L=12` positional form; L is the point-set half-width."""
        values = {}
        for token in tokens or []:
            key, sep, value = token.partition("=")
            if not sep or key not in ("a", "s", "L"):
                raise ConfigError(token, "expected a=.., s=.. or L=..")
            values["L_pts" if key == "L" else key] = value
        return values

    def cmd_ucpu(self, args, writer: ReportWriter):
        if args.ucpu_command == "lemma39":
            cfg = self.experiment(args)
            pts = PointSet.lattice(1.0, args.L)
            report = lemma39_tail_radius(pts, cfg.sequence(), args.h, args.eps)
            slack = min(report.eps - report.tail, report.R_constructive - report.R)
            writer.add([ReportRow("lemma39", "tail_radius", report.R, slack, 0.0,
                                  {"h": args.h, "eps": args.eps, "tail": report.tail,
                                   "R_constructive": report.R_constructive, "diameter": report.diameter})])
            writer.write()
            return

        cfg = self.experiment(args, self._ucpu_values(getattr(args, "params", None)))
        u = build_lattice_ucpu(cfg.a, cfg.s, cfg.L_pts, cfg.grid())
        u_half = float((self.config.get("ucpu", {}) or {}).get("u_factor", 0.6)) * cfg.a
        conds = {"1", "2", "3", "4"} if args.ucpu_command == "build" or args.cond == "all" else {args.cond}
        base = {"a": cfg.a, "s": cfg.s, "L_pts": cfg.L_pts}
        rows = []
        if "1" in conds:
            h = args.h if args.ucpu_command == "check" else cfg.h
            K = args.K if args.ucpu_command == "check" else cfg.K
            c1 = check_condition1(u, cfg.sequence(), h, K)
            slack = RECENTER_TOL * max(1.0, c1.value) - c1.recenter_spread
            rows.append(ReportRow("ucpu", "condition1", c1.value, slack, 0.0, {**base, "h": h, "K": K}))
        if "2" in conds:
            c_k = check_condition2(u.pts, cfg.a / 2.0)
            rows.append(ReportRow("ucpu", "condition2", c_k, 0.0, 0.0, {**base, "K_halfwidth": cfg.a / 2.0}))
        if "3" in conds:
            cover = check_condition3(u.pts, u_half)
            params = {**base, "U": u_half}
            if cover.witness is not None:
                params["witness"] = cover.witness
            rows.append(ReportRow("ucpu", "condition3", cover.max_gap, u_half - cover.max_gap, 0.0, params))
        if "4" in conds:
            c4 = check_condition4(u)
            rows.append(ReportRow("ucpu", "condition4", c4.max_deviation, -c4.max_deviation, 1e-10,
                                  {**base, "core": c4.core}))
        writer.add(rows)
        writer.write()

    def cmd_norm(self, args, writer: ReportWriter):
        overrides = {"f": args.f, "chi": args.chi, "E": args.E, "p": args.p, "weight": args.weight,
                     "a": args.a, "s": args.s}
        cfg = self.experiment(args, overrides)
        f = cfg.sample("f")
        if args.kind == "cont":
            spec = AmalgamSpec(E=cfg.E, p=cfg.p, eta=cfg.weight, chi=cfg.sample("chi"), c0=cfg.c0,
                               outer_margin=cfg.outer_margin)
            report = continuous_norm(f, spec)
        else:
            u = build_lattice_ucpu(cfg.a, cfg.s, cfg.L_pts, cfg.grid())
            report = discrete_norm(f, u, cfg.E, cfg.p, cfg.weight, cfg.c0)
        for warning in report.warnings:
            self.logger.warning(warning)
        params = ";".join(f"{k}={v}" for k, v in report.params.items())
        writer.write_table(["kind", "params", "norm", "tail_flag"],
                           [[report.params.get("kind", args.kind), params, report.value, report.tail_flag]])

    def cmd_verify(self, args, writer: ReportWriter):
        cfg = self.experiment(args)
        ctx = self.verify_context(cfg, args)
        self.logger.info(f"Verify {args.name}: seed={ctx.seed}, jobs={ctx.jobs}")
        rows = verify_all(ctx) if args.name == "all" else run_experiment(args.name, ctx)
        writer.add(rows)
        writer.write()
        failed = [row for row in writer.rows if not row.passed]
        if failed:
            self.logger.warning(f"{len(failed)} of {len(writer.rows)} rows failed")
        else:
            self.logger.info(f"All {len(writer.rows)} rows passed")

    def cmd_stft(self, args, writer: ReportWriter):
        cfg = self.experiment(args, {"f": args.f, "phi": args.phi})
        V = stft(cfg.sample("f"), cfg.sample("phi"), outer_margin=cfg.outer_margin)
        xi = V.grid_xi.points
        keep = np.abs(xi) <= args.xi_max if args.xi_max is not None else np.ones(xi.shape, dtype=bool)

        def rows():
            for i, x in enumerate(V.x_points):
                for xi_j, v in zip(xi[keep], V.values[i, keep]):
                    yield [float(x), float(xi_j), float(v.real), float(v.imag), float(abs(v))]

        writer.write_table(["x", "xi", "re", "im", "abs"], rows())

    # --------------------------------------------------------------------- run

    def run(self, args: argparse.Namespace) -> int:
        self._banner(args.command)
        writer = ReportWriter(args.out)
        handler = getattr(self, f"cmd_{args.command}")
        try:
            handler(args, writer)
        except (AmalgamLabError, ValueError) as e:
            self.logger.debug("Command failed", exc_info=True)
            print(f"error: {e}", file=sys.stderr)
            return 2
        return 0 if writer.all_passed else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="CSV output path (default: stdout)")
    common.add_argument("--seed", type=int, help="seed of the PCG64 generator")
    common.add_argument("--jobs", type=int, default=1, help="worker threads")
    common.add_argument("--config", default="config.yaml", help="defaults file")
    common.add_argument("--experiment", help="experiment file of key = value lines")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one experiment key")
    common.add_argument("--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="amalgam-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    assoc = sub.add_parser("assoc", parents=[common], help="associated function M(rho)")
    assoc.add_argument("--sigma")
    assoc.add_argument("--rho", type=float, action="append")
    assoc.add_argument("--conditions", action="store_true", help="also check (M.1), (M.2), (M.6), (M.2)*")

    weights = sub.add_parser("weights", parents=[common], help="moderation certificates")
    weights.add_argument("--weight", action="append")

    ucpu = sub.add_parser("ucpu", help="partition of unity conditions")
    ucpu_sub = ucpu.add_subparsers(dest="ucpu_command", required=True)
    build = ucpu_sub.add_parser("build", parents=[common])
    build.add_argument("params", nargs="*", metavar="a=1 s=1 L=12")
    check = ucpu_sub.add_parser("check", parents=[common])
    check.add_argument("params", nargs="*", metavar="a=1 s=1 L=12")
    check.add_argument("--cond", choices=["1", "2", "3", "4", "all"], default="all")
    check.add_argument("--h", type=float, default=0.25)
    check.add_argument("--K", type=int, default=8)
    lemma39 = ucpu_sub.add_parser("lemma39", parents=[common])
    lemma39.add_argument("--h", type=float, default=1.0)
    lemma39.add_argument("--eps", type=float, default=0.1)
    lemma39.add_argument("--L", type=float, default=50.0, help="points Z cap [-L, L]")

    norm = sub.add_parser("norm", parents=[common], help="continuous or discrete amalgam norm")
    norm.add_argument("kind", choices=["cont", "disc"])
    for key in ("f", "chi", "E", "p", "weight", "a", "s"):
        norm.add_argument(f"--{key}")

    verify = sub.add_parser("verify", parents=[common], help="acceptance experiments")
    verify.add_argument("name", choices=list(EXPERIMENTS) + ["all"])
    verify.add_argument("--trials", type=int, help="trial count of the randomized sweeps")

    stft_cmd = sub.add_parser("stft", parents=[common], help="short-time Fourier transform samples")
    stft_cmd.add_argument("--f")
    stft_cmd.add_argument("--phi")
    stft_cmd.add_argument("--xi-max", type=float)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        lab = AmalgamLab(args.config, args.verbose)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return lab.run(args)


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\nBye!", file=sys.stderr)
        sys.exit(130)
