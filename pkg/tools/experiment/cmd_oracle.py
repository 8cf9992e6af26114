# tools/experiment/cmd_oracle.py
"""
Monte Carlo oracles next to their analytic counterparts.

Kinds:
  p_inf            mc_p_inf vs spitzer_p_inf
  pickands_f       mc_pickands_f vs pickands_f
  pickands_f_walk  p^2/a from simulated walks vs pickands_f
  grid_exceedance  mc_grid_exceedance vs excursion_tail_rect_grid
"""

import argparse
import time
from dataclasses import asdict

from ..errors import ArgumentError
from ..normal_analytics import SpitzerParams, pickands_f, spitzer_p_inf
from ..scan_statistics import RegionRect, excursion_tail_rect_grid
from ..simulation_harness import mc_grid_exceedance, mc_p_inf, mc_pickands_f, mc_pickands_f_via_walk
from .base import BaseCommand, OutputRecord

KINDS = ("p_inf", "pickands_f", "pickands_f_walk", "grid_exceedance")


class OracleCommand(BaseCommand):
    name = "oracle"
    help = "Monte Carlo estimate of p_inf, F(a) or a grid exceedance probability"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("kind", choices=KINDS)
        parser.add_argument("--a", type=float, default=2.0, help="grid step")
        parser.add_argument("--horizon", type=int, help="walk horizon for p_inf")
        parser.add_argument("--T", type=float, help="time horizon for pickands_f")
        parser.add_argument("--reps", type=int, default=100_000)
        parser.add_argument("--seed", type=int)
        parser.add_argument("--tol", type=float, default=1e-10, help="series tolerance of the analytic value")
        parser.add_argument("--u", type=float, default=3.5, help="exceedance level")
        parser.add_argument("--mesh", type=float, default=2.0 ** -8, help="Brownian mesh q")
        parser.add_argument("--region", type=float, nargs=4, default=[0.0, 1.0, 1.0, 2.0],
                            metavar=("X_LO", "X_HI", "Y_LO", "Y_HI"))
        parser.add_argument("--workers", type=int)
        parser.add_argument("--out", type=str, help="estimate JSON path (default: stdout)")

    def banner(self, args):
        return [f"Kind:        {args.kind}", f"Reps:        {args.reps}", f"Seed:        {self._seed(args)}"]

    def _seed(self, args) -> int:
        return args.seed if args.seed is not None else self.config.master_seed

    def run(self, args: argparse.Namespace) -> OutputRecord:
        started = time.perf_counter()
        cfg = self.config
        seed = self._seed(args)
        params = {"kind": args.kind, "reps": args.reps}

        if args.kind == "p_inf":
            horizon = args.horizon or cfg.p_inf_horizon
            est = mc_p_inf(args.a, horizon, args.reps, seed)
            analytic = spitzer_p_inf(SpitzerParams(args.a, args.tol), cfg.series_max_terms)[0]
            params.update(a=args.a, horizon=horizon)
        elif args.kind == "pickands_f":
            T = args.T or cfg.pickands_horizon
            est = mc_pickands_f(args.a, T, args.reps, seed)
            analytic = pickands_f(args.a, args.tol, cfg.series_max_terms).f_value
            params.update(a=args.a, T=T)
        elif args.kind == "pickands_f_walk":
            horizon = args.horizon or cfg.p_inf_horizon
            est = mc_pickands_f_via_walk(args.a, horizon, args.reps, seed)
            analytic = pickands_f(args.a, args.tol, cfg.series_max_terms).f_value
            params.update(a=args.a, horizon=horizon)
        elif args.kind == "grid_exceedance":
            region = RegionRect(*args.region)
            est = mc_grid_exceedance(region, args.u, args.mesh, args.reps, seed, args.workers or cfg.workers)
            analytic = excursion_tail_rect_grid(region, args.u, args.mesh * args.u ** 2).value
            params.update(u=args.u, mesh=args.mesh, region=list(args.region))
        else:
            raise ArgumentError(f"unknown oracle kind {args.kind!r}")

        payload = {"params": params, "estimate": asdict(est), "analytic": analytic}
        return OutputRecord.build(self.name, payload, master_seed=seed, started=started)

    def summary(self, record):
        est = record.payload["estimate"]
        return [f"  Estimate: {est['mean']:.6g} +/- {est['std_error']:.2g}",
                f"  Analytic: {record.payload['analytic']:.6g}"]
