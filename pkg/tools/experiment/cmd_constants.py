# tools/experiment/cmd_constants.py
"""
Constants table: H by both integrals, F(a) and p_inf(a) on the standard grid,
and the five normalizations at n in {10^3, 10^4, 10^6}.
"""

import argparse
import time

from ..normal_analytics import (
    HMethod, Theorem, clump_integral, constant_h, normalization, pickands_f,
)
from .base import BaseCommand, OutputRecord

A_GRID = (0.001, 0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 10.0, 50.0)
N_GRID = (1_000, 10_000, 1_000_000)


class ConstantsCommand(BaseCommand):
    name = "constants"
    help = "compute H, F(a), p_inf(a) and normalizing constants"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--tol", type=float, help="tolerance for H (default: h_tol from config)")
        parser.add_argument("--f-tol", type=float, default=1e-10, help="series tolerance for p_inf/F grid")
        parser.add_argument("--c", type=float, default=1.0, help="window constant for ERDOS_RENYI")
        parser.add_argument("--out", type=str, help="output JSON path (default: stdout)")

    def banner(self, args):
        return [f"tol:         {self._tol(args):g}", f"c:           {args.c:g}"]

    def _tol(self, args) -> float:
        return args.tol if args.tol is not None else self.config.h_tol

    def run(self, args: argparse.Namespace) -> OutputRecord:
        started = time.perf_counter()
        tol = self._tol(args)
        cfg = self.config

        h = {}
        for method in (HMethod.A_FORM, HMethod.Y_FORM):
            est = constant_h(tol, method, limit=cfg.quad_limit, max_terms=cfg.series_max_terms)
            h[method.value] = {"value": est.value, "err_bound": est.err_bound}
        g_int = clump_integral(tol, HMethod.A_FORM, limit=cfg.quad_limit, max_terms=cfg.series_max_terms)

        grid = []
        for a in A_GRID:
            ev = pickands_f(a, args.f_tol, cfg.series_max_terms)
            grid.append({"a": ev.a, "p_inf": ev.p_inf, "f_value": ev.f_value, "err_bound": ev.err_bound})

        norms = []
        for theorem in Theorem:
            aux = args.c if theorem is Theorem.ERDOS_RENYI else None
            for n in N_GRID:
                pair = normalization(theorem, n, aux)
                norms.append({"theorem": theorem.value, "n": n, "aux": aux,
                              "a_n": pair.a_n, "b_n": pair.b_n})

        payload = {
            "tol": tol,
            "H": h,
            "clump_integral": {"value": g_int.value, "err_bound": g_int.err_bound},
            "pickands": grid,
            "normalization": norms,
        }
        return OutputRecord.build(self.name, payload, started=started)

    def summary(self, record):
        h = record.payload["H"]
        return [f"  H (A_FORM): {h['A_FORM']['value']:.7f} +/- {h['A_FORM']['err_bound']:.1e}",
                f"  H (Y_FORM): {h['Y_FORM']['value']:.7f} +/- {h['Y_FORM']['err_bound']:.1e}",
                f"  int G:      {record.payload['clump_integral']['value']:.7f}"]
