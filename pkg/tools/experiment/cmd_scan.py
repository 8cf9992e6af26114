# tools/experiment/cmd_scan.py
"""Evaluate one statistic on a CSV of increments."""

import argparse
import time
from dataclasses import asdict

from ..scan_statistics import (
    SamplePath, brownian_grid_sup, darling_erdos_max, erdos_renyi_window,
    fixed_lag_sup, scan_max_naive, scan_max_pruned,
)
from ..simulation_harness import Statistic
from ..errors import ArgumentError
from .base import BaseCommand, OutputRecord, read_increments_csv


class ScanCommand(BaseCommand):
    name = "scan"
    help = "maximum standardized increment of a path read from CSV"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--in", dest="path", type=str, required=True, help="CSV, one increment per line")
        parser.add_argument("--stat", type=str, default=Statistic.MAIN_DISCRETE.value,
                            choices=[s.value for s in Statistic])
        parser.add_argument("--min-sep", type=int, default=1)
        parser.add_argument("--c", type=float, help="window constant for ERDOS_RENYI")
        parser.add_argument("--n", type=int, help="Brownian n (path holds n*oversample increments)")
        parser.add_argument("--oversample", type=int)
        parser.add_argument("--engine", type=str, default="pruned", choices=["pruned", "naive"])
        parser.add_argument("--out", type=str, help="result JSON path (default: stdout)")

    def banner(self, args):
        return [f"Input:       {args.path}", f"Statistic:   {args.stat}"]

    def _evaluate(self, path: SamplePath, args: argparse.Namespace):
        stat = Statistic(args.stat)
        if stat is Statistic.MAIN_DISCRETE:
            if args.engine == "naive":
                return scan_max_naive(path, args.min_sep)
            return scan_max_pruned(path, args.min_sep, self.config.block_size)
        if stat is Statistic.DARLING_ERDOS:
            return darling_erdos_max(path)
        if stat is Statistic.ERDOS_RENYI:
            if args.c is None:
                raise ArgumentError("--c is required for ERDOS_RENYI")
            return erdos_renyi_window(path, args.c)
        oversample = args.oversample or self.config.oversample
        if args.n is None:
            raise ArgumentError(f"--n is required for {stat.value}")
        if stat is Statistic.BROWNIAN:
            return brownian_grid_sup(path, args.n, oversample)
        return fixed_lag_sup(path, args.n, oversample)

    def run(self, args: argparse.Namespace) -> OutputRecord:
        started = time.perf_counter()
        path = SamplePath.from_increments(read_increments_csv(args.path))
        result = self._evaluate(path, args)
        payload = {"statistic": args.stat, "n": path.n, **asdict(result)}
        return OutputRecord.build(self.name, payload, started=started)

    def summary(self, record):
        p = record.payload
        where = f"(i={p['i']}, j={p['j']})" if "i" in p else f"(k={p['k']}, window={p['window']})"
        return [f"  Value: {p['value']!r} at {where}"]
