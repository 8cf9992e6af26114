# tools/experiment/cmd_gof.py
"""Kolmogorov-Smirnov distance of a samples file to the standard Gumbel law."""

import argparse
import time

import numpy as np

from ..normal_analytics import gumbel_cdf, gumbel_quantile
from ..simulation_harness import gof_report
from .base import BaseCommand, OutputRecord, read_samples

QUANTILE_LEVELS = (0.1, 0.25, 0.5, 0.75, 0.9)


class GofCommand(BaseCommand):
    name = "gof"
    help = "KS distance of standardized samples to Gumbel"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--in", dest="samples", type=str, required=True,
                            help="samples file from `simulate` (.csv or .json)")
        parser.add_argument("--level", type=float, default=0.99,
                            help="confidence level of the reported KS critical value")
        parser.add_argument("--out", type=str, help="report JSON path (default: stdout)")

    def banner(self, args):
        return [f"Samples:     {args.samples}"]

    def run(self, args: argparse.Namespace) -> OutputRecord:
        started = time.perf_counter()
        samples = read_samples(args.samples)
        report = gof_report(samples, gumbel_cdf, args.level)
        empirical = np.quantile(samples, QUANTILE_LEVELS)
        payload = {
            "source": args.samples,
            "replications": report.replications,
            "ks": report.statistic,
            "p_value": report.p_value,
            "ks_critical": report.critical,
            "level": report.level,
            "quantiles": [
                {"p": p, "empirical": float(q), "gumbel": gumbel_quantile(p)}
                for p, q in zip(QUANTILE_LEVELS, empirical)
            ],
        }
        return OutputRecord.build(self.name, payload, started=started)

    def summary(self, record):
        p = record.payload
        return [f"  KS:           {p['ks']:.5f}",
                f"  p-value:      {p['p_value']:.4f}",
                f"  {p['level']:.0%} critical: {p['ks_critical']:.5f}"]
