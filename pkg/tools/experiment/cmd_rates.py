# tools/experiment/cmd_rates.py
"""The asymptotic extreme-value rate table, evaluated at user-supplied n."""

import argparse
import time

from ..errors import DomainError
from ..normal_analytics import evr_value, rate_normalization, rate_table
from .base import BaseCommand, OutputRecord


class RatesCommand(BaseCommand):
    name = "rates"
    help = "print f(n) and the implied (a, b) for the seven rate-table rows"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--n", type=float, nargs="+", default=[1e3, 1e6],
                            help="sample sizes (>= 16)")
        parser.add_argument("--c", type=float, default=1.0, help="window constant for row 6")
        parser.add_argument("--out", type=str, help="output JSON path (default: stdout)")

    def banner(self, args):
        return [f"n:           {', '.join(f'{n:g}' for n in args.n)}", f"c:           {args.c:g}"]

    def run(self, args: argparse.Namespace) -> OutputRecord:
        started = time.perf_counter()
        rows = []
        for entry in rate_table(args.c):
            for n in args.n:
                f_n = evr_value(entry, n)
                try:
                    pair = rate_normalization(entry, n)
                    a_f, b_f = pair.a_n, pair.b_n
                except DomainError:
                    # f(n) < 3 for the log log rows at small n
                    a_f = b_f = None
                rows.append({"row": entry.row_id, "label": entry.label, "coef": entry.coef,
                             "n": n, "f_n": f_n, "a_f_n": a_f, "b_f_n": b_f})
        return OutputRecord.build(self.name, {"c": args.c, "rows": rows}, started=started)

    def summary(self, record):
        lines = []
        for row in record.payload["rows"]:
            lines.append(f"  {row['row']}. n={row['n']:<10g} f(n)={row['f_n']:<14.6g} {row['label']}")
        return lines
