# run_acceptance.py
"""
Desk-scale acceptance run: every check at full replication counts, one report.

    python run_acceptance.py              # all checks
    python run_acceptance.py 1 4 8        # selected checks
    python run_acceptance.py --workers 8

Exit status is 0 when every selected check passes, 1 otherwise.
"""

import argparse
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
from dotenv import load_dotenv

from tools.experiment.__main__ import main as cli
from tools.experiment.base import OutputRecord
from tools.normal_analytics import (
    HMethod, SpitzerParams, cached_constant_h, clump_integral, constant_h,
    expansion_remainder, gumbel_cdf, pickands_f, spitzer_p_inf,
)
from tools.scan_statistics import (
    RegionRect, SamplePath, darling_erdos_max, excursion_tail_rect_grid, scan_max_naive, scan_max_pruned,
)
from tools.simulation_harness import (
    EnsembleConfig, Statistic, ks_distance, mc_grid_exceedance, mc_p_inf, mc_pickands_f,
    mc_pickands_f_via_walk, run_ensemble, shao_ratio_trend,
)

# 1. Load environment overrides (SCAN_*)
load_dotenv()


def check_constant_h(workers):
    g = clump_integral(1e-3)
    a_form = constant_h(1e-3, HMethod.A_FORM)
    y_form = constant_h(1e-3, HMethod.Y_FORM)
    agree = abs(a_form.value - y_form.value) <= a_form.err_bound + y_form.err_bound
    ok = 0.205 <= g.value <= 0.215 and agree
    return ok, f"int G = {g.value:.6f}, H = {a_form.value:.6f} (A) / {y_form.value:.6f} (Y)"


def check_pickands_limits(workers):
    grid = [0.001, 0.01, 0.1, 1.0, 10.0]
    fs = [pickands_f(a, 1e-10).f_value for a in grid]
    f50 = pickands_f(50.0, 1e-10).f_value
    ok = abs(50.0 * f50 - 1.0) <= 1e-2 and 0.40 <= fs[0] <= 0.50 and all(x > y for x, y in zip(fs, fs[1:]))
    return ok, f"50 F(50) = {50 * f50:.5f}, F(0.001) = {fs[0]:.5f}"


def check_oracles(workers):
    exact_p = spitzer_p_inf(SpitzerParams(2.0, 1e-10))[0]
    exact_f = pickands_f(2.0, 1e-8).f_value
    p = mc_p_inf(2.0, 10_000, 100_000)
    walk = mc_pickands_f_via_walk(2.0, 10_000, 100_000, master_seed=1)
    direct = mc_pickands_f(2.0, 200.0, 100_000)
    ok = abs(p.mean - exact_p) <= 4 * p.std_error and abs(walk.mean - exact_f) <= 0.1 * exact_f
    return ok, (f"p_inf {p.mean:.5f} vs {exact_p:.5f}; F via walk {walk.mean:.5f} vs {exact_f:.5f}; "
                f"e^M mean {direct.mean:.5f} (lower oracle)")


def check_scanner(workers):
    rng = np.random.default_rng(20240601)
    mismatches = 0
    for idx in range(200):
        path = SamplePath.from_increments(rng.standard_normal(int(rng.integers(16, 513))))
        min_sep = (1, 2, 8)[idx % 3]
        a, b = scan_max_naive(path, min_sep), scan_max_pruned(path, min_sep)
        mismatches += (a.value, a.i, a.j) != (b.value, b.i, b.j)
        de, anchored = darling_erdos_max(path), scan_max_naive(path, anchored=True)
        mismatches += (de.value, de.k) != (anchored.value, anchored.j)
    return mismatches == 0, f"{mismatches} mismatches over 200 paths"


def check_main_discrete(workers):
    r = 2000
    ks = {}
    for n in (2 ** 8, 2 ** 12, 2 ** 16):
        emp = run_ensemble(EnsembleConfig(Statistic.MAIN_DISCRETE, n, r, master_seed=3, workers=workers))
        ks[n] = ks_distance(emp, gumbel_cdf)
    slack = 2.0 / math.sqrt(r)
    ok = ks[2 ** 12] <= 0.15 and ks[2 ** 12] <= ks[2 ** 8] + slack and ks[2 ** 16] <= ks[2 ** 12] + slack
    return ok, ", ".join(f"KS(n=2^{int(math.log2(n))}) = {v:.4f}" for n, v in ks.items())


def check_erdos_renyi(workers):
    emp = run_ensemble(EnsembleConfig(Statistic.ERDOS_RENYI, 2 ** 14, 2000, master_seed=2, c=1.0, workers=workers))
    ks = ks_distance(emp, gumbel_cdf)
    return ks <= 0.15, f"KS = {ks:.4f}"


def check_tail(workers):
    region, u, q = RegionRect(0.0, 1.0, 1.0, 2.0), 3.5, 2.0 ** -8
    est = mc_grid_exceedance(region, u, q, reps=200_000, master_seed=10, workers=workers)
    asym = excursion_tail_rect_grid(region, u, q * u * u).value
    ratio = est.mean / asym
    return 1.5 <= ratio <= 2.6, f"MC {est.mean:.5f} +/- {est.std_error:.5f}, asymptotic {asym:.5f}, ratio {ratio:.3f}"


def check_expansion(workers):
    ok = True
    parts = []
    for (c, b), bound in (((1.0, 1.0), 0.02), ((cached_constant_h(), 1.0), 0.03), ((1.0, 2.0), 0.2)):
        rem = [abs(expansion_remainder(c, b, n)) for n in (1e4, 1e8, 1e16, 1e32)]
        ok &= rem[1] <= bound and all(x > y for x, y in zip(rem, rem[1:]))
        parts.append(f"({c:.4g},{b:g}): {rem[1]:.4f}")
    ok &= abs(expansion_remainder(1.0, 0.0, 1e8)) <= 1e-9
    return ok, "; ".join(parts)


def check_shao(workers):
    trend = shao_ratio_trend([2 ** 10, 2 ** 13, 2 ** 16], reps=200, master_seed=12, workers=workers)
    means = [m for _, m in trend]
    ok = all(x < y for x, y in zip(means, means[1:])) and 0.8 <= means[-1] <= 1.1
    return ok, ", ".join(f"{m:.4f}" for m in means)


def check_determinism(workers):
    with tempfile.TemporaryDirectory() as tmp:
        manifest = Path(tmp) / "m.yaml"
        manifest.write_text("statistic: MAIN_DISCRETE\nn: 4096\nreplications: 200\nmaster_seed: 7\n")
        payloads = []
        for threads in (1, max(2, workers)):
            out = Path(tmp) / f"s{threads}.json"
            if cli(["simulate", "--in", str(manifest), "--workers", str(threads), "--out", str(out)]) != 0:
                return False, "simulate failed"
            payloads.append(OutputRecord.from_json(out.read_text()).payload)
    return payloads[0] == payloads[1], "payloads identical" if payloads[0] == payloads[1] else "payloads differ"


# 2. The checks, in report order
CHECKS = [
    ("Constant H / clump integral", check_constant_h),
    ("Pickands limits", check_pickands_limits),
    ("Oracle equivalence", check_oracles),
    ("Scanner exactness", check_scanner),
    ("Gumbel convergence (main statistic)", check_main_discrete),
    ("Erdos-Renyi window", check_erdos_renyi),
    ("Tail asymptotic", check_tail),
    ("Rate expansion", check_expansion),
    ("Shao ratio", check_shao),
    ("Determinism", check_determinism),
]


def main() -> int:
    parser = argparse.ArgumentParser(description="Desk-scale acceptance run")
    parser.add_argument("checks", nargs="*", type=int, help="check numbers (default: all)")
    parser.add_argument("--workers", type=int, default=4)
    args = parser.parse_args()
    selected = args.checks or list(range(1, len(CHECKS) + 1))

    print("\n[scan] Acceptance run")
    print(f"[scan] Workers: {args.workers}\n")

    failures = 0
    for number in selected:
        title, check = CHECKS[number - 1]
        started = time.perf_counter()
        ok, detail = check(args.workers)
        failures += not ok
        print(f"  {number:>2}. {'PASS' if ok else 'FAIL'}  {title}  ({time.perf_counter() - started:.1f}s)")
        print(f"      {detail}")

    # 3. Report
    print("\n####################################")
    print(f"## {len(selected) - failures}/{len(selected)} checks passed")
    print("####################################\n")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
