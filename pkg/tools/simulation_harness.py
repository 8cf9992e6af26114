# tools/simulation_harness.py
"""
Reproducible Gaussian paths, ensemble runs and Monte Carlo oracles.

Random numbers: every (master_seed, replication) pair keys its own Philox
counter-based generator through numpy's SeedSequence spawn keys, so a
replication draws the same numbers no matter which thread runs it or in what
order. Standard normals come from inversion: a 52-bit uniform k is mapped to
u = (k + 1/2) 2^-52, strictly inside (0, 1), and then to ndtri(u).
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import special, stats

from .errors import ArgumentError, DomainError, ToolkitError, check_positive, with_replication
from .normal_analytics import (
    NormalizationPair, Theorem, gumbel_cdf, normalization, rate_normalization, rate_table,
)
from .scan_statistics import (
    RegionRect, SamplePath, brownian_grid_sup, darling_erdos_max, erdos_renyi_window,
    fixed_lag_sup, scan_max_naive, scan_max_pruned,
)

logger = logging.getLogger(__name__)

P_INF_HORIZON = 10_000
PICKANDS_T = 200.0
ESCAPE_LEVEL = -40.0
STEP_BLOCK = 64
BATCH = 8192

_UNIFORM_BITS = 52
_UNIFORM_SCALE = 2.0 ** -_UNIFORM_BITS


# =============================================================================
# Streams
# =============================================================================

@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    replication: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise DomainError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if int(self.replication) < 0:
            raise DomainError(f"replication must be >= 0, got {self.replication}")


class NormalStream:
    """Deterministic uniform/normal stream for one SeedSpec."""

    def __init__(self, seed: SeedSpec):
        self.seed = seed
        seq = np.random.SeedSequence(entropy=int(seed.master_seed), spawn_key=(int(seed.replication),))
        self._gen = np.random.Generator(np.random.Philox(seq))

    def uniforms(self, size) -> np.ndarray:
        k = self._gen.integers(0, 2 ** _UNIFORM_BITS, size=size, dtype=np.int64)
        return (k + 0.5) * _UNIFORM_SCALE

    def normals(self, size) -> np.ndarray:
        return special.ndtri(self.uniforms(size))


def derive_stream(seed: SeedSpec) -> NormalStream:
    return NormalStream(seed)


def sample_path(stream: NormalStream, n: int, scale: float = 1.0) -> SamplePath:
    """Next n normals (times `scale`) as increments of a path."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    x = stream.normals(int(n))
    if scale != 1.0:
        x = x * scale
    return SamplePath.from_increments(x)


# =============================================================================
# Ensembles
# =============================================================================

class Statistic(str, Enum):
    MAIN_DISCRETE = "MAIN_DISCRETE"
    ERDOS_RENYI = "ERDOS_RENYI"
    DARLING_ERDOS = "DARLING_ERDOS"
    BROWNIAN = "BROWNIAN"
    BROWNIAN_FIXED_LAG = "BROWNIAN_FIXED_LAG"


ENGINES = {
    "pruned": scan_max_pruned,
    "naive": scan_max_naive,
}


@dataclass(frozen=True)
class EnsembleConfig:
    statistic: Statistic
    n: int
    replications: int
    master_seed: int
    c: Optional[float] = None
    oversample: Optional[int] = None
    engine: str = "pruned"
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "statistic", Statistic(self.statistic))
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if self.replications < 1:
            raise DomainError(f"replications must be >= 1, got {self.replications}")
        if self.engine not in ENGINES:
            raise ArgumentError(f"engine must be one of {sorted(ENGINES)}, got {self.engine!r}")
        if self.workers < 1:
            raise ArgumentError(f"workers must be >= 1, got {self.workers}")
        if self.statistic is Statistic.ERDOS_RENYI and self.c is None:
            raise ArgumentError("ERDOS_RENYI needs the window constant c")
        if self.statistic in (Statistic.BROWNIAN, Statistic.BROWNIAN_FIXED_LAG):
            if self.oversample is None or self.oversample < 1:
                raise ArgumentError(f"{self.statistic.value} needs oversample >= 1")
        SeedSpec(self.master_seed)


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Sorted standardized samples plus the per-replication raw/standardized values."""
    samples: np.ndarray
    n: int
    replications: int
    statistic: Statistic
    raw: np.ndarray = field(default_factory=lambda: np.empty(0))
    standardized: np.ndarray = field(default_factory=lambda: np.empty(0))


def ensemble_normalization(config: EnsembleConfig) -> NormalizationPair:
    stat = config.statistic
    if stat is Statistic.MAIN_DISCRETE:
        return normalization(Theorem.MAIN_DISCRETE, config.n)
    if stat is Statistic.ERDOS_RENYI:
        return normalization(Theorem.ERDOS_RENYI, config.n, config.c)
    if stat is Statistic.DARLING_ERDOS:
        return normalization(Theorem.DARLING_ERDOS, config.n)
    if stat is Statistic.BROWNIAN:
        return normalization(Theorem.BROWNIAN_CONTINUOUS, config.n)
    return rate_normalization(rate_table()[6], config.n)


def _statistic_fn(config: EnsembleConfig) -> Callable[[NormalStream], float]:
    stat, n = config.statistic, config.n
    if stat is Statistic.MAIN_DISCRETE:
        engine = ENGINES[config.engine]
        return lambda stream: engine(sample_path(stream, n)).value
    if stat is Statistic.ERDOS_RENYI:
        return lambda stream: erdos_renyi_window(sample_path(stream, n), config.c).value
    if stat is Statistic.DARLING_ERDOS:
        return lambda stream: darling_erdos_max(sample_path(stream, n)).value

    m = config.oversample
    step = math.sqrt(1.0 / (n * m))
    if stat is Statistic.BROWNIAN:
        return lambda stream: brownian_grid_sup(sample_path(stream, n * m, step), n, m).value
    return lambda stream: fixed_lag_sup(sample_path(stream, n * m, step), n, m).value


def run_ensemble(config: EnsembleConfig) -> EmpiricalDistribution:
    """One statistic per replication, standardized as (L - a_n)/b_n and sorted.

    Replication r always uses stream (master_seed, r); results are placed by r,
    so the output does not depend on `workers`.
    """
    norm = ensemble_normalization(config)
    compute = _statistic_fn(config)

    def one(r: int) -> float:
        try:
            return compute(derive_stream(SeedSpec(config.master_seed, r)))
        except ToolkitError as exc:
            raise with_replication(exc, r) from exc

    reps = range(config.replications)
    if config.workers == 1:
        raw = np.fromiter((one(r) for r in reps), dtype=np.float64, count=config.replications)
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            raw = np.fromiter(pool.map(one, reps), dtype=np.float64, count=config.replications)

    standardized = (raw - norm.a_n) / norm.b_n
    logger.info("ensemble %s n=%d R=%d done (a_n=%.6f, b_n=%.6f)",
                config.statistic.value, config.n, config.replications, norm.a_n, norm.b_n)
    return EmpiricalDistribution(
        samples=np.sort(standardized),
        n=config.n,
        replications=config.replications,
        statistic=config.statistic,
        raw=raw,
        standardized=standardized,
    )


# =============================================================================
# Goodness of fit
# =============================================================================

@dataclass(frozen=True)
class GofReport:
    """KS statistic against a reference law, judged by the exact one-sample KS law."""
    statistic: float
    p_value: float
    critical: float
    level: float
    replications: int


def _sorted_samples(emp: Union[EmpiricalDistribution, Sequence[float]]) -> np.ndarray:
    xs = emp.samples if isinstance(emp, EmpiricalDistribution) else np.sort(np.asarray(emp, dtype=float))
    if xs.size == 0:
        raise DomainError("empirical distribution is empty")
    return xs


def _kstest(xs: np.ndarray, cdf: Callable[[float], float]):
    # scalar cdfs (gumbel_cdf validates one float at a time) need lifting to arrays
    return stats.kstest(xs, np.vectorize(cdf, otypes=[float]))


def ks_distance(emp: Union[EmpiricalDistribution, Sequence[float]],
                cdf: Callable[[float], float] = gumbel_cdf) -> float:
    """sup_x |F_emp(x) - cdf(x)|, evaluated at the jump points."""
    return float(_kstest(_sorted_samples(emp), cdf).statistic)


def ks_critical(replications: int, level: float = 0.99) -> float:
    """`level` quantile of the KS statistic for `replications` samples from the reference law."""
    if isinstance(replications, bool) or int(replications) != replications or replications < 1:
        raise DomainError(f"replications must be a positive integer, got {replications!r}")
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    return float(stats.kstwo.ppf(level, int(replications)))


def gof_report(emp: Union[EmpiricalDistribution, Sequence[float]],
               cdf: Callable[[float], float] = gumbel_cdf, level: float = 0.99) -> GofReport:
    xs = _sorted_samples(emp)
    result = _kstest(xs, cdf)
    return GofReport(
        statistic=float(result.statistic),
        p_value=float(result.pvalue),
        critical=ks_critical(xs.size, level),
        level=level,
        replications=int(xs.size),
    )


# =============================================================================
# Monte Carlo oracles
# =============================================================================

@dataclass(frozen=True)
class OracleEstimate:
    mean: float
    std_error: float
    replications: int
    median_of_means: Optional[float] = None

    def __post_init__(self):
        if self.replications < 2:
            raise DomainError(f"an oracle estimate needs >= 2 replications, got {self.replications}")
        if not self.std_error >= 0:
            raise DomainError(f"std_error must be >= 0, got {self.std_error}")


def _check_reps(reps: int) -> int:
    if reps < 2:
        raise DomainError(f"reps must be >= 2, got {reps}")
    return int(reps)


def _binomial(hits: int, reps: int) -> OracleEstimate:
    p = hits / reps
    return OracleEstimate(p, math.sqrt(p * (1.0 - p) / reps), reps)


def mc_p_inf(a: float, horizon: int = P_INF_HORIZON, reps: int = 100_000,
             master_seed: int = 0) -> OracleEstimate:
    """Fraction of N(-a/2, a) walks with Z_1..Z_horizon all < 0.

    Walks are retired once they sit below ESCAPE_LEVEL at a block boundary;
    since e^{Z} is a martingale the chance of returning to 0 from there is
    below e^{-40}.
    """
    a = check_positive(a, "a")
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    reps = _check_reps(reps)
    stream = derive_stream(SeedSpec(master_seed, 0))
    mean_step, sd_step = -a / 2.0, math.sqrt(a)

    crossed_total = 0
    for start in range(0, reps, BATCH):
        m = min(BATCH, reps - start)
        z = np.zeros(m)
        crossed = np.zeros(m, dtype=bool)
        alive = np.arange(m)
        t = 0
        while alive.size and t < horizon:
            steps = min(STEP_BLOCK, horizon - t)
            walk = z[alive, None] + np.cumsum(mean_step + sd_step * stream.normals((alive.size, steps)), axis=1)
            hit = (walk >= 0.0).any(axis=1)
            crossed[alive[hit]] = True
            z[alive] = walk[:, -1]
            alive = alive[~hit & (walk[:, -1] >= ESCAPE_LEVEL)]
            t += steps
        crossed_total += int(crossed.sum())

    est = _binomial(reps - crossed_total, reps)
    logger.info("mc_p_inf(a=%g): %.6f +/- %.6f over %d walks", a, est.mean, est.std_error, reps)
    return est


def mc_pickands_f(a: float, T: float = PICKANDS_T, reps: int = 100_000,
                  master_seed: int = 0, groups: int = 10) -> OracleEstimate:
    """mean(e^M)/T with M = max(0, Z_1..Z_N), N = floor(T/a), steps N(-a/2, a).

    e^M has only a boundary exponential moment, so the sample mean converges
    slowly from below and std_error understates the error. median_of_means is
    reported alongside. Treat the result as a loose lower oracle for F(a).
    """
    a = check_positive(a, "a")
    T = check_positive(T, "T")
    if T < a:
        raise DomainError(f"T must be >= a, got T={T:g}, a={a:g}")
    reps = _check_reps(reps)
    steps = int(math.floor(T / a))
    stream = derive_stream(SeedSpec(master_seed, 0))
    mean_step, sd_step = -a / 2.0, math.sqrt(a)

    values = np.empty(reps)
    rows = max(1, BATCH * 16 // max(steps, 1))
    for start in range(0, reps, rows):
        m = min(rows, reps - start)
        walk = np.cumsum(mean_step + sd_step * stream.normals((m, steps)), axis=1)
        values[start:start + m] = np.exp(np.maximum(walk.max(axis=1), 0.0))

    groups = max(1, min(groups, reps))
    mom = float(np.median([g.mean() for g in np.array_split(values, groups)])) / T
    est = OracleEstimate(
        mean=float(values.mean()) / T,
        std_error=float(values.std(ddof=1)) / math.sqrt(reps) / T,
        replications=reps,
        median_of_means=mom,
    )
    logger.info("mc_pickands_f(a=%g, T=%g): %.6f +/- %.6f (median of means %.6f)",
                a, T, est.mean, est.std_error, mom)
    return est


def mc_pickands_f_via_walk(a: float, horizon: int = P_INF_HORIZON, reps: int = 100_000,
                           master_seed: int = 0) -> OracleEstimate:
    """F(a) as p^2/a with p from mc_p_inf; delta-method standard error."""
    p = mc_p_inf(a, horizon, reps, master_seed)
    return OracleEstimate(p.mean ** 2 / a, 2.0 * p.mean * p.std_error / a, reps)


def mc_grid_exceedance(region: RegionRect, u: float, mesh: float, reps: int = 10_000,
                       master_seed: int = 0, workers: int = 1) -> OracleEstimate:
    """Frequency of sup over K on the mesh of (B(x+y) - B(x))/sqrt(y) exceeding u.

    Replication r simulates the Brownian path on [x_lo, x_hi + y_hi] from
    stream (master_seed, r).
    """
    u = check_positive(u, "u")
    q = check_positive(mesh, "mesh")
    reps = _check_reps(reps)
    # Mesh indices; the simulated path starts at the first x-point of K.
    ix0 = math.ceil(region.x_lo / q - 1e-9)
    x0, x1 = 0, math.floor(region.x_hi / q + 1e-9) - ix0
    d0 = max(1, math.ceil(region.y_lo / q - 1e-9))
    d1 = math.floor(region.y_hi / q + 1e-9)
    if x1 < x0 or d1 < d0:
        raise DomainError(f"mesh {q:g} has no points inside the region")
    length = x1 + d1
    step = math.sqrt(q)
    rows = max(1, min(1024, reps))

    def batch(start: int) -> int:
        m = min(rows, reps - start)
        s = np.zeros((m, length + 1))
        for row in range(m):
            stream = derive_stream(SeedSpec(master_seed, start + row))
            np.cumsum(stream.normals(length) * step, out=s[row, 1:])
        top = np.full(m, -np.inf)
        for d in range(d0, d1 + 1):
            vals = (s[:, x0 + d:x1 + d + 1] - s[:, x0:x1 + 1]) / math.sqrt(d * q)
            np.maximum(top, vals.max(axis=1), out=top)
        return int((top > u).sum())

    starts = range(0, reps, rows)
    if workers == 1:
        hits = sum(batch(s0) for s0 in starts)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(batch, starts))

    est = _binomial(hits, reps)
    logger.info("mc_grid_exceedance(u=%g, q=%g): %.6f +/- %.6f", u, q, est.mean, est.std_error)
    return est


def shao_ratio_trend(ns: Sequence[int], reps: int = 200, master_seed: int = 0,
                     workers: int = 1) -> list[tuple[int, float]]:
    """Mean of L_n/sqrt(2 log n) for each n."""
    reps = _check_reps(reps)
    ns = [int(n) for n in ns]
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ArgumentError(f"ns must be non-empty and strictly increasing, got {ns}")
    trend = []
    for n in ns:
        emp = run_ensemble(EnsembleConfig(Statistic.MAIN_DISCRETE, n, reps, master_seed, workers=workers))
        trend.append((n, float(np.mean(emp.raw)) / math.sqrt(2.0 * math.log(n))))
    return trend
