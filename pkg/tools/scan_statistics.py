# tools/scan_statistics.py
"""
Maxima of standardized Gaussian increments on a single path.

Provides:
  - SamplePath (increments + prefix sums)
  - scan_max_naive / scan_max_pruned: max over 0 <= i < j <= n of
    (S_j - S_i)/sqrt(j - i); the pruned scanner returns the identical pair
  - erdos_renyi_window, darling_erdos_max: the window and anchored variants
  - brownian_grid_sup, fixed_lag_sup: Brownian-mesh versions
  - excursion_tail_rect, excursion_tail_rect_grid: tail asymptotics of the
    standardized-increment field over a rectangle of (position, length)

Maximizers are deterministic: largest value, then smallest j - i, then
smallest i.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from .errors import ArgumentError, DomainError, check_positive
from .normal_analytics import clump_g

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_SIZE = 64
MAX_BLOCKS = 2048
SEED_FACTOR = 8

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# =============================================================================
# Types
# =============================================================================

@dataclass(frozen=True, eq=False)
class SamplePath:
    increments: np.ndarray
    prefix_sums: np.ndarray

    @classmethod
    def from_increments(cls, increments: Sequence[float]) -> "SamplePath":
        x = np.asarray(increments, dtype=np.float64).reshape(-1)
        if x.size == 0:
            raise DomainError("path has no increments")
        if not np.all(np.isfinite(x)):
            raise DomainError("path increments must be finite")
        s = np.empty(x.size + 1, dtype=np.float64)
        s[0] = 0.0
        np.cumsum(x, out=s[1:])
        return cls(increments=x, prefix_sums=s)

    @property
    def n(self) -> int:
        return int(self.increments.size)


@dataclass(frozen=True)
class ScanResult:
    value: float
    i: int
    j: int
    pairs_examined: int


@dataclass(frozen=True)
class WindowStat:
    value: float
    k: int
    window: int


@dataclass(frozen=True)
class RegionRect:
    """K = [x_lo, x_hi] x [y_lo, y_hi]: interval positions x and lengths y."""
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self):
        vals = (self.x_lo, self.x_hi, self.y_lo, self.y_hi)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError(f"region bounds must be finite, got {vals}")
        if not self.x_lo < self.x_hi:
            raise DomainError(f"need x_lo < x_hi, got [{self.x_lo}, {self.x_hi}]")
        if not 0.0 < self.y_lo < self.y_hi:
            raise DomainError(f"need 0 < y_lo < y_hi, got [{self.y_lo}, {self.y_hi}]")

    def measure(self) -> float:
        """int_K dx dy / y^2."""
        return (self.x_hi - self.x_lo) * (1.0 / self.y_lo - 1.0 / self.y_hi)


@dataclass(frozen=True)
class TailProbability:
    """Asymptotic tail value, clamped to [0, 1]; `raw` is the unclamped formula."""
    value: float
    clamped: bool
    raw: float


def dyadic_rectangle(k: int, l: int) -> RegionRect:
    """R_{k,l} = [2^{l+1} k, 2^{l+1}(k+1)] x [2^l, 2^{l+1}]; its measure is 1."""
    width = 2.0 ** (l + 1)
    return RegionRect(width * k, width * (k + 1), 2.0 ** l, width)


# =============================================================================
# Full scan
# =============================================================================

def _check_min_sep(path: SamplePath, min_sep: int) -> int:
    if path.n < 1:
        raise DomainError("path has no increments")
    min_sep = int(min_sep)
    if min_sep < 1:
        raise DomainError(f"min_sep must be >= 1, got {min_sep}")
    if min_sep > path.n:
        raise DomainError(f"min_sep={min_sep} exceeds path length n={path.n}")
    return min_sep


class _Best:
    """Running maximizer with the (value desc, d asc, i asc) order."""

    def __init__(self):
        self.value = -math.inf
        self.i = 0
        self.d = 0
        self.examined = 0

    def offer(self, value: float, i: int, d: int) -> None:
        if value > self.value or (value == self.value and (d, i) < (self.d, self.i)):
            self.value, self.i, self.d = value, i, d

    def scan_lag(self, s: np.ndarray, d: int) -> None:
        vals = (s[d:] - s[:-d]) / np.sqrt(float(d))
        i = int(np.argmax(vals))
        self.examined += vals.size
        if vals[i] > self.value:
            self.value, self.i, self.d = float(vals[i]), i, d

    def result(self) -> ScanResult:
        return ScanResult(self.value, self.i, self.i + self.d, self.examined)


def scan_max_naive(path: SamplePath, min_sep: int = 1, anchored: bool = False) -> ScanResult:
    """Exhaustive max of (S_j - S_i)/sqrt(j - i) over j - i >= min_sep.

    With anchored=True only i = 0 is admitted.
    """
    min_sep = _check_min_sep(path, min_sep)
    s = path.prefix_sums
    best = _Best()
    if anchored:
        d = np.arange(min_sep, path.n + 1)
        vals = (s[min_sep:] - s[0]) / np.sqrt(d.astype(np.float64))
        k = int(np.argmax(vals))
        return ScanResult(float(vals[k]), 0, int(d[k]), int(vals.size))
    for d in range(min_sep, path.n + 1):
        best.scan_lag(s, d)
    return best.result()


def _block_layout(points: int, block_size: int) -> int:
    size = block_size
    if points < 4 * size:
        size = max(2, math.isqrt(points))
    return max(size, -(-points // MAX_BLOCKS))


def scan_max_pruned(path: SamplePath, min_sep: int = 1,
                    block_size: int = DEFAULT_BLOCK_SIZE) -> ScanResult:
    """Same (value, i, j) as scan_max_naive, by block branch-and-bound.

    Every lag up to SEED_FACTOR * min_sep is scanned first to get a lower bound.
    The prefix sums are then cut into blocks with stored max/min; a pair of
    blocks bounds (S_j - S_i)/sqrt(j - i) from above for all longer lags it
    contains, and block pairs are descended in decreasing bound order until the
    bound falls strictly below the running maximum.
    """
    min_sep = _check_min_sep(path, min_sep)
    if block_size < 2:
        raise DomainError(f"block_size must be >= 2, got {block_size}")
    s = path.prefix_sums
    n = path.n
    best = _Best()

    seed_hi = min(n, SEED_FACTOR * min_sep)
    for d in range(min_sep, seed_hi + 1):
        best.scan_lag(s, d)
    if seed_hi >= n:
        return best.result()

    points = n + 1
    size = _block_layout(points, block_size)
    blocks = -(-points // size)
    padded_hi = np.full(blocks * size, -np.inf)
    padded_lo = np.full(blocks * size, np.inf)
    padded_hi[:points] = s
    padded_lo[:points] = s
    block_max = padded_hi.reshape(blocks, size).max(axis=1)
    block_min = padded_lo.reshape(blocks, size).min(axis=1)
    first = np.arange(blocks) * size
    last = np.minimum(first + size - 1, n)

    bi, bj = np.triu_indices(blocks)
    d_lo = np.maximum(seed_hi + 1, first[bj] - last[bi])
    d_hi = last[bj] - first[bi]
    live = d_hi >= d_lo
    bi, bj, d_lo, d_hi = bi[live], bj[live], d_lo[live], d_hi[live]
    num = block_max[bj] - block_min[bi]
    bound = np.where(num > 0, num / np.sqrt(d_lo.astype(np.float64)),
                     num / np.sqrt(d_hi.astype(np.float64)))
    order = np.argsort(-bound, kind="stable")

    visited = 0
    for idx in order:
        if bound[idx] < best.value:
            break
        visited += 1
        ii = np.arange(first[bi[idx]], last[bi[idx]] + 1)[:, None]
        jj = np.arange(first[bj[idx]], last[bj[idx]] + 1)[None, :]
        dd = jj - ii
        mask = dd > seed_hi
        count = int(mask.sum())
        if count == 0:
            continue
        best.examined += count
        vals = np.where(mask, (s[jj] - s[ii]) / np.sqrt(np.where(mask, dd, 1).astype(np.float64)), -np.inf)
        top = vals.max()
        if top < best.value:
            continue
        rows, cols = np.nonzero(vals == top)
        cand_d = dd[rows, cols]
        cand_i = ii[rows, 0]
        pick = np.lexsort((cand_i, cand_d))[0]
        best.offer(float(top), int(cand_i[pick]), int(cand_d[pick]))

    logger.debug("pruned scan n=%d: %d of %d block pairs descended, %d pairs evaluated",
                 n, visited, bound.size, best.examined)
    return best.result()


# =============================================================================
# Window statistics
# =============================================================================

def window_length(n: int, c: float) -> int:
    """l_n = floor(c log n)."""
    c = check_positive(c, "c")
    return int(math.floor(c * math.log(n))) if n >= 1 else 0


def erdos_renyi_window(path: SamplePath, c: float) -> WindowStat:
    """max_k (S_{k+l} - S_k)/sqrt(l) with l = floor(c log n); smallest k on ties."""
    n = path.n
    l = window_length(n, c)
    if l < 1 or l > n:
        raise DomainError(f"window length floor({c:g} log {n}) = {l} outside [1, {n}]")
    s = path.prefix_sums
    vals = (s[l:] - s[:-l]) / np.sqrt(float(l))
    k = int(np.argmax(vals))
    return WindowStat(float(vals[k]), k, l)


def darling_erdos_max(path: SamplePath) -> WindowStat:
    """max_k S_k/sqrt(k); the maximizing k is reported in both k and window."""
    if path.n < 1:
        raise DomainError("path has no increments")
    s = path.prefix_sums
    vals = s[1:] / np.sqrt(np.arange(1, path.n + 1, dtype=np.float64))
    k = int(np.argmax(vals)) + 1
    return WindowStat(float(vals[k - 1]), k, k)


# =============================================================================
# Brownian mesh
# =============================================================================

def _check_mesh(path: SamplePath, n: int, oversample: int) -> float:
    if n < 1 or oversample < 1:
        raise DomainError(f"need n >= 1 and oversample >= 1, got n={n}, oversample={oversample}")
    if path.n != n * oversample:
        raise ArgumentError(
            f"path has {path.n} increments, expected n*oversample = {n * oversample}"
        )
    return 1.0 / (n * oversample)


def brownian_grid_sup(path: SamplePath, n: int, oversample: int) -> ScanResult:
    """sup of (B(x2) - B(x1))/sqrt(x2 - x1) over mesh pairs with x2 - x1 >= 1/n.

    `path` holds N(0, q) increments on the mesh q = 1/(n * oversample); indices
    are reported in mesh units. The grid value never exceeds the continuous sup.
    """
    q = _check_mesh(path, n, oversample)
    raw = scan_max_pruned(path, min_sep=oversample)
    return ScanResult(raw.value / math.sqrt(q), raw.i, raw.j, raw.pairs_examined)


def fixed_lag_sup(path: SamplePath, n: int, oversample: int) -> WindowStat:
    """sup over mesh pairs with x2 - x1 = 1/n exactly."""
    q = _check_mesh(path, n, oversample)
    s = path.prefix_sums
    vals = (s[oversample:] - s[:-oversample]) / math.sqrt(oversample * q)
    k = int(np.argmax(vals))
    return WindowStat(float(vals[k]), k, oversample)


# =============================================================================
# Tail asymptotics
# =============================================================================

def _clamp(raw: float, what: str) -> TailProbability:
    if 0.0 <= raw <= 1.0:
        return TailProbability(raw, False, raw)
    logger.warning("%s = %.4g is outside [0, 1]; threshold is too low for the asymptotic", what, raw)
    return TailProbability(min(max(raw, 0.0), 1.0), True, raw)


def excursion_tail_rect(region: RegionRect, u: float) -> TailProbability:
    """(1/(4 sqrt(2 pi))) int_K dx dy/y^2 * u^3 e^{-u^2/2}."""
    u = check_positive(u, "u")
    raw = 0.25 * _INV_SQRT_2PI * region.measure() * u ** 3 * math.exp(-0.5 * u * u)
    return _clamp(raw, "excursion_tail_rect")


def excursion_tail_rect_grid(region: RegionRect, u: float, a: float,
                             tol: float = 1e-10, series_tol: float = 1e-9) -> TailProbability:
    """Grid version on K intersected with q Z^2, a = lim q u^2.

    (1/sqrt(2 pi)) (x_hi - x_lo) int_{y_lo}^{y_hi} G(y; a) dy * u^3 e^{-u^2/2}.
    """
    u = check_positive(u, "u")
    a = check_positive(a, "a")
    y_mass, y_err = integrate.quad(lambda y: clump_g(y, a, series_tol)[0],
                                   region.y_lo, region.y_hi, epsabs=tol, epsrel=0.0, limit=200)
    logger.debug("int G(y; %g) over [%g, %g] = %.12g (+/- %.1e)", a, region.y_lo, region.y_hi, y_mass, y_err)
    raw = _INV_SQRT_2PI * (region.x_hi - region.x_lo) * y_mass * u ** 3 * math.exp(-0.5 * u * u)
    return _clamp(raw, "excursion_tail_rect_grid")
