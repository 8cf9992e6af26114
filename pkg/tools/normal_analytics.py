# tools/normal_analytics.py
"""
Closed-form quantities behind the Gumbel limits of standardized Gaussian
increment maxima.

Provides:
  - std_normal_cdf / gumbel_cdf / gumbel_quantile
  - spitzer_p_inf: never-crossing probability of the drifted Gaussian walk,
    summed from the Spitzer series with a rigorous truncation bound
  - pickands_f / clump_g: the grid clump constants F(a) and G(y; a)
  - constant_h / clump_integral / h_integrand: the constant H, by the y-form
    and the a-form integrals
  - normalization: (a_n, b_n) for the five maxima statistics
  - rate_table / evr_value / rate_normalization: asymptotic extreme-value rates
  - expansion_check / types_equivalence_check: rate-to-constants bookkeeping

Everything here is a pure function of its arguments. The only shared state is
the per-process cache of H and F(4/c) used by `normalization`, filled once
under a lock.
"""

import logging
import math
import threading
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, special

from .errors import ArgumentError, ConvergenceBudgetError, DomainError, check_finite, check_positive

logger = logging.getLogger(__name__)

DEFAULT_MAX_TERMS = 100_000_000
CACHE_TOL = 1e-4
QUAD_LIMIT = 200

_EPS = float(np.finfo(float).eps)
_LOG_2_SQRT_PI = math.log(2.0 * math.sqrt(math.pi))
_SERIES_CHUNK = 1 << 20


# =============================================================================
# Types
# =============================================================================

class Theorem(str, Enum):
    IID_MAX = "IID_MAX"
    DARLING_ERDOS = "DARLING_ERDOS"
    MAIN_DISCRETE = "MAIN_DISCRETE"
    ERDOS_RENYI = "ERDOS_RENYI"
    BROWNIAN_CONTINUOUS = "BROWNIAN_CONTINUOUS"


class HMethod(str, Enum):
    Y_FORM = "Y_FORM"
    A_FORM = "A_FORM"


@dataclass(frozen=True)
class SpitzerParams:
    """Grid step `a` of the walk and the absolute tolerance on the series tail."""
    a: float
    tol: float

    def __post_init__(self):
        check_positive(self.a, "a")
        tol = check_finite(self.tol, "tol")
        if not 0.0 < tol < 1.0:
            raise DomainError(f"tol must lie in (0, 1), got {tol}")


@dataclass(frozen=True)
class PickandsEvaluation:
    a: float
    p_inf: float
    f_value: float
    err_bound: float


@dataclass(frozen=True)
class HEstimate:
    value: float
    err_bound: float
    method: HMethod


@dataclass(frozen=True)
class NormalizationPair:
    a_n: float
    b_n: float
    theorem: Theorem
    n: float
    aux: Optional[float] = None

    def threshold(self, tau: float) -> float:
        """u_n = a_n + b_n * tau."""
        return self.a_n + self.b_n * tau


@dataclass(frozen=True)
class RateTableEntry:
    """One row f(n) = coef * n^n_power * (log n)^log_power * (log log n)^has_loglog."""
    row_id: int
    coef: float
    n_power: int
    log_power: int
    has_loglog: bool
    label: str = ""

    def __post_init__(self):
        if self.row_id not in range(1, 8):
            raise DomainError(f"row_id must be in 1..7, got {self.row_id}")
        if not self.coef > 0:
            raise DomainError(f"coef must be > 0, got {self.coef}")
        if self.n_power not in (0, 1) or self.log_power not in (0, 1, 2):
            raise DomainError(f"unsupported powers n^{self.n_power} (log n)^{self.log_power}")


# =============================================================================
# Distribution functions
# =============================================================================

def std_normal_cdf(x: float) -> float:
    """Phi(x). scipy's ndtr switches to erfc in the tails, so Phi(-6) keeps full relative accuracy."""
    x = check_finite(x, "x")
    return float(special.ndtr(x))


def gumbel_cdf(tau: float) -> float:
    tau = check_finite(tau, "tau")
    with np.errstate(over="ignore"):
        return float(np.exp(-np.exp(-tau)))


def gumbel_quantile(p: float) -> float:
    p = check_finite(p, "p")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    return -math.log(-math.log(p))


# =============================================================================
# Spitzer series
# =============================================================================

def _log_tail_bound(a: float, terms: int) -> float:
    # log of sum_{k>K} e^{-ak/8}/(2k) <= e^{-a(K+1)/8} / (2(K+1)(1 - e^{-a/8}))
    return -a * (terms + 1) / 8.0 - math.log(2.0 * (terms + 1)) - math.log(-math.expm1(-a / 8.0))


def _choose_terms(a: float, tol: float, max_terms: int) -> int:
    """Smallest K whose Chernoff tail bound is <= tol (doubling, then bisection)."""
    log_tol = math.log(tol)
    hi = 1
    while _log_tail_bound(a, hi) > log_tol:
        if hi > max_terms:
            raise ConvergenceBudgetError(
                f"Spitzer series for a={a:g}, tol={tol:g} needs more than {max_terms} terms"
            )
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _log_tail_bound(a, mid) <= log_tol:
            hi = mid
        else:
            lo = mid
    if hi > max_terms:
        raise ConvergenceBudgetError(
            f"Spitzer series for a={a:g}, tol={tol:g} needs {hi} terms (cap {max_terms})"
        )
    return hi


def _series_sum(a: float, terms: int) -> float:
    """sum_{k=1}^{K} Phi(-sqrt(a k)/2) / k, in chunks so K near the cap stays in memory."""
    partial = []
    for start in range(1, terms + 1, _SERIES_CHUNK):
        k = np.arange(start, min(start + _SERIES_CHUNK, terms + 1), dtype=np.float64)
        partial.append(float(np.sum(special.ndtr(-np.sqrt(a * k) / 2.0) / k)))
    return math.fsum(partial)


def _p_inf(a: float, tol: float, max_terms: int) -> tuple[float, float]:
    terms = _choose_terms(a, tol, max_terms)
    s = _series_sum(a, terms)
    p = math.exp(-s)
    tail = math.exp(_log_tail_bound(a, terms))
    # exp(-S_K) overestimates exp(-S) by the factor exp(tail).
    rounding = p * s * (math.log2(terms) + 8.0) * _EPS
    err = p * -math.expm1(-tail) + rounding
    logger.debug("p_inf(a=%g): %d terms, tail bound %.3e, p=%.17g", a, terms, tail, p)
    return p, err


def spitzer_p_inf(params: SpitzerParams, max_terms: int = DEFAULT_MAX_TERMS) -> tuple[float, float]:
    """Probability that the walk with N(-a/2, a) steps never enters (0, inf).

    Returns (p_inf, err_bound). The series is truncated a priori at the first K
    whose Chernoff tail bound drops below `params.tol`; err_bound covers that
    truncation plus summation rounding.
    """
    return _p_inf(params.a, params.tol, int(max_terms))


def pickands_f(a: float, tol: float = 1e-10, max_terms: int = DEFAULT_MAX_TERMS) -> PickandsEvaluation:
    """F(a) = p_inf(a)^2 / a."""
    params = SpitzerParams(a, tol)
    p, dp = spitzer_p_inf(params, max_terms)
    f_value = p * p / params.a
    err = (2.0 * p * dp + dp * dp) / params.a
    return PickandsEvaluation(a=params.a, p_inf=p, f_value=f_value, err_bound=err)


def clump_g(y: float, a: float = 2.0, tol: float = 1e-10,
            max_terms: int = DEFAULT_MAX_TERMS) -> tuple[float, float]:
    """Clump intensity G(y; a) = F(a/y)^2 / y^2, with its error bound."""
    y = check_positive(y, "y")
    a = check_positive(a, "a")
    ev = pickands_f(a / y, tol, max_terms)
    f, df = ev.f_value, ev.err_bound
    return f * f / (y * y), (2.0 * f * df + df * df) / (y * y)


# =============================================================================
# Constant H
# =============================================================================

def _quad(func, lo: float, hi: float, epsabs: float, limit: int,
          points: Sequence[float] = ()) -> tuple[float, float]:
    inner = [p for p in points if lo < p < hi] or None
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            return integrate.quad(func, lo, hi, epsabs=epsabs, epsrel=0.0,
                                  limit=limit, points=inner)
        except integrate.IntegrationWarning as exc:
            raise ConvergenceBudgetError(
                f"quadrature on [{lo:g}, {hi:g}] did not reach {epsabs:.1e}: {exc}"
            ) from exc


def h_integrand(y: float, tol: float = 1e-10, max_terms: int = DEFAULT_MAX_TERMS) -> float:
    """exp{-4 sum_k Phi(-sqrt(k/(2y)))/k} = p_inf(2/y)^4 = 4 G(y; 2)."""
    y = check_positive(y, "y")
    p, _ = _p_inf(min(2.0 / y, 1e12), tol, max_terms)
    return p ** 4


def _h_a_form(tol: float, y_upper: Optional[float], limit: int, max_terms: int) -> HEstimate:
    rho = tol / 16.0

    def f_of(a: float) -> float:
        p, _ = _p_inf(a, rho, max_terms)
        return p * p / a

    def f_squared(a: float) -> float:
        return f_of(a) ** 2

    cut_a = 50.0
    if y_upper is not None:
        lower = 2.0 / y_upper
        cut_a = max(cut_a, 2.0 * lower)
    p_cut = _p_inf(cut_a, rho, max_terms)[0]
    while 2.0 * (1.0 - p_cut ** 4) / cut_a > tol / 4.0:
        cut_a *= 2.0
        p_cut = _p_inf(cut_a, rho, max_terms)[0]
    upper, upper_err = 1.0 / cut_a, (1.0 - p_cut ** 4) / cut_a

    if y_upper is None:
        # F is decreasing with F(0+) = 1/2, so the trapezoid on [0, eps] is bracketed.
        lower = 1e-3
        f_low = f_of(lower)
        while lower * (0.25 - f_low ** 2) > tol / 4.0:
            lower /= 2.0
            f_low = f_of(lower)
        head, head_err = lower * (0.25 + f_low ** 2) / 2.0, lower * (0.25 - f_low ** 2) / 2.0
    else:
        head, head_err = 0.0, 0.0

    body, body_err = _quad(f_squared, lower, cut_a, tol / 8.0, limit, points=(0.1, 1.0, 10.0))
    logger.debug("A_FORM: body [%g, %g] = %.10f (+/- %.1e), tail 1/A = %.3e", lower, cut_a, body, body_err, upper)

    series_err = 2.0 * 4.5 * rho * (body + head + upper)
    value = 2.0 * (head + body + upper)
    err = 2.0 * (head_err + body_err + upper_err) + series_err
    return HEstimate(value=value, err_bound=err, method=HMethod.A_FORM)


def _h_y_form(tol: float, y_upper: Optional[float], limit: int, max_terms: int) -> HEstimate:
    rho = tol / 16.0

    def integrand(y: float) -> float:
        if y <= 0.0:
            return 1.0
        p, _ = _p_inf(min(2.0 / y, 1e12), rho, max_terms)
        return p ** 4

    if y_upper is None:
        # Beyond Y the integral equals 2 * int_0^{2/Y} F(a)^2 da.
        cut_y = 100.0
        while True:
            alpha = 2.0 / cut_y
            p_alpha = _p_inf(alpha, rho, max_terms)[0]
            f_alpha = p_alpha * p_alpha / alpha
            tail_err = alpha * (0.25 - f_alpha ** 2)
            if tail_err <= tol / 4.0:
                break
            cut_y *= 2.0
        tail = alpha * (0.25 + f_alpha ** 2)
    else:
        cut_y, tail, tail_err = y_upper, 0.0, 0.0

    body, body_err = _quad(integrand, 0.0, cut_y, tol / 4.0, limit, points=(1.0, 10.0, 100.0))
    logger.debug("Y_FORM: body [0, %g] = %.10f (+/- %.1e), tail %.3e", cut_y, body, body_err, tail)

    series_err = 4.5 * rho * body
    return HEstimate(value=body + tail, err_bound=body_err + tail_err + series_err, method=HMethod.Y_FORM)


def constant_h(tol: float = 1e-3, method: HMethod = HMethod.A_FORM,
               y_upper: Optional[float] = None, limit: int = QUAD_LIMIT,
               max_terms: int = DEFAULT_MAX_TERMS) -> HEstimate:
    """H = 4 int_0^inf G(y) dy, evaluated by one of two equivalent integrals.

    A_FORM integrates 2 F(a)^2 over a in (0, inf) (substitution a = 2/y),
    Y_FORM integrates p_inf(2/y)^4 over y in (0, inf). With `y_upper` the
    y-range is truncated to (0, y_upper] and no tail term is added.
    """
    tol = check_finite(tol, "tol")
    if not 0.0 < tol <= 0.01:
        raise DomainError(f"tol must lie in (0, 0.01], got {tol}")
    method = HMethod(method)
    if y_upper is not None:
        y_upper = check_positive(y_upper, "y_upper")

    if method is HMethod.A_FORM:
        estimate = _h_a_form(tol, y_upper, limit, max_terms)
    else:
        estimate = _h_y_form(tol, y_upper, limit, max_terms)

    if estimate.err_bound > tol:
        raise ConvergenceBudgetError(
            f"H ({method.value}) error bound {estimate.err_bound:.2e} exceeds tol {tol:.1e}"
        )
    logger.info("H (%s) = %.8f +/- %.1e", method.value, estimate.value, estimate.err_bound)
    return estimate


def clump_integral(tol: float = 1e-3, method: HMethod = HMethod.A_FORM,
                   limit: int = QUAD_LIMIT, max_terms: int = DEFAULT_MAX_TERMS) -> HEstimate:
    """int_0^inf G(y; 2) dy = H / 4."""
    h = constant_h(tol, method, limit=limit, max_terms=max_terms)
    return HEstimate(value=h.value / 4.0, err_bound=h.err_bound / 4.0, method=h.method)


# =============================================================================
# Constants cache
# =============================================================================

_cache_lock = threading.Lock()
_cache: dict = {}


def cached_constant_h() -> float:
    with _cache_lock:
        if "H" not in _cache:
            _cache["H"] = constant_h(CACHE_TOL, HMethod.A_FORM).value
        return _cache["H"]


def cached_pickands_f(a: float) -> float:
    key = ("F", float(a))
    with _cache_lock:
        if key not in _cache:
            _cache[key] = pickands_f(a, CACHE_TOL).f_value
        return _cache[key]


# =============================================================================
# Normalizing constants
# =============================================================================

_MIN_N = {
    Theorem.IID_MAX: 3.0,
    Theorem.MAIN_DISCRETE: 3.0,
    Theorem.ERDOS_RENYI: 3.0,
    Theorem.BROWNIAN_CONTINUOUS: 3.0,
    Theorem.DARLING_ERDOS: 16.0,
}


def normalization(theorem: Theorem, n: float, aux: Optional[float] = None) -> NormalizationPair:
    """Exact (a_n, b_n) of the Gumbel limit for the selected statistic.

    aux is the window constant c for ERDOS_RENYI and ignored otherwise.
    """
    theorem = Theorem(theorem)
    n = check_finite(n, "n")
    if n < _MIN_N[theorem]:
        raise DomainError(f"{theorem.value} needs n >= {_MIN_N[theorem]:g}, got {n:g}")

    log_n = math.log(n)
    if theorem is Theorem.DARLING_ERDOS:
        loglog_n = math.log(log_n)
        scale = math.sqrt(2.0 * loglog_n)
        offset = 0.5 * math.log(loglog_n) - _LOG_2_SQRT_PI
        return NormalizationPair(scale + offset / scale, 1.0 / scale, theorem, n)

    scale = math.sqrt(2.0 * log_n)
    loglog_n = math.log(log_n)
    if theorem is Theorem.IID_MAX:
        offset = -0.5 * loglog_n - _LOG_2_SQRT_PI
    elif theorem is Theorem.MAIN_DISCRETE:
        offset = 0.5 * loglog_n + math.log(cached_constant_h()) - _LOG_2_SQRT_PI
    elif theorem is Theorem.BROWNIAN_CONTINUOUS:
        offset = 1.5 * loglog_n - _LOG_2_SQRT_PI
    else:
        if aux is None:
            raise ArgumentError("ERDOS_RENYI normalization needs the window constant c")
        c = check_positive(aux, "c")
        offset = -0.5 * loglog_n + math.log((4.0 / c) * cached_pickands_f(4.0 / c)) - _LOG_2_SQRT_PI
        return NormalizationPair(scale + offset / scale, 1.0 / scale, theorem, n, c)
    return NormalizationPair(scale + offset / scale, 1.0 / scale, theorem, n)


# =============================================================================
# Asymptotic extreme-value rates
# =============================================================================

def rate_table(c: float = 1.0) -> list[RateTableEntry]:
    """The seven rows f(n); row 4 uses H and row 6 uses (4/c) F(4/c)."""
    c = check_positive(c, "c")
    return [
        RateTableEntry(1, 1.0, 1, 0, False, "X_k"),
        RateTableEntry(2, 1.0, 0, 1, True, "S_k/sqrt(k)"),
        RateTableEntry(3, 1.0, 0, 1, True, "B(x)/sqrt(x)"),
        RateTableEntry(4, cached_constant_h(), 1, 1, False, "(S_j-S_i)/sqrt(j-i)"),
        RateTableEntry(5, 1.0, 1, 2, False, "Brownian increments, x2-x1 >= 1/n"),
        RateTableEntry(6, (4.0 / c) * cached_pickands_f(4.0 / c), 1, 0, False,
                       f"windows of length [{c:g} log n]"),
        RateTableEntry(7, 1.0, 1, 1, False, "Brownian increments, x2-x1 = 1/n"),
    ]


def evr_value(entry: RateTableEntry, n: float) -> float:
    n = check_finite(n, "n")
    if n < 16:
        raise DomainError(f"rate table needs n >= 16, got {n:g}")
    log_n = math.log(n)
    value = entry.coef * n ** entry.n_power * log_n ** entry.log_power
    if entry.has_loglog:
        value *= math.log(log_n)
    return value


def rate_normalization(entry: RateTableEntry, n: float) -> NormalizationPair:
    """i.i.d. constants evaluated at f(n): (a_{f(n)}, b_{f(n)})."""
    return normalization(Theorem.IID_MAX, evr_value(entry, n))


def expansion_check(c: float, b: float, n: float) -> tuple[float, float]:
    """(exact, expanded) location constant for the rate f(n) = c n (log n)^b."""
    c = check_positive(c, "c")
    b = check_finite(b, "b")
    n = check_finite(n, "n")
    if n < 16:
        raise DomainError(f"n must be >= 16, got {n:g}")
    log_n = math.log(n)
    f_n = c * n * log_n ** b
    if f_n < 3:
        raise DomainError(f"f(n) = {f_n:g} < 3")
    exact = normalization(Theorem.IID_MAX, f_n).a_n
    scale = math.sqrt(2.0 * log_n)
    expanded = scale + ((b - 0.5) * math.log(log_n) + math.log(c) - _LOG_2_SQRT_PI) / scale
    return exact, expanded


def expansion_remainder(c: float, b: float, n: float) -> float:
    exact, expanded = expansion_check(c, b, n)
    return (exact - expanded) * math.sqrt(2.0 * math.log(n))


def _vanishes(errors: np.ndarray, atol: float) -> bool:
    # Final value small and the second half of the grid no worse than the first.
    half = len(errors) // 2
    if errors[-1] > atol:
        return False
    if half == 0:
        return True
    return float(errors[half:].max()) <= float(errors[:half].max())


def types_equivalence_check(a1_seq: Sequence[float], b1_seq: Sequence[float],
                            a2_seq: Sequence[float], b2_seq: Sequence[float],
                            atol: float = 0.05) -> bool:
    """Numerical convergence-of-types test on a common n-grid.

    True iff b1/b2 -> 1 and (a1 - a2)/b1 -> 0, read as: the last deviation is
    within `atol` and the deviations on the later half of the grid do not exceed
    those on the earlier half.
    """
    lengths = {len(a1_seq), len(b1_seq), len(a2_seq), len(b2_seq)}
    if len(lengths) != 1:
        raise ArgumentError(f"sequence lengths differ: {sorted(lengths)}")
    if lengths == {0}:
        raise ArgumentError("sequences are empty")
    a1, b1 = np.asarray(a1_seq, dtype=float), np.asarray(b1_seq, dtype=float)
    a2, b2 = np.asarray(a2_seq, dtype=float), np.asarray(b2_seq, dtype=float)
    if not (np.all(np.isfinite(a1)) and np.all(np.isfinite(a2))):
        raise DomainError("location sequences must be finite")
    if np.any(b1 <= 0) or np.any(b2 <= 0):
        raise DomainError("scale sequences must be > 0")
    return _vanishes(np.abs(b1 / b2 - 1.0), atol) and _vanishes(np.abs((a1 - a2) / b1), atol)
