"""Log-space special functions and adaptive quadrature.

Everything in the likelihood and marginal pipelines is carried as a natural
logarithm until it is reported; ``C(400, 160)`` alone is far beyond the range
of a double.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Tuple

from .exceptions import ConvergenceError, DomainError

__all__ = [
    "LogValue",
    "QuadratureResult",
    "log_gamma",
    "log_beta",
    "log_choose",
    "log_binom_pmf",
    "reg_inc_beta",
    "log_reg_inc_beta",
    "integrate",
    "log_sum_weighted",
]

# Binomial coefficients up to this n are computed from the exact integer.
_EXACT_CHOOSE_MAX_N = 1000

_CF_MAX_ITER = 20000
_CF_EPS = 1e-16
_CF_TINY = 1e-300


@dataclass(frozen=True)
class LogValue:
    """A nonnegative real stored as its natural log.

    ``is_zero`` marks an exact zero; ``log_magnitude`` is then meaningless and
    set to ``-inf``.
    """

    log_magnitude: float
    is_zero: bool = False

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(-math.inf, True)

    @classmethod
    def from_log(cls, log_value: float) -> "LogValue":
        if log_value == -math.inf:
            return cls.zero()
        return cls(float(log_value), False)

    @classmethod
    def from_float(cls, value: float) -> "LogValue":
        if value < 0:
            raise DomainError(f"LogValue holds nonnegative numbers, got {value}")
        if value == 0:
            return cls.zero()
        return cls(math.log(value), False)

    @property
    def log(self) -> float:
        """The log, with ``-inf`` for zero."""
        return -math.inf if self.is_zero else self.log_magnitude

    def value(self) -> float:
        """Linear-scale value. May underflow to 0 or overflow to inf."""
        if self.is_zero:
            return 0.0
        try:
            return math.exp(self.log_magnitude)
        except OverflowError:
            return math.inf


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


def log_gamma(z: float) -> float:
    """Natural log of the gamma function for positive real ``z``."""
    if not z > 0 or math.isinf(z):
        raise DomainError(f"log_gamma requires a finite z > 0, got {z}")
    return math.lgamma(z)


def log_beta(a: float, b: float) -> float:
    """ln B(a, b) = ln G(a) + ln G(b) - ln G(a + b)."""
    if not (a > 0 and b > 0):
        raise DomainError(f"log_beta requires a > 0 and b > 0, got ({a}, {b})")
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b)


def log_choose(n: int, k: int) -> float:
    """Natural log of the binomial coefficient ``C(n, k)``."""
    if n < 0 or k < 0 or k > n:
        raise DomainError(f"log_choose requires 0 <= k <= n, got n={n}, k={k}")
    if k == 0 or k == n:
        return 0.0
    if n <= _EXACT_CHOOSE_MAX_N:
        return math.log(math.comb(n, k))
    return -math.log(n + 1) - log_beta(k + 1, n - k + 1)


_LN_2PI = math.log(2.0 * math.pi)
_STIRLERR_SERIES = (1.0 / 12, 1.0 / 360, 1.0 / 1260, 1.0 / 1680, 1.0 / 1188)


def _stirlerr(n: float) -> float:
    """ln(n!) - [(n + 1/2) ln n - n + ln(2 pi)/2], the Stirling remainder."""
    if n <= 15.0:
        return math.lgamma(n + 1.0) - (n + 0.5) * math.log(n) + n - 0.5 * _LN_2PI
    nn = n * n
    s0, s1, s2, s3, s4 = _STIRLERR_SERIES
    if n > 500:
        return (s0 - s1 / nn) / n
    if n > 80:
        return (s0 - (s1 - s2 / nn) / nn) / n
    if n > 35:
        return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n
    return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n


def _bd0(x: float, mean: float) -> float:
    """Deviance term x ln(x / mean) + mean - x without cancellation."""
    if abs(x - mean) < 0.1 * (x + mean):
        v = (x - mean) / (x + mean)
        s = (x - mean) * v
        ej = 2.0 * x * v
        v2 = v * v
        j = 1
        while True:
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
            j += 1
    return x * math.log(x / mean) + mean - x


def log_binom_pmf(k: int, n: int, p: float) -> float:
    """ln of the binomial probability C(n, k) p^k (1 - p)^(n - k).

    Uses Loader's saddle-point form, which avoids the cancellation between
    ln C(n, k) and k ln p + (n - k) ln(1 - p) when n is large.
    """
    if n < 0 or k < 0 or k > n:
        raise DomainError(f"log_binom_pmf requires 0 <= k <= n, got n={n}, k={k}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"log_binom_pmf requires 0 <= p <= 1, got {p}")
    if p == 0.0:
        return 0.0 if k == 0 else -math.inf
    if p == 1.0:
        return 0.0 if k == n else -math.inf
    if k == 0:
        return n * math.log1p(-p)
    if k == n:
        return n * math.log(p)
    return _log_binom_kernel(k, n, p)


def _log_binom_kernel(k: float, n: float, p: float) -> float:
    # Loader's form; also valid for real 0 < k < n.
    m = n - k
    lc = _stirlerr(n) - _stirlerr(k) - _stirlerr(m) - _bd0(k, n * p) - _bd0(m, n * (1.0 - p))
    lf = _LN_2PI + math.log(k) + math.log1p(-k / n)
    return lc - 0.5 * lf


def _beta_cf(x: float, a: float, b: float) -> float:
    # Modified Lentz evaluation of the incomplete beta continued fraction.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ConvergenceError(
        f"incomplete beta continued fraction did not converge for x={x}, a={a}, b={b}",
        estimate=h,
    )


def _log_ibeta_lower(x: float, a: float, b: float) -> float:
    # ln I_x(a, b) straight from the continued fraction; accurate when
    # x < (a + 1) / (a + b + 2).
    if a >= 1.0 and b >= 1.0:
        # x^a (1 - x)^b / (a B(a, b)) = b / (a + b) * C(a + b, a) x^a (1 - x)^b
        log_front = math.log(b / (a + b)) + _log_binom_kernel(a, a + b, x)
    else:
        log_front = a * math.log(x) + b * math.log1p(-x) - log_beta(a, b) - math.log(a)
    return log_front + math.log(_beta_cf(x, a, b))


def _check_ibeta_args(x: float, a: float, b: float) -> None:
    if not (a > 0 and b > 0):
        raise DomainError(f"incomplete beta requires a > 0 and b > 0, got ({a}, {b})")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"incomplete beta requires 0 <= x <= 1, got {x}")


def log_reg_inc_beta(x: float, a: float, b: float) -> float:
    """Natural log of the regularized incomplete beta function I_x(a, b).

    Stays accurate when I_x(a, b) underflows in linear scale.
    """
    _check_ibeta_args(x, a, b)
    if x == 0.0:
        return -math.inf
    if x == 1.0:
        return 0.0
    if x < (a + 1.0) / (a + b + 2.0):
        return _log_ibeta_lower(x, a, b)
    log_upper = _log_ibeta_lower(1.0 - x, b, a)
    return math.log1p(-math.exp(log_upper)) if log_upper < 0 else -math.inf


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta function I_x(a, b), the Beta(a, b) CDF at x."""
    _check_ibeta_args(x, a, b)
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    if x < (a + 1.0) / (a + b + 2.0):
        return min(1.0, math.exp(_log_ibeta_lower(x, a, b)))
    return max(0.0, 1.0 - math.exp(_log_ibeta_lower(1.0 - x, b, a)))


# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


def _gk15(f: Callable[[float], float], a: float, b: float) -> Tuple[float, float]:
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = f(center)
    res_k = fc * _WGK[7]
    res_g = fc * _WG[3]
    for j in range(7):
        dx = half * _XGK[j]
        fsum = f(center - dx) + f(center + dx)
        res_k += _WGK[j] * fsum
        if j % 2 == 1:
            res_g += _WG[j // 2] * fsum
    res_k *= half
    res_g *= half
    return res_k, abs(res_k - res_g)


def _is_finite_at(f: Callable[[float], float], x: float) -> bool:
    try:
        return math.isfinite(f(x))
    except (ArithmeticError, ValueError):
        return False


def _endpoint_offset(f, x0: float, direction: int, width: float, target: float) -> float:
    """Smallest tried offset from a singular endpoint whose dropped mass is below target."""
    eps = width / 8.0
    while True:
        x = x0 + direction * eps
        if x == x0:
            raise ConvergenceError(
                f"cannot bound the mass near the singular endpoint {x0}"
            )
        try:
            fx = abs(f(x))
        except (ArithmeticError, ValueError):
            fx = math.inf
        # Omitted mass of an integrable singularity is at most a small
        # multiple of eps * f(x0 + eps).
        if math.isfinite(fx) and 2.0 * eps * fx <= target:
            return eps
        eps *= 0.5


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    rel_tol: float = 1e-10,
    abs_tol: float = 0.0,
    max_subdivisions: int = 2000,
    max_depth: int = 100,
    points: Iterable[float] = (),
) -> QuadratureResult:
    """Globally adaptive Gauss-Kronrod (7/15) quadrature of ``f`` over [lo, hi].

    Intervals are bisected, largest error first, until the summed error
    estimate is at most ``max(abs_tol, rel_tol * |value|)``. ``points`` are
    optional interior breakpoints (peaks, kinks) used for the initial split.

    If ``f`` is not finite at an endpoint, a sliver next to that endpoint is
    dropped; its width is chosen so the dropped mass stays below the
    tolerance.
    """
    if not lo < hi:
        raise DomainError(f"integrate requires lo < hi, got [{lo}, {hi}]")

    evaluations = 0

    def g(x: float) -> float:
        nonlocal evaluations
        evaluations += 1
        return f(x)

    a, b = lo, hi
    singular_lo = not _is_finite_at(g, lo)
    singular_hi = not _is_finite_at(g, hi)
    if singular_lo or singular_hi:
        rough, _ = _gk15(g, lo, hi)
        target = 0.25 * max(abs_tol, rel_tol * abs(rough))
        if target == 0.0:
            target = 1e-300
        width = hi - lo
        if singular_lo:
            a = lo + _endpoint_offset(g, lo, 1, width, target)
        if singular_hi:
            b = hi - _endpoint_offset(g, hi, -1, width, target)

    edges = sorted({a, b, *(p for p in points if a < p < b)})
    heap = []
    total = 0.0
    total_err = 0.0
    for left, right in zip(edges[:-1], edges[1:]):
        val, err = _gk15(g, left, right)
        total += val
        total_err += err
        heapq.heappush(heap, (-err, left, right, val, 0))
    done = []

    def converged() -> bool:
        return total_err <= max(abs_tol, rel_tol * abs(total))

    while not converged():
        if not heap or len(heap) + len(done) >= max_subdivisions:
            raise ConvergenceError(
                f"quadrature over [{lo}, {hi}] did not reach tolerance",
                estimate=total,
                error_estimate=total_err,
            )
        neg_err, left, right, val, depth = heapq.heappop(heap)
        mid = 0.5 * (left + right)
        if depth >= max_depth or not left < mid < right:
            done.append((neg_err, left, right, val, depth))
            continue
        v1, e1 = _gk15(g, left, mid)
        v2, e2 = _gk15(g, mid, right)
        total += v1 + v2 - val
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, left, mid, v1, depth + 1))
        heapq.heappush(heap, (-e2, mid, right, v2, depth + 1))

    # Re-sum to shed the drift from incremental updates.
    parts = heap + done
    value = math.fsum(item[3] for item in parts)
    error = math.fsum(-item[0] for item in parts)
    return QuadratureResult(value=value, error_estimate=max(error, 0.0), evaluations=max(evaluations, 1))


def log_sum_weighted(terms: Iterable[Tuple[float, LogValue]]) -> LogValue:
    """ln(sum of w_i * exp(l_i)), factoring out the largest exponent."""
    terms = list(terms)
    if not terms:
        raise DomainError("log_sum_weighted needs at least one term")
    live = []
    for weight, logval in terms:
        if weight < 0:
            raise DomainError(f"weights must be nonnegative, got {weight}")
        if weight > 0 and not logval.is_zero:
            live.append(math.log(weight) + logval.log_magnitude)
    if not live:
        return LogValue.zero()
    top = max(live)
    if math.isinf(top):
        return LogValue.from_log(top)
    return LogValue.from_log(top + math.log(math.fsum(math.exp(v - top) for v in live)))
