"""Seeded simulation of the rate prior and Monte Carlo marginal likelihoods.

Random numbers come from numpy's Philox4x64-10 counter-based generator keyed
by ``(seed, stream_id)``; uniforms are numpy's standard 53-bit doubles. Both
are specified independently of the platform, so a (seed, stream_id) pair
always reproduces the same draws.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

from .exceptions import DomainError, ImproperPriorError
from .inference import log_likelihood_array
from .model import ContinuousPrior, CrossCount, HaldaneDistance, haldane_map

__all__ = [
    "SeededStream",
    "Histogram",
    "MonteCarloEstimate",
    "distance_from_uniform",
    "sample_distance",
    "sample_rho",
    "sample_prior",
    "build_histogram",
    "mc_marginal",
    "ks_statistic",
    "figure1",
    "write_histogram_csv",
    "FIGURE1_SAMPLES",
    "FIGURE1_BINS",
]

FIGURE1_SAMPLES = 1_000_000
FIGURE1_BINS = 50

_U64 = (1 << 64) - 1


class SeededStream:
    """A reproducible stream of uniforms identified by ``(seed, stream_id)``.

    Draws advance the stream. Build a new instance with the same ids to
    replay it.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if not 0 <= seed <= _U64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
        if not 0 <= stream_id <= _U64:
            raise DomainError(f"stream_id must be an unsigned 64-bit integer, got {stream_id}")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._rng = np.random.Generator(np.random.Philox(key=[self.seed, self.stream_id]))

    def uniform(self, n: int) -> np.ndarray:
        """``n`` doubles uniform on [0, 1)."""
        return self._rng.random(n)

    def __repr__(self):
        return f"SeededStream(seed={self.seed}, stream_id={self.stream_id})"


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    densities: np.ndarray
    counts: np.ndarray
    n_samples: int

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


class MonteCarloEstimate(NamedTuple):
    estimate: float
    std_error: float
    log_estimate: float


def _check_count(n: int) -> int:
    if int(n) != n or n < 1:
        raise DomainError(f"sample size must be a positive integer, got {n}")
    return int(n)


def distance_from_uniform(u):
    """Inverse CDF of Beta(1, 2): x = 1 - sqrt(1 - u)."""
    x = 1.0 - np.sqrt(1.0 - np.asarray(u, dtype=float))
    return float(x) if np.ndim(x) == 0 else x


def sample_distance(stream: SeededStream, n: int) -> np.ndarray:
    """``n`` map distances between two loci placed uniformly on a chromosome."""
    return distance_from_uniform(stream.uniform(_check_count(n)))


def sample_rho(stream: SeededStream, n: int, L: float = 1.0) -> np.ndarray:
    """``n`` recombination rates: distance draws pushed through Haldane's map."""
    return haldane_map(sample_distance(stream, n), L)


def sample_prior(stream: SeededStream, prior: ContinuousPrior, n: int) -> np.ndarray:
    """``n`` draws from a sampleable proper prior."""
    n = _check_count(n)
    if not prior.is_proper or not prior.is_sampleable:
        raise ImproperPriorError(f"cannot sample from the {prior.type_name} prior")
    if isinstance(prior, HaldaneDistance):
        return sample_rho(stream, n, prior.L)
    return prior.sample(stream.uniform(n))


def build_histogram(samples: Sequence[float], bins: int, range: Tuple[float, float]) -> Histogram:
    """Equal-width density histogram over ``range``.

    Samples outside the range are an error: the support is known in advance,
    so a stray sample means a bug upstream.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("cannot build a histogram from no samples")
    bins = _check_count(bins)
    lo, hi = float(range[0]), float(range[1])
    if not lo < hi:
        raise DomainError(f"histogram range needs lo < hi, got ({lo}, {hi})")
    outside = (x < lo) | (x > hi) | np.isnan(x)
    if np.any(outside):
        raise DomainError(
            f"{int(outside.sum())} samples fall outside the histogram range [{lo}, {hi}]"
        )
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(x, bins=edges)
    densities = counts / (x.size * np.diff(edges))
    return Histogram(bin_edges=edges, densities=densities, counts=counts, n_samples=int(x.size))


def mc_marginal(stream: SeededStream, data: CrossCount, prior: ContinuousPrior, n: int) -> MonteCarloEstimate:
    """Plain Monte Carlo marginal likelihood: the mean likelihood over prior draws.

    The mean and its standard error are accumulated relative to the largest
    log-likelihood drawn, so nothing overflows before the final rescale.
    """
    rho = sample_prior(stream, prior, n)
    log_lik = log_likelihood_array(data, rho)
    top = float(np.max(log_lik))
    if top == -math.inf:
        return MonteCarloEstimate(0.0, 0.0, -math.inf)
    scaled = np.exp(log_lik - top)
    mean = float(np.mean(scaled))
    sd = float(np.std(scaled, ddof=1)) if scaled.size > 1 else 0.0
    scale = math.exp(top) if top < 709 else math.inf
    return MonteCarloEstimate(mean * scale, sd / math.sqrt(scaled.size) * scale, top + math.log(mean))


def ks_statistic(samples: Sequence[float], cdf) -> float:
    """Kolmogorov-Smirnov distance between the empirical CDF and ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    f = np.asarray(cdf(x), dtype=float)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def figure1(
    stream: SeededStream,
    n_samples: int = FIGURE1_SAMPLES,
    bins: int = FIGURE1_BINS,
    L: float = 1.0,
) -> Tuple[Histogram, np.ndarray]:
    """Histogram of simulated rates over the whole support of the distance prior.

    Returns the histogram and the raw samples.
    """
    prior = HaldaneDistance(L)
    samples = sample_rho(stream, n_samples, L)
    return build_histogram(samples, bins, prior.support()), samples


def write_histogram_csv(hist: Histogram, out: Union[TextIO, str, None] = None, L: float = 1.0) -> Optional[str]:
    """CSV with columns bin_lo, bin_hi, count, density, analytic_density.

    ``analytic_density`` is the distance-prior density at each bin midpoint.
    Writes to ``out`` (a path or text stream), or returns the text if ``out`` is None.
    """
    analytic = HaldaneDistance(L).density(hist.midpoints)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["bin_lo", "bin_hi", "count", "density", "analytic_density"])
    for lo, hi, c, d, a in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts, hist.densities, analytic):
        writer.writerow([repr(float(lo)), repr(float(hi)), int(c), repr(float(d)), repr(float(a))])
    text = buf.getvalue()
    if out is None:
        return text
    if isinstance(out, str):
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    return None
