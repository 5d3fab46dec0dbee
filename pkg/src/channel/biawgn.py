"""
Binary-input AWGN channel with an idle symbol.

Y_k = X_k + N_k with N_k ~ N(0,1), X_k in {-sqrt(rho), 0, +sqrt(rho)}; the
zero symbol means the transmitter is idle and never appears in a codeword.
The input law puts mass p on -sqrt(rho) and 1-p on +sqrt(rho); P_Y is the
induced two-component Gaussian mixture and doubles as the auxiliary output
law Q_Y.

Three log-likelihood ratios (nats) drive every bound:
    i(x, y) = log dP_{Y|X=x} / dP_Y
    r(y)    = log dP_Y / dP_{Y|X=idle}
    j(x, y) = log dP_{Y|X=x} / dP_{Y|X=idle}
and i = j - r holds pointwise.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Optional

import numpy as np

from src.config.settings import settings
from src.stats.samples import LlrSampleSet, SampleSide
from src.utils.errors import DomainError

logger = logging.getLogger(__name__)

IDLE_SYMBOL = 0.0


@dataclass(frozen=True)
class ChannelSpec:
    """Channel and input-law parameters: linear SNR rho, skew p, blocklength n."""

    rho: float
    p: float
    n: int

    def __post_init__(self):
        if not self.rho > 0:
            raise DomainError(f"rho must be positive, got {self.rho}")
        # p < 1/2 is the mirror image of 1-p under y -> -y, so it adds nothing
        if not 0.5 <= self.p <= 1.0:
            raise DomainError(f"p must lie in [1/2, 1], got {self.p}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def from_snr_db(cls, snr_db: float, p: float, n: int) -> "ChannelSpec":
        return cls(rho=10.0 ** (snr_db / 10.0), p=p, n=n)

    @property
    def amplitude(self) -> float:
        return math.sqrt(self.rho)

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.rho)

    def with_p(self, p: float) -> "ChannelSpec":
        return replace(self, p=p)

    def with_n(self, n: int) -> "ChannelSpec":
        return replace(self, n=n)


class Measure(str, Enum):
    """Measures the LLR statistics are sampled under."""

    JOINT_PXY = "JOINT_PXY"
    PRODUCT_PXQY = "PRODUCT_PXQY"
    OUTPUT_PY = "OUTPUT_PY"
    NOISE_ONLY = "NOISE_ONLY"
    CONDITIONAL_PYX = "CONDITIONAL_PYX"


class Statistic(str, Enum):
    I = "i"
    R = "r"
    J = "j"


# statistic -> measure -> side of the LLR orientation the samples belong to
_ORIENTATION = {
    Statistic.I: {
        Measure.JOINT_PXY: SampleSide.P,
        Measure.PRODUCT_PXQY: SampleSide.Q,
        Measure.CONDITIONAL_PYX: SampleSide.P,
        Measure.OUTPUT_PY: SampleSide.Q,
    },
    Statistic.R: {
        Measure.OUTPUT_PY: SampleSide.P,
        Measure.NOISE_ONLY: SampleSide.Q,
    },
    Statistic.J: {
        Measure.JOINT_PXY: SampleSide.P,
        Measure.CONDITIONAL_PYX: SampleSide.P,
        Measure.NOISE_ONLY: SampleSide.Q,
    },
}

_STAT_CODE = {Statistic.I: 1, Statistic.R: 2, Statistic.J: 3}
_MEASURE_CODE = {m: k for k, m in enumerate(Measure, start=1)}


def _log_mixture(y: np.ndarray, rho: float, p: float) -> np.ndarray:
    """Per-symbol log(p e^{-sqrt(rho) y} + (1-p) e^{sqrt(rho) y}), stable."""
    a = math.sqrt(rho)
    if p >= 1.0:
        return -a * y
    return np.logaddexp(math.log(p) - a * y, math.log1p(-p) + a * y)


def _information_density(x: np.ndarray, y: np.ndarray, rho: float, p: float) -> np.ndarray:
    return np.sum(x * y - _log_mixture(y, rho, p), axis=-1)


def _output_llr(y: np.ndarray, rho: float, p: float) -> np.ndarray:
    return -0.5 * y.shape[-1] * rho + np.sum(_log_mixture(y, rho, p), axis=-1)


def _idle_llr(x: np.ndarray, y: np.ndarray, rho: float) -> np.ndarray:
    return -0.5 * y.shape[-1] * rho + np.sum(x * y, axis=-1)


def _check_vectors(spec: ChannelSpec, y, x=None):
    y = np.asarray(y, dtype=float)
    if y.shape[-1:] != (spec.n,):
        raise DomainError(f"y must have trailing dimension n={spec.n}, got shape {y.shape}")
    if x is None:
        return y
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (spec.n,):
        raise DomainError(f"x must have trailing dimension n={spec.n}, got shape {x.shape}")
    if not np.allclose(np.abs(x), spec.amplitude):
        raise DomainError("codeword entries must be +-sqrt(rho)")
    return y, x


def llr_i(spec: ChannelSpec, x, y) -> np.ndarray:
    """Information density i(x, y) in nats (rows of x and y are codewords/outputs)."""
    y, x = _check_vectors(spec, y, x)
    return _information_density(x, y, spec.rho, spec.p)


def llr_r(spec: ChannelSpec, y) -> np.ndarray:
    """Output-versus-idle LLR r(y) in nats."""
    y = _check_vectors(spec, y)
    return _output_llr(y, spec.rho, spec.p)


def llr_j(spec: ChannelSpec, x, y) -> np.ndarray:
    """Codeword-versus-idle LLR j(x, y) in nats."""
    y, x = _check_vectors(spec, y, x)
    return _idle_llr(x, y, spec.rho)


def draw_inputs(rng: np.random.Generator, rows: int, spec: ChannelSpec) -> np.ndarray:
    """Rows of i.i.d. inputs from P_X, driven by uniforms so streams are shared across p."""
    u = rng.random((rows, spec.n))
    return np.where(u < spec.p, -spec.amplitude, spec.amplitude)


def _sample_chunk(spec: ChannelSpec, statistic: Statistic, measure: Measure,
                  rows: int, rng: np.random.Generator) -> np.ndarray:
    n, rho, a = spec.n, spec.rho, spec.amplitude

    if statistic is Statistic.J:
        # sum_k x_k Y_k is N(+n rho, n rho) given x, N(0, n rho) when idle
        shift = 0.5 * n * rho if measure is not Measure.NOISE_ONLY else -0.5 * n * rho
        return shift + math.sqrt(n * rho) * rng.standard_normal(rows)

    if measure is Measure.NOISE_ONLY:
        y = rng.standard_normal((rows, n))
        return _output_llr(y, rho, spec.p)

    if measure is Measure.CONDITIONAL_PYX:
        x = np.full((rows, n), a)
        y = x + rng.standard_normal((rows, n))
        return _information_density(x, y, rho, spec.p)

    x_out = draw_inputs(rng, rows, spec)
    y = x_out + rng.standard_normal((rows, n))
    if statistic is Statistic.R:
        return _output_llr(y, rho, spec.p)
    if measure is Measure.JOINT_PXY:
        return _information_density(x_out, y, rho, spec.p)
    if measure is Measure.PRODUCT_PXQY:
        x = draw_inputs(rng, rows, spec)
    else:
        x = np.full((rows, n), a)
    return _information_density(x, y, rho, spec.p)


def _chunk_rows(n: int) -> int:
    return max(1, settings.chunk_elements // max(1, n))


def sample_llr(spec: ChannelSpec, statistic, measure, count: int, seed: int,
               threads: int = 1) -> LlrSampleSet:
    """
    Draw i.i.d. samples of an LLR statistic under a measure.

    Samples are produced in fixed-size chunks, each with its own Philox stream
    spawned from (seed, statistic, measure, chunk index), so the result does
    not depend on the number of threads.

    Args:
        spec: Channel specification
        statistic: One of Statistic.I, Statistic.R, Statistic.J (or "i", "r", "j")
        measure: Measure to sample under
        count: Number of samples
        seed: Master seed for this sample set
        threads: Worker threads used to fill chunks

    Returns:
        LlrSampleSet oriented as documented for the (statistic, measure) pair
    """
    statistic = Statistic(statistic)
    measure = Measure(measure)
    side = _ORIENTATION[statistic].get(measure)
    if side is None:
        raise DomainError(f"statistic {statistic.value} cannot be sampled under {measure.value}")
    if count <= 0:
        raise DomainError(f"count must be positive, got {count}")
    return _cached_sample(spec, statistic, measure, int(count), int(seed), int(threads))


@lru_cache(maxsize=settings.sample_cache_size)
def _cached_sample(spec: ChannelSpec, statistic: Statistic, measure: Measure,
                   count: int, seed: int, threads: int) -> LlrSampleSet:
    rows = _chunk_rows(spec.n) if statistic is not Statistic.J else settings.chunk_elements
    bounds = [(start, min(count, start + rows)) for start in range(0, count, rows)]
    key = (_STAT_CODE[statistic], _MEASURE_CODE[measure])

    def work(index: int) -> np.ndarray:
        start, stop = bounds[index]
        seq = np.random.SeedSequence(seed, spawn_key=key + (index,))
        rng = np.random.Generator(np.random.Philox(seq))
        return _sample_chunk(spec, statistic, measure, stop - start, rng)

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(work, range(len(bounds))))
    else:
        chunks = [work(i) for i in range(len(bounds))]

    values = np.concatenate(chunks)
    logger.debug(f"Sampled {count} values of {statistic.value} under {measure.value} "
                 f"(n={spec.n}, rho={spec.rho:.4f}, p={spec.p:.4f}) in {len(bounds)} chunks")
    return LlrSampleSet(
        values=values,
        drawn_under=_ORIENTATION[statistic][measure],
        seed=seed,
        label=f"{statistic.value}|{measure.value}|n={spec.n}|rho={spec.rho:.6g}|p={spec.p:.6g}",
    )


def clear_sample_cache():
    """Drop cached sample sets."""
    _cached_sample.cache_clear()


def mutual_information(rho: float, p: float = 0.5, order: Optional[int] = None) -> float:
    """
    Per-symbol mutual information I(P_X) in bits by Gauss-Hermite quadrature.

    Args:
        rho: Linear SNR
        p: Probability of the symbol -sqrt(rho)
        order: Number of quadrature nodes

    Returns:
        Expected information density per channel use, in bits
    """
    nodes, weights = np.polynomial.hermite_e.hermegauss(order or settings.quadrature_order)
    weights = weights / math.sqrt(2.0 * math.pi)
    a = math.sqrt(rho)
    total = 0.0
    for x, prob in ((-a, p), (a, 1.0 - p)):
        if prob == 0.0:
            continue
        y = x + nodes
        total += prob * float(np.sum(weights * (x * y - _log_mixture(y, rho, p))))
    return total / math.log(2.0)
