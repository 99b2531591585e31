"""Bounded-variance readout of ``<σ_z^(1)>`` and the repetition schedule.

Random numbers come from Philox (counter-based).  The key is derived from
``(seed, stream)`` and call number ``k`` of a meter uses counter word 2 = k,
so sample streams depend only on the seed and call index, never on
execution order.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .pauli import PauliString
from .state import DensityState, PureState, expectation

# repetition-count constants: blocks = ceil(C1 ln(1/p)), block size = ceil(C2 var / eps^2)
C1 = 8
C2 = 4

MODES = ("projective", "gaussian")


def substream(name: str) -> int:
    """Stable integer id for a named RNG substream."""
    return zlib.crc32(name.encode())


@dataclass
class NoisyMeter:
    """Readout with mean ``tr(σ_z^(1) ρ)``.

    ``projective`` returns ±1 (variance ``1 - μ²``); ``gaussian`` returns the
    mean plus normal noise of variance ``s``.
    """

    mode: str = "projective"
    s: float = 0.0
    seed: int = 0
    stream: int = 0
    calls: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown meter mode {self.mode!r}; expected one of {MODES}")
        if not self.s >= 0:
            raise ValueError(f"noise variance must be >= 0, got {self.s}")

    @property
    def variance_bound(self) -> float:
        return max(1.0, self.s)

    @property
    def is_exact(self) -> bool:
        return self.mode == "gaussian" and self.s == 0

    def spawn(self, name: str) -> NoisyMeter:
        """A meter on an independent named substream (fresh call counter)."""
        stream = zlib.crc32(f"{self.stream}/{name}".encode())
        return NoisyMeter(self.mode, self.s, self.seed, stream)

    def _generator(self, call: int) -> np.random.Generator:
        key = np.random.SeedSequence([self.seed, self.stream]).generate_state(2, np.uint64)
        return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, call, 0]))

    def draw(self, mean: float, k: int) -> np.ndarray:
        """``k`` independent samples of a process with the given mean (one call)."""
        if not -1 - 1e-9 <= mean <= 1 + 1e-9:
            raise ValueError(f"σ_z expectation {mean} outside [-1, 1]")
        mean = min(1.0, max(-1.0, mean))
        call, self.calls = self.calls, self.calls + 1
        if self.mode == "gaussian":
            if self.s == 0:
                return np.full(k, mean)
            return mean + math.sqrt(self.s) * self._generator(call).standard_normal(k)
        p_plus = (1 + mean) / 2
        return np.where(self._generator(call).random(k) < p_plus, 1.0, -1.0)


def sample(meter: NoisyMeter, state: DensityState | PureState) -> float:
    z1 = PauliString.single(state.n, 1, "Z")
    return float(meter.draw(expectation(state, z1), 1)[0])


@dataclass(frozen=True)
class EstimationBudget:
    """Accuracy ``epsilon`` with failure probability at most ``p``.

    Median of ``ceil(8 ln(1/p))`` block means, each block of
    ``ceil(4 var / eps^2)`` samples: Chebyshev bounds a block's failure by
    1/4 and Hoeffding bounds the median's by ``exp(-blocks/8) <= p``.
    ``shots`` replaces the derived total (blocks unchanged, block size
    ``shots // blocks``) and voids the guarantee.
    """

    epsilon: float = 0.05
    p: float = 0.05
    shots: int | None = None

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0 < self.p < 1:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if self.shots is not None and self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")

    def blocks(self) -> int:
        k = math.ceil(C1 * math.log(1 / self.p))
        if self.shots is not None:
            k = min(k, self.shots)
        return max(1, k)

    def block_size(self, variance_bound: float = 1.0) -> int:
        if self.shots is not None:
            return max(1, self.shots // self.blocks())
        return max(1, math.ceil(C2 * max(1.0, variance_bound) / self.epsilon**2))

    def repetitions(self, variance_bound: float = 1.0) -> int:
        return self.blocks() * self.block_size(variance_bound)


@dataclass(frozen=True)
class MeanEstimate:
    value: float
    stderr: float
    shots: int
    exact: float | None = None


Run = Union[Callable[[], Union[DensityState, PureState]], DensityState, PureState]


def median_of_means(samples: np.ndarray, blocks: int) -> tuple[float, float]:
    """Median of ``blocks`` equal block means, with a normal-theory standard error."""
    means = samples.reshape(blocks, -1).mean(axis=1)
    med = float(np.median(means))
    if len(samples) < 2:
        return med, 0.0
    # median of normal block means has sd ≈ sqrt(pi/2) * sd(block mean)
    se = math.sqrt(math.pi / 2) * float(samples.std(ddof=1)) / math.sqrt(len(samples))
    return med, se


def estimate(run: Run, meter: NoisyMeter, budget: EstimationBudget) -> MeanEstimate:
    """Repeat the computation and readout; returns median-of-means with its error.

    The simulated computation has no operational noise, so every repetition
    ends in the same state; it is computed once and sampled ``R`` times.
    """
    state = run() if callable(run) else run
    mean = expectation(state, PauliString.single(state.n, 1, "Z"))
    k, b = budget.blocks(), budget.block_size(meter.variance_bound)
    samples = meter.draw(mean, k * b)
    value, se = median_of_means(samples, k)
    return MeanEstimate(value, se, k * b, exact=mean)


def estimate_mean(run: Run, meter: NoisyMeter, budget: EstimationBudget) -> float:
    return estimate(run, meter, budget).value
