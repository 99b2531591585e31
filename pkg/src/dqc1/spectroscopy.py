"""Spectrum observation with one clean qubit.

A time point prepares deviation ``σ_x^(1)``, runs the conditional half
evolutions, and reads ``<σ_x^(1)>`` and ``<σ_y^(1)>``.  Working the
conditional evolution through gives ``<σ_x> = Re tr U(t) / 2^n`` and
``<σ_y> = -Im tr U(t) / 2^n``, so

    f(t) = (<σ_x> - i<σ_y>) / 2 = 2^{-(n+1)} Σ_i exp(-i λ_i t),

which is the frozen convention below (checked against the dense eigen-sum
for ``H = σ_z`` in the tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import (
    GateNetwork,
    PauliSum,
    conditional_half_evolutions,
    conditional_u,
    network_unitary,
)
from .measurement import EstimationBudget, NoisyMeter, estimate
from .pauli import PauliString
from .protocols import readout_network, synthesize_conjugation
from .state import DensityState, evolve, init_dqc1

WINDOWS = ("hann", "exp", "none")


@dataclass(frozen=True)
class TimeSample:
    t: float
    value: complex
    stderr: float
    stderr_re: float = 0.0
    stderr_im: float = 0.0
    shots: int = 0


def _combine(
    n_sys: int,
    state: DensityState,
    prep_sign: int,
    meter: NoisyMeter,
    budget: EstimationBudget,
    t: float,
) -> TimeSample:
    m = n_sys + 1
    reads = []
    for letter in "XY":
        post, sign = readout_network(PauliString.single(m, 1, letter))
        est = estimate(lambda: evolve(state, post), meter, budget)
        reads.append((prep_sign * sign * est.value, est))
    (x, ex), (y, ey) = reads
    return TimeSample(
        t,
        complex(x, -y) / 2,
        max(ex.stderr, ey.stderr) / 2,
        ex.stderr / 2,
        ey.stderr / 2,
        ex.shots + ey.shots,
    )


def _x_prep(m: int) -> tuple[GateNetwork, int]:
    """Rotate the clean deviation ``σ_z^(1)`` to ``sign · σ_x^(1)``."""
    conj = synthesize_conjugation(PauliString.single(m, 1, "Z"), PauliString.single(m, 1, "X"))
    return conj.network, conj.sign


def sample_f(
    h: PauliSum, t: float, steps: int, meter: NoisyMeter, budget: EstimationBudget
) -> TimeSample:
    """One noisy sample of ``f(t)`` using a Trotterized conditional evolution."""
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    m = h.n + 1
    prep, sign = _x_prep(m)
    net = prep | conditional_half_evolutions(h, t, steps)
    return _combine(h.n, evolve(init_dqc1(m), net), sign, meter, budget, t)


def sample_f_unitary(
    w: GateNetwork, k: int, meter: NoisyMeter, budget: EstimationBudget
) -> TimeSample:
    """``(1/2^{n+1}) Σ_i exp(-iθ_i k)`` over eigenphases ``θ_i`` of ``W``.

    The |0> branch applies ``W^{ceil(k/2)}`` and the |1> branch
    ``(W†)^{floor(k/2)}``; the σ_x/σ_y readout sees their ratio ``W^k``.
    """
    if k < 0:
        raise ValueError(f"power must be >= 0, got {k}")
    m = w.n + 1
    fwd = conditional_u(w.power((k + 1) // 2), 0)
    back = conditional_u(w.power(-(k // 2)), 1)
    prep, sign = _x_prep(m)
    return _combine(w.n, evolve(init_dqc1(m), prep | fwd | back), sign, meter, budget, float(k))


def sample_f_grid(
    h: PauliSum,
    dt: float,
    npoints: int,
    steps_per_dt: int,
    meter: NoisyMeter,
    budget: EstimationBudget,
) -> list[TimeSample]:
    """``f(kΔt)`` for ``k = 0..N-1`` with ``V(kΔt)`` realised as ``V(Δt)^k``.

    Each time point is still an independent preparation and readout; only the
    dense propagator of one step is reused.
    """
    m = h.n + 1
    step = network_unitary(conditional_half_evolutions(h, dt, steps_per_dt))
    prep, sign = _x_prep(m)
    rho = evolve(init_dqc1(m), prep).matrix
    out = []
    for k in range(npoints):
        out.append(_combine(h.n, DensityState(m, (rho + rho.conj().T) / 2), sign, meter, budget, k * dt))
        rho = step @ rho @ step.conj().T
    return out


def sample_f_unitary_grid(
    w: GateNetwork, npoints: int, meter: NoisyMeter, budget: EstimationBudget
) -> list[TimeSample]:
    """``sample_f_unitary`` for ``k = 0..N-1`` reusing the dense controlled step."""
    m = w.n + 1
    step = network_unitary(conditional_u(w, 0))
    prep, sign = _x_prep(m)
    rho = evolve(init_dqc1(m), prep).matrix
    out = []
    for k in range(npoints):
        out.append(_combine(w.n, DensityState(m, (rho + rho.conj().T) / 2), sign, meter, budget, float(k)))
        rho = step @ rho @ step.conj().T
    return out


def f_exact(eigenvalues: np.ndarray, t: np.ndarray | float) -> np.ndarray:
    """``2^{-(n+1)} Σ_i exp(-iλ_i t)`` from an explicit spectrum."""
    lam = np.asarray(eigenvalues, dtype=float)
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    return np.exp(-1j * np.outer(tt, lam)).sum(axis=1) / (2 * len(lam))


# -- Fourier stage -----------------------------------------------------


@dataclass(frozen=True)
class Peak:
    frequency: float
    height: float
    intensity: float


@dataclass(frozen=True)
class SpectrumEstimate:
    """Real broadened density on the grid ``2πj/(NΔt)``, ``j = -N/2+1 .. N/2``.

    ``density`` integrates (sum times bin width) to ``f(0)``, the total
    sampled weight (1/2 for exact data).
    """

    frequencies: np.ndarray
    density: np.ndarray
    stderr: np.ndarray
    resolution: float
    window: str
    dt: float
    peaks: list[Peak] = field(default_factory=list)


def window_weights(window: str, npoints: int) -> np.ndarray:
    """One-sided apodization over ``t_k = kΔt``.

    ``hann`` is the decaying half of a length-2N Hann window, so the
    conjugate-symmetric extension ``f(-t) = conj f(t)`` sees a full Hann;
    ``exp`` is ``exp(-4k/N)`` (Lorentzian broadening).
    """
    k = np.arange(npoints)
    if window == "hann":
        return np.cos(np.pi * k / (2 * npoints)) ** 2
    if window == "exp":
        return np.exp(-4.0 * k / npoints)
    if window == "none":
        return np.ones(npoints)
    raise ValueError(f"unknown window {window!r}; expected one of {WINDOWS}")


def _check_grid(samples: list[TimeSample]) -> float:
    if len(samples) < 2:
        raise ValueError("need at least two time samples")
    t = np.array([s.t for s in samples])
    dt = t[1] - t[0]
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    if abs(t[0]) > 1e-12 * max(1.0, dt) or np.abs(np.diff(t) - dt).max() > 1e-9 * max(1.0, dt):
        raise ValueError("samples must lie on a uniform grid t_k = k·Δt starting at 0")
    return float(dt)


def spectrum_fft(
    samples: list[TimeSample],
    window: str = "hann",
    noise_factor: float = 4.0,
    min_rel: float = 0.05,
    peak_halfwidth: int = 2,
) -> SpectrumEstimate:
    """Broadened spectral density from ``f(t_k)``.

    Computes ``Re Σ_k w_k g_k exp(iω t_k)`` with the ``k = 0`` sample halved,
    which equals the Fourier transform of the windowed conjugate-symmetric
    record.  Eigenvalues are recovered modulo ``2π/Δt``; the result is
    faithful only when every ``|λ| < π/Δt``.
    """
    dt = _check_grid(samples)
    npts = len(samples)
    f = np.array([s.value for s in samples])
    w = window_weights(window, npts)
    g = w * f
    g[0] *= 0.5
    j = np.arange(-npts // 2 + 1, npts // 2 + 1) if npts % 2 == 0 else np.arange(-(npts // 2), npts // 2 + 1)
    freqs = 2 * np.pi * j / (npts * dt)
    # Σ_k g_k e^{2πi jk/N} = N · ifft(g)[j mod N]
    spec = npts * np.fft.ifft(g)[j % npts]
    scale = dt / np.pi
    density = spec.real * scale

    # linear error propagation: g_k = w_k (x_k - i y_k)/2, Re(g_k e^{iθ}) = w_k (x cos θ + y sin θ)/2
    se_re = np.array([s.stderr_re for s in samples]) * 2  # back to σ_x reading
    se_im = np.array([s.stderr_im for s in samples]) * 2
    wk = w.copy()
    wk[0] *= 0.5
    theta = np.outer(freqs, np.arange(npts) * dt)
    var = ((wk / 2) ** 2 * (se_re**2 * np.cos(theta) ** 2 + se_im**2 * np.sin(theta) ** 2)).sum(axis=1)
    stderr = np.sqrt(var) * scale

    resolution = 2 * np.pi / (npts * dt)
    peaks = find_peaks(freqs, density, resolution, noise_factor, min_rel, peak_halfwidth)
    return SpectrumEstimate(freqs, density, stderr, resolution, window, dt, peaks)


def find_peaks(
    freqs: np.ndarray,
    density: np.ndarray,
    resolution: float,
    noise_factor: float = 4.0,
    min_rel: float = 0.05,
    halfwidth: int = 2,
) -> list[Peak]:
    """Local maxima above ``max(noise_factor · median|density|, min_rel · max)``.

    Peak intensity is the density summed over ``±halfwidth`` bins times the
    bin width, which makes it insensitive to where the line falls inside a bin.
    """
    npts = len(density)
    floor = max(noise_factor * float(np.median(np.abs(density))), min_rel * float(density.max()))
    peaks = []
    for i in range(npts):
        left, right = density[(i - 1) % npts], density[(i + 1) % npts]
        if density[i] > floor and density[i] >= left and density[i] > right:
            idx = [(i + d) % npts for d in range(-halfwidth, halfwidth + 1)]
            peaks.append(
                Peak(float(freqs[i]), float(density[i]), float(density[idx].sum() * resolution))
            )
    return peaks


def nyquist_dt(h: PauliSum) -> float:
    """Largest safe ``Δt``: ``π / Σ|c_j|`` (``inf`` for ``H = 0``)."""
    bound = h.norm_bound()
    return math.inf if bound == 0 else math.pi / bound


def check_nyquist(h: PauliSum, dt: float) -> None:
    limit = nyquist_dt(h)
    if dt >= limit:
        raise ValueError(
            f"Δt = {dt} >= π/Σ|c_j| = {limit:.6g}; eigenvalues would alias (override to force)"
        )


def apply_eigenphases(w: GateNetwork) -> np.ndarray:
    """Eigenphases ``θ`` with ``W = Σ e^{-iθ}|i><i|``, in ``(-π, π]``."""
    ev = np.linalg.eigvals(network_unitary(w))
    return np.sort(-np.angle(ev))
