"""Trace estimators, Pauli-expansion coefficients, transition amplitudes and pseudo-pure preparation.

Every estimator runs a gate network on a simulated register, reads
``<σ_z^(1)>`` through a :class:`NoisyMeter`, and reports the dense-matrix
value next to the sampled one.  Observables other than ``σ_z^(1)`` are
rotated onto it with a Clifford conjugation network first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._config import InvariantError, settings
from .circuit import (
    GateNetwork,
    PauliRotation,
    apply_network,
    build_tn,
    conditional_u,
    network_unitary,
    pauli_gate,
    swap_network,
)
from .measurement import EstimationBudget, MeanEstimate, NoisyMeter, estimate
from .pauli import PauliString, PhasedPauli, commutes, pauli_action, pauli_matrix, pauli_mul
from .state import DensityState, evolve, init_dqc1, init_dqcp

_QUARTER = math.pi / 4


# -- Clifford conjugation ----------------------------------------------


@dataclass(frozen=True)
class CliffordConjugation:
    """``network`` maps ``σ_source`` to ``sign · σ_target`` under ``G σ G†``."""

    network: GateNetwork
    source: PauliString
    target: PauliString
    sign: int


def _conjugate(cur: PhasedPauli, axis: PauliString, angle: float) -> PhasedPauli:
    # exp(-iθQ) P exp(iθQ) = exp(-2iθQ) P for anticommuting P, Q; at θ = ±π/4 that is ∓iQP
    if commutes(axis, cur.string):
        return cur
    prod = pauli_mul(axis, cur.string)
    return PhasedPauli(prod.power + cur.power + (-1 if angle > 0 else 1), prod.string)


def _anticommuting_letter(letter: str) -> str:
    return "X" if letter == "Z" else "Z"


def _route_to_z1(p: PauliString) -> tuple[list[PauliRotation], int]:
    """At most two π/4 rotations taking ``σ_p`` to ``±σ_z^(1)``."""
    n = p.n
    z1 = PauliString.single(n, 1, "Z")
    cur = PhasedPauli(0, p)
    gates: list[PauliRotation] = []
    if p == z1:
        return gates, 1
    if commutes(p, z1):
        # give qubit 1 an X or Y component first
        if p.letter(1) == "Z":
            r = PauliString.single(n, 1, "X")
        else:
            k = p.support[0]
            r = PauliString.from_letters(n, {1: "X", k: _anticommuting_letter(p.letter(k))})
        gates.append(PauliRotation(r, _QUARTER))
        cur = _conjugate(cur, r, _QUARTER)
    q = pauli_mul(z1, cur.string).string
    gates.append(PauliRotation(q, _QUARTER))
    cur = _conjugate(cur, q, _QUARTER)
    if cur.string != z1 or not cur.is_hermitian:
        raise InvariantError(f"conjugation routing failed for {p.label}")
    return gates, cur.sign


def _verify_conjugation(conj: CliffordConjugation, trials: int = 2) -> None:
    # G σ_s G† v == sign σ_t G G† v on random vectors, O(gates · 2^n)
    rng = np.random.default_rng(0)
    d = 1 << conj.source.n
    inv = conj.network.inverse()
    src_s, ph_s = pauli_action(conj.source)
    src_t, ph_t = pauli_action(conj.target)
    for _ in range(trials):
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        w = apply_network(inv, v)
        lhs = apply_network(conj.network, ph_s * w[src_s])
        rhs = conj.sign * ph_t * v[src_t]
        if np.abs(lhs - rhs).max() > 1e-10 * max(1.0, np.abs(v).max()):
            raise InvariantError(
                f"conjugation {conj.source.label} -> {conj.target.label} failed dense check"
            )


def synthesize_conjugation(
    source: PauliString, target: PauliString, verify: bool = True
) -> CliffordConjugation:
    """A network of ``exp(∓iσπ/4)`` gates with ``G σ_source G† = ±σ_target``.

    Routes the source to ``σ_z^(1)`` and the target to ``σ_z^(1)`` (at most
    two gates each) and joins the first route with the inverse of the second.
    """
    if source.n != target.n:
        raise ValueError(f"size mismatch: {source.n} vs {target.n} qubits")
    if source.is_identity or target.is_identity:
        raise ValueError("cannot conjugate to or from the identity string")
    if source == target:
        conj = CliffordConjugation(GateNetwork(source.n), source, target, 1)
    else:
        fwd, s_fwd = _route_to_z1(source)
        back, s_back = _route_to_z1(target)
        net = GateNetwork(source.n, tuple(fwd)).then(GateNetwork(target.n, tuple(back)).inverse())
        conj = CliffordConjugation(net, source, target, s_fwd * s_back)
    if verify and source.n <= settings.dense_limit:
        _verify_conjugation(conj)
    return conj


def readout_network(observable: PauliString) -> tuple[GateNetwork, int]:
    """Network turning ``<σ_obs>`` into ``sign · <σ_z^(1)>``."""
    conj = synthesize_conjugation(observable, PauliString.single(observable.n, 1, "Z"))
    return conj.network, conj.sign


# -- DQC1 trace estimators ---------------------------------------------


@dataclass(frozen=True)
class TraceEstimate:
    value: float
    stderr: float
    shots: int
    dense_oracle: float | None


def _dense_ok(n: int) -> bool:
    return n <= settings.dense_limit


def dqc1_pauli_pair(
    u: GateNetwork,
    a: PauliString,
    b: PauliString,
    meter: NoisyMeter,
    budget: EstimationBudget,
) -> TraceEstimate:
    """Estimate ``tr(σ_a U σ_b U†) / 2^n`` with one clean qubit.

    ``σ_z^(1)`` deviation → ``±σ_b`` → ``U`` → rotate ``σ_a`` onto
    ``σ_z^(1)`` → readout; both conjugation signs are folded back in.
    """
    if a.is_identity or b.is_identity:
        raise ValueError("trace-pair needs non-identity Pauli strings")
    n = u.n
    z1 = PauliString.single(n, 1, "Z")
    prep = synthesize_conjugation(z1, b)
    post = synthesize_conjugation(a, z1)
    net = prep.network | u | post.network
    est = estimate(lambda: evolve(init_dqc1(n), net), meter, budget)
    sign = prep.sign * post.sign
    oracle = None
    if _dense_ok(n):
        mat = network_unitary(u)
        oracle = float(
            np.trace(pauli_matrix(a) @ mat @ pauli_matrix(b) @ mat.conj().T).real / (1 << n)
        )
    return TraceEstimate(sign * est.value, est.stderr, est.shots, oracle)


@dataclass(frozen=True)
class PauliCoefficient:
    """Estimate of ``α_b = tr(σ_b U)/2^n``; ``stderr`` is per real component."""

    b: PauliString
    value: complex
    stderr: float
    shots: int = 0
    dense_oracle: complex | None = None


def pauli_coefficient_dense(u: GateNetwork, b: PauliString) -> complex:
    """``tr(σ_b U) / 2^n`` from dense matrices."""
    mat = network_unitary(u)
    src, ph = pauli_action(b)
    # tr(σU) = Σ_r ph[r] U[src[r], r]
    return complex(np.sum(ph * mat[src, np.arange(mat.shape[0])]) / (1 << u.n))


def estimate_pauli_coefficient(
    u: GateNetwork, b: PauliString, meter: NoisyMeter, budget: EstimationBudget
) -> PauliCoefficient:
    """Two DQC1 runs on ``n+1`` qubits: deviation ``σ_x^(1)σ_b``, controlled-U, read σ_x / σ_y.

    ``tr(σ_x^(1) V σ_x^(1)σ_b V†)/2^{n+1} = Re α_b`` and the σ_y reading is
    ``-Im α_b``.  ``b`` may be the identity, giving ``tr(U)/2^n``.
    """
    n = u.n
    if b.n != n:
        raise ValueError(f"{b.n}-qubit Pauli for a {n}-qubit network")
    m = n + 1
    z1 = PauliString.single(m, 1, "Z")
    x1 = PauliString.single(m, 1, "X")
    y1 = PauliString.single(m, 1, "Y")
    dev = pauli_mul(x1, b.embed(m, 1)).string  # disjoint supports, phase +1
    prep = synthesize_conjugation(z1, dev)
    v = conditional_u(u, 0)
    parts = []
    for obs in (x1, y1):
        post, s_post = readout_network(obs)
        net = prep.network | v | post
        est = estimate(lambda: evolve(init_dqc1(m), net), meter, budget)
        parts.append((prep.sign * s_post * est.value, est))
    (re, est_re), (neg_im, est_im) = parts
    oracle = pauli_coefficient_dense(u, b) if _dense_ok(n) else None
    return PauliCoefficient(
        b,
        complex(re, -neg_im),
        max(est_re.stderr, est_im.stderr),
        est_re.shots + est_im.shots,
        oracle,
    )


# -- DQCp transition amplitudes ----------------------------------------


@dataclass(frozen=True)
class MatrixElement:
    """Estimate of ``<a|U|b>``."""

    a: str
    b: str
    value: complex
    stderr_re: float
    stderr_im: float
    shots: int
    dense_oracle: complex | None = None

    @property
    def stderr(self) -> float:
        return max(self.stderr_re, self.stderr_im)


def _basis_prep(n: int, bits: str) -> list[PauliRotation]:
    # exp(-iπ/2 X) = -iX flips a bit up to a global phase
    return [PauliRotation(PauliString.single(n, k + 1, "X"), math.pi / 2) for k, c in enumerate(bits) if c == "1"]


def _superposition_prep(n: int, a: str, b: str, rel: complex) -> GateNetwork:
    """``(|a> + rel|b>)/√2`` from ``|0...0>`` up to global phase, ``rel ∈ {1, i}``.

    From ``|a>``, ``exp(-iθP)|a> = cos θ|a> - i sin θ ph|b>`` when ``P|a> = ph|b>``.
    """
    diff = [k + 1 for k in range(n) if a[k] != b[k]]
    idx_a = int(a, 2)
    pivot = diff[0]
    for first in "XY":
        p = PauliString.from_letters(n, {q: (first if q == pivot else "X") for q in diff})
        src, ph = pauli_action(p)
        # σ|c> lands on row src[c] with phase ph[src[c]]
        factor = ph[src[idx_a]]
        for theta in (_QUARTER, -_QUARTER):
            if abs(-1j * math.copysign(1, theta) * factor - rel) < 1e-12:
                return GateNetwork(n, tuple(_basis_prep(n, a)) + (PauliRotation(p, theta),))
    raise AssertionError("unreachable: X or Y pivot always yields the phase")


def _hadamard_test_pure(
    u: GateNetwork, prep: GateNetwork, meter: NoisyMeter, budget: EstimationBudget
) -> tuple[complex, float, float, int]:
    """``<φ|U|φ>`` from a pure register: control in |+>, controlled-U, read σ_x, σ_y."""
    n = u.n
    m = n + 1
    plus = GateNetwork(m, (PauliRotation(PauliString.single(m, 1, "Y"), _QUARTER),))
    v = conditional_u(u, 0)
    base = plus | prep.embed(m, 1) | v
    out = []
    for letter in "XY":
        post, sign = readout_network(PauliString.single(m, 1, letter))
        net = base | post
        est = estimate(lambda: evolve(init_dqcp(m), net), meter, budget)
        out.append((sign * est.value, est))
    (x, ex), (y, ey) = out
    # <σ_x> = Re<φ|U|φ>, <σ_y> = -Im<φ|U|φ>
    return complex(x, -y), ex.stderr, ey.stderr, ex.shots + ey.shots


def _check_bits(n: int, s: str) -> None:
    if len(s) != n or set(s) - {"0", "1"}:
        raise ValueError(f"basis label {s!r} is not a {n}-bit string")


def dqcp_matrix_element(
    u: GateNetwork, a: str, b: str, meter: NoisyMeter, budget: EstimationBudget
) -> MatrixElement:
    """Estimate ``<a|U|b>`` from four pure preparations and a least-squares solve.

    Preparations ``|a>``, ``|b>``, ``(|a>+|b>)/√2`` and ``(|a>+i|b>)/√2``
    give ``<φ|U|φ>`` as linear combinations of ``U_aa, U_bb, U_ab, U_ba``.
    """
    n = u.n
    _check_bits(n, a)
    _check_bits(n, b)
    oracle = complex(network_unitary(u)[int(a, 2), int(b, 2)]) if _dense_ok(n) else None
    if a == b:
        val, se_x, se_y, shots = _hadamard_test_pure(u, GateNetwork(n, tuple(_basis_prep(n, a))), meter, budget)
        return MatrixElement(a, b, val, se_x, se_y, shots, oracle)

    # weights of (U_aa, U_bb, U_ab, U_ba) in <φ|U|φ> for each preparation
    preps = [
        (GateNetwork(n, tuple(_basis_prep(n, a))), (1, 0, 0, 0)),
        (GateNetwork(n, tuple(_basis_prep(n, b))), (0, 1, 0, 0)),
        (_superposition_prep(n, a, b, 1), (0.5, 0.5, 0.5, 0.5)),
        (_superposition_prep(n, a, b, 1j), (0.5, 0.5, 0.5j, -0.5j)),
    ]
    rows, y, var = [], [], []
    shots = 0
    for prep, w in preps:
        val, se_re, se_im, k = _hadamard_test_pure(u, prep, meter, budget)
        shots += k
        # unknowns: Re/Im of U_aa, U_bb, U_ab, U_ba
        re_row, im_row = [], []
        for wj in w:
            wj = complex(wj)
            re_row += [wj.real, -wj.imag]
            im_row += [wj.imag, wj.real]
        rows += [re_row, im_row]
        y += [val.real, val.imag]
        var += [se_re**2, se_im**2]
    design = np.array(rows)
    pinv = np.linalg.pinv(design)
    x = pinv @ np.array(y)
    cov = pinv @ np.diag(var) @ pinv.T
    value = complex(x[4], x[5])
    return MatrixElement(a, b, value, math.sqrt(cov[4, 4]), math.sqrt(cov[5, 5]), shots, oracle)


# -- pseudo-pure preparation -------------------------------------------


def pseudo_pure_prepare(n: int) -> GateNetwork:
    """SWAP(bit 0, bit 1), then ``T_n``, then flip bit 0, on ``n+1`` qubits.

    Internal qubit 1 is the ancilla bit 0; qubits 2..n+1 are bits 1..n.
    Starting from ``init_dqc1(n+1, clean_qubit=2)`` the deviation becomes
    ``σ_z^(0) (2|0><0| - I)``.
    """
    m = n + 1
    return swap_network(m, 1, 2) | build_tn(n) | pauli_gate(PauliString.single(m, 1, "X"))


def pseudo_pure_state(n: int, u: GateNetwork | None = None) -> DensityState:
    m = n + 1
    net = pseudo_pure_prepare(n)
    if u is not None:
        net = net | u.embed(m, 1)
    return evolve(init_dqc1(m, clean_qubit=2), net)


def pseudo_pure_deviation_target(n: int) -> np.ndarray:
    """Dense ``σ_z^(0) ⊗ (2|0><0| - I)`` on ``n+1`` qubits (ancilla first)."""
    d = 1 << n
    proj = np.zeros((d, d))
    proj[0, 0] = 1
    return np.kron(np.diag([1.0, -1.0]), 2 * proj - np.eye(d))


@dataclass(frozen=True)
class PseudoPureReport:
    """``signal`` is the measured ``<σ_z^(0) σ_z^(1)>``, equal to ``2α/2^n``."""

    n: int
    signal: float
    signal_stderr: float
    alpha: float
    alpha_stderr: float
    shots: int
    intensity: float
    shots_for_sign: int
    signal_dense: float | None = None
    alpha_dense: float | None = None


def pseudo_pure_intensity(n: int) -> float:
    """Magnitude of the ``σ_z^(0)σ_z^(1)`` coefficient per unit answer, ``2^{1-n}``."""
    return 2.0 ** (1 - n)


def shots_for_sign(n: int, p: float, variance_bound: float = 1.0) -> int:
    """Repetitions that resolve the sign of a ``±2^{1-n}`` signal with failure ``p``."""
    eps = pseudo_pure_intensity(n) / 2
    return EstimationBudget(min(eps, 0.5), p).repetitions(variance_bound)


def pseudo_pure_answer(
    u: GateNetwork, meter: NoisyMeter, budget: EstimationBudget
) -> PseudoPureReport:
    """Read the answer bit of ``U`` through a pseudo-pure state.

    The coefficient of ``σ_z^(0)σ_z^(1)`` is ``2α/2^n`` with
    ``α = <0|U† σ_z^(1) U|0>``; it is rotated onto the measured qubit and
    rescaled by ``2^{n-1}``.
    """
    n = u.n
    m = n + 1
    zz = PauliString.from_letters(m, {1: "Z", 2: "Z"})
    post, sign = readout_network(zz)
    net = pseudo_pure_prepare(n) | u.embed(m, 1) | post
    est: MeanEstimate = estimate(lambda: evolve(init_dqc1(m, clean_qubit=2), net), meter, budget)
    scale = 2.0 ** (n - 1)
    signal = sign * est.value
    sig_dense = alpha_dense = None
    if _dense_ok(m):
        mat = network_unitary(u)
        psi = mat[:, 0]
        src, ph = pauli_action(PauliString.single(n, 1, "Z"))
        alpha_dense = float(np.vdot(psi, ph * psi[src]).real)
        sig_dense = alpha_dense / scale
    return PseudoPureReport(
        n=n,
        signal=signal,
        signal_stderr=est.stderr,
        alpha=signal * scale,
        alpha_stderr=est.stderr * scale,
        shots=est.shots,
        intensity=pseudo_pure_intensity(n),
        shots_for_sign=shots_for_sign(n, budget.p, meter.variance_bound),
        signal_dense=sig_dense,
        alpha_dense=alpha_dense,
    )


def pseudo_pure_sign_error_rate(
    u: GateNetwork, shots: int, trials: int, meter: NoisyMeter
) -> float:
    """Fraction of ``trials`` fixed-shot runs whose answer sign is wrong."""
    budget = EstimationBudget(0.5, 0.5, shots=shots)
    wrong = 0
    truth = None
    for _ in range(trials):
        rep = pseudo_pure_answer(u, meter, budget)
        truth = np.sign(rep.alpha_dense) if truth is None else truth
        wrong += np.sign(rep.alpha) != truth
    return wrong / trials
