"""Numerical testbed for the one-clean-qubit oracle separation bound.

A deterministic oracle ``U`` maps ``|0>|0...0>`` to ``|b>|ψ>``.  Flipping
its answer with ``T = I - 2P``, ``P = (I - σ_x^(1))/2 ⊗ |ψ><ψ|``, moves the
expectation of any ``r``-query DQC1 algorithm by at most ``4r/2^n``.
Oracles and ``T`` are kept dense: the argument is about information, not
gate counts.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy.stats import unitary_group

from ._config import check_dense
from .circuit import GateNetwork, network_unitary, random_network
from .measurement import EstimationBudget, MeanEstimate, NoisyMeter, estimate
from .pauli import PauliString, pauli_action
from .state import DensityState, init_dqc1


class NotDeterministicError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DeterministicOracle:
    """``unitary |0...0> = |first_bit> ⊗ |residual>``; ``answer = (-1)^first_bit``."""

    n: int
    unitary: np.ndarray
    answer: int
    residual: np.ndarray

    @property
    def first_bit(self) -> int:
        return 0 if self.answer == 1 else 1

    @classmethod
    def from_unitary(cls, u: np.ndarray, tol: float = 1e-9) -> DeterministicOracle:
        d = u.shape[0]
        n = d.bit_length() - 1
        check_dense(n)
        out = u[:, 0]
        half = d // 2
        w0, w1 = np.linalg.norm(out[:half]), np.linalg.norm(out[half:])
        if min(w0, w1) > tol:
            raise NotDeterministicError(
                f"first qubit of U|0> is not a basis state (weights {w0**2:.3g}, {w1**2:.3g})"
            )
        bit = 0 if w0 > w1 else 1
        psi = out[half * bit : half * (bit + 1)]
        return cls(n, u, 1 - 2 * bit, psi / np.linalg.norm(psi))

    def flip_operator(self) -> np.ndarray:
        """``T = I - 2P``."""
        return np.eye(1 << self.n) - 2 * self.projector()

    def projector(self) -> np.ndarray:
        """``P = (I - σ_x)/2 ⊗ |ψ><ψ|``, rank one."""
        minus = np.array([[0.5, -0.5], [-0.5, 0.5]])
        return np.kron(minus, np.outer(self.residual, self.residual.conj()))


def random_oracle(rng: np.random.Generator, n: int, answer: int | None = None) -> DeterministicOracle:
    """``U = (I ⊗ W) X_1^a W'`` with ``W'`` fixing ``|0...0>``.

    ``W'`` is Haar-random on the complement of ``|0...0>`` with a random phase
    on it; ``W`` is Haar-random on qubits 2..n.  Determinism holds by
    construction.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    d = 1 << n
    if answer is None:
        answer = 1 if rng.random() < 0.5 else -1
    wprime = np.zeros((d, d), dtype=complex)
    wprime[0, 0] = np.exp(2j * np.pi * rng.random())
    wprime[1:, 1:] = unitary_group.rvs(d - 1, random_state=rng) if d > 2 else np.exp(2j * np.pi * rng.random())
    w = unitary_group.rvs(d // 2, random_state=rng) if d > 2 else np.exp(2j * np.pi * rng.random()) * np.eye(1)
    flip = np.kron(np.array([[0, 1], [1, 0]]), np.eye(d // 2)) if answer == -1 else np.eye(d)
    u = np.kron(np.eye(2), w) @ flip @ wprime
    return DeterministicOracle.from_unitary(u)


def make_flipped_oracle(orc: DeterministicOracle) -> DeterministicOracle:
    """``U' = T U``: deterministic with the opposite answer and the same residual."""
    u2 = orc.flip_operator() @ orc.unitary
    flipped = DeterministicOracle.from_unitary(u2)
    if flipped.answer != -orc.answer:
        raise AssertionError("flip operator failed to negate the answer")
    return flipped


def trace_bound_ratio(p: np.ndarray, w1: np.ndarray, w2: np.ndarray, n: int) -> float:
    """``|tr(W1 P W2)| / 2^m`` divided by ``2^{-n}``; at most 1."""
    d = w1.shape[0]
    return abs(np.trace(w1 @ p @ w2)) / d * (1 << n)


# -- interleaved algorithms --------------------------------------------


@dataclass(frozen=True)
class InterleavedAlgorithm:
    """``V_0, U, V_1, ..., U, V_r`` on ``m`` qubits; the oracle sits on ``offset+1 .. offset+n``."""

    m: int
    networks: tuple[GateNetwork, ...]
    n: int
    offset: int = 0

    def __post_init__(self):
        if not self.networks:
            raise ValueError("need at least V_0")
        if self.n + self.offset > self.m:
            raise ValueError(f"{self.n}-qubit oracle at offset {self.offset} exceeds {self.m} qubits")
        for v in self.networks:
            if v.n != self.m:
                raise ValueError(f"network on {v.n} qubits in an {self.m}-qubit algorithm")

    @property
    def r(self) -> int:
        return len(self.networks) - 1


def _embed_oracle(alg: InterleavedAlgorithm, u: np.ndarray) -> np.ndarray:
    if u.shape[0] != 1 << alg.n:
        raise ValueError(f"oracle of dimension {u.shape[0]} for an {alg.n}-qubit slot")
    before = np.eye(1 << alg.offset)
    after = np.eye(1 << (alg.m - alg.n - alg.offset))
    return np.kron(np.kron(before, u), after)


def _z1_diag(m: int) -> np.ndarray:
    return pauli_action(PauliString.single(m, 1, "Z"))[1].real


def _v_from_dense(alg: InterleavedAlgorithm, vs: list[np.ndarray], u_emb: np.ndarray) -> float:
    z = _z1_diag(alg.m)
    x = vs[0]
    for v in vs[1:]:
        x = v @ u_emb @ x
    # tr(X Z X† Z) = Σ_ij |X_ij|² z_i z_j for diagonal Z
    return float(z @ (np.abs(x) ** 2) @ z / (1 << alg.m))


def evaluate_v(alg: InterleavedAlgorithm, orc: DeterministicOracle | np.ndarray) -> float:
    """``2^{-m} tr(V_r U ... U V_0 σ_z V_0† U† ... V_r† σ_z)`` exactly."""
    check_dense(alg.m)
    u = orc.unitary if isinstance(orc, DeterministicOracle) else orc
    vs = [network_unitary(v) for v in alg.networks]
    return _v_from_dense(alg, vs, _embed_oracle(alg, u))


def algorithm_network(alg: InterleavedAlgorithm, orc: DeterministicOracle) -> np.ndarray:
    """Dense ``V_r U ... U V_0``."""
    u_emb = _embed_oracle(alg, orc.unitary)
    x = network_unitary(alg.networks[0])
    for v in alg.networks[1:]:
        x = network_unitary(v) @ u_emb @ x
    return x


def simulate_v(
    alg: InterleavedAlgorithm, orc: DeterministicOracle, meter: NoisyMeter, budget: EstimationBudget
) -> MeanEstimate:
    """Run the algorithm on the one-clean-qubit input and sample ``<σ_z^(1)>``."""
    x = algorithm_network(alg, orc)
    rho = init_dqc1(alg.m).matrix
    final = x @ rho @ x.conj().T
    return estimate(DensityState(alg.m, (final + final.conj().T) / 2), meter, budget)


def telescoping_terms(alg: InterleavedAlgorithm, orc: DeterministicOracle) -> list[complex]:
    """The ``2r`` terms ``a_i`` with ``2^m v(U') = Σ a_i + 2^m v(U)``.

    ``v`` is a trace of a product with ``r`` factors ``U'`` and ``r`` factors
    ``U'†``.  Swapping them for ``U``/``U†`` one at a time, left to right,
    leaves term ``i`` with ``U' - U = -2PU`` (or ``-2U†P``) in slot ``i``,
    primed factors after it and unprimed before; each is ``tr(W1 P W2)``
    scaled by 2, hence ``|a_i| <= 2^{m-n+1}``.
    """
    m = alg.m
    flipped = make_flipped_oracle(orc)
    u = _embed_oracle(alg, orc.unitary)
    up = _embed_oracle(alg, flipped.unitary)
    vs = [network_unitary(v) for v in alg.networks]
    z = np.diag(_z1_diag(m)).astype(complex)

    # factor list of X Z X† Z, oracle slots marked
    factors: list[tuple[str, np.ndarray | None]] = [("fixed", vs[-1])]
    for v in reversed(vs[:-1]):
        factors += [("U", None), ("fixed", v)]
    factors.append(("fixed", z))
    factors.append(("fixed", vs[0].conj().T))
    for v in vs[1:]:
        factors += [("Ud", None), ("fixed", v.conj().T)]
    factors.append(("fixed", z))

    slots = [i for i, (kind, _) in enumerate(factors) if kind != "fixed"]
    diff = {"U": up - u, "Ud": up.conj().T - u.conj().T}
    plain = {"U": u, "Ud": u.conj().T}
    primed = {"U": up, "Ud": up.conj().T}
    terms = []
    for j, slot in enumerate(slots):
        prod = np.eye(1 << m, dtype=complex)
        for i, (kind, mat) in enumerate(factors):
            if kind == "fixed":
                f = mat
            elif i == slot:
                f = diff[kind]
            elif slots.index(i) < j:
                f = plain[kind]
            else:
                f = primed[kind]
            prod = prod @ f
        terms.append(complex(np.trace(prod)))
    return terms


# -- sweeps ------------------------------------------------------------


AlgorithmSampler = Callable[[np.random.Generator, int, int, int], InterleavedAlgorithm]


def random_algorithm(
    rng: np.random.Generator, n: int, m: int, r: int, gates: int = 10, max_weight: int = 2
) -> InterleavedAlgorithm:
    """``r+1`` random networks of ``gates`` rotations about weight ``<= max_weight`` axes."""
    nets = tuple(random_network(rng, m, gates, max_weight) for _ in range(r + 1))
    return InterleavedAlgorithm(m, nets, n)


def pseudo_pure_algorithm(rng: np.random.Generator, n: int, m: int, r: int) -> InterleavedAlgorithm:
    """One oracle call on a pseudo-pure input; ``|v(U') - v(U)|`` reaches ``4/2^n``.

    Qubits ``1..n`` hold the oracle register (clean qubit first) and qubit
    ``n+1`` is the ancilla bit.  ``V_0`` leaves the deviation
    ``σ_z^(n+1) ⊗ (2|0...0><0...0| - I)``; ``V_1`` rotates
    ``σ_z^(1) σ_z^(n+1)`` onto ``σ_z^(1)``.  Only ``r = 1`` is defined.
    """
    from .circuit import swap_network
    from .protocols import pseudo_pure_prepare, readout_network

    if r != 1:
        raise ValueError(f"the pseudo-pure algorithm makes exactly one query, got r={r}")
    if m < n + 1:
        raise ValueError("the pseudo-pure algorithm needs one ancilla (m >= n+1)")
    anc = n + 1
    # cyclic shift bringing the ancilla to qubit 1, the layout the preparation expects
    to_front = GateNetwork(m)
    for q in range(anc, 1, -1):
        to_front = to_front | swap_network(m, q - 1, q)
    v0 = to_front | pseudo_pure_prepare(n).embed(m, 0) | to_front.inverse()
    post, _ = readout_network(PauliString.from_letters(m, {1: "Z", anc: "Z"}))
    return InterleavedAlgorithm(m, (v0, post), n)


@dataclass(frozen=True)
class SeparationResult:
    vU: float
    vUprime: float
    bound: float

    @property
    def satisfied(self) -> bool:
        return abs(self.vUprime - self.vU) <= self.bound + 1e-9


@dataclass(frozen=True)
class SweepCell:
    n: int
    r: int
    m: int
    bound: float
    observed_max: float
    violations: int
    trials: int


@dataclass
class SweepConfig:
    ns: Iterable[int] = (2, 3, 4, 5, 6)
    rs: Iterable[int] = (0, 1, 2, 3, 4)
    extra_qubits: Iterable[int] = (0, 1, 2)
    trials: int = 200
    seed: int = 0
    sampler: str = "random"
    gates: int = 10


SAMPLERS: dict[str, AlgorithmSampler] = {
    "random": random_algorithm,
    "pseudo-pure": pseudo_pure_algorithm,
}


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    """Deterministic per-trial generator keyed by ``(seed, 'separation', *key)``."""
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(zlib.crc32(b"separation"), *key))
    )


def separation_trial(
    rng: np.random.Generator, n: int, m: int, r: int, sampler: AlgorithmSampler
) -> SeparationResult:
    orc = random_oracle(rng, n)
    flipped = make_flipped_oracle(orc)
    alg = sampler(rng, n, m, r)
    vs = [network_unitary(v) for v in alg.networks]
    v_u = _v_from_dense(alg, vs, _embed_oracle(alg, orc.unitary))
    v_up = _v_from_dense(alg, vs, _embed_oracle(alg, flipped.unitary))
    return SeparationResult(v_u, v_up, 4 * r / 2**n)


def separation_sweep(cfg: SweepConfig) -> list[SweepCell]:
    """Max ``|v(U') - v(U)|`` per ``(n, r, m)`` cell against ``4r/2^n``."""
    if cfg.sampler not in SAMPLERS:
        raise ValueError(f"unknown sampler {cfg.sampler!r}; expected one of {sorted(SAMPLERS)}")
    base = SAMPLERS[cfg.sampler]
    if cfg.sampler == "random":
        sampler = lambda rng, n, m, r: random_algorithm(rng, n, m, r, gates=cfg.gates)  # noqa: E731
    else:
        sampler = base
    cells = []
    for n in cfg.ns:
        for r in cfg.rs:
            for extra in cfg.extra_qubits:
                m = n + extra
                if cfg.sampler == "pseudo-pure" and (extra == 0 or r != 1):
                    continue
                check_dense(m)
                worst, bad = 0.0, 0
                for trial in range(cfg.trials):
                    res = separation_trial(trial_rng(cfg.seed, n, r, m, trial), n, m, r, sampler)
                    worst = max(worst, abs(res.vUprime - res.vU))
                    bad += not res.satisfied
                cells.append(SweepCell(n, r, m, 4 * r / 2**n, worst, bad, cfg.trials))
    return cells


def sweep_csv(cells: list[SweepCell]) -> str:
    lines = ["n,r,m,bound,observed_max,violations"]
    for c in cells:
        lines.append(f"{c.n},{c.r},{c.m},{c.bound!r},{c.observed_max!r},{c.violations}")
    return "\n".join(lines) + "\n"
