"""Dense pure and mixed states: the exact oracle behind every sampled estimator."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._config import InvariantError, check_dense, settings
from .circuit import GateNetwork, PauliSum, apply_gate
from .pauli import PauliString, pauli_action

_HERM_TOL = 1e-10
_TRACE_TOL = 1e-10
_PSD_TOL = 1e-10
_DRIFT_TOL = 1e-8

# single-qubit Paulis indexed by the two-bit code I, X, Y, Z
_P1 = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError(f"need at least one qubit, got {n}")
    check_dense(n)


@dataclass(frozen=True, eq=False)
class DensityState:
    """A ``2^n x 2^n`` density operator; Hermiticity and trace are checked on construction."""

    n: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = 1 << self.n
        if m.shape != (d, d):
            raise ValueError(f"expected {d}x{d} matrix for {self.n} qubits, got {m.shape}")
        if np.abs(m - m.conj().T).max() > _HERM_TOL:
            raise InvariantError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > _TRACE_TOL:
            raise InvariantError(f"density matrix has trace {np.trace(m).real:.12g}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return 1 << self.n

    @property
    def density(self) -> DensityState:
        return self

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def validate(self, tol: float = _PSD_TOL) -> None:
        """Full check including positivity (costs an eigendecomposition)."""
        if self.eigenvalues().min() < -tol:
            raise InvariantError("density matrix has a negative eigenvalue")

    def deviation(self, cutoff: float = 1e-12) -> DeviationView:
        return DeviationView.from_state(self, cutoff)


@dataclass(frozen=True, eq=False)
class PureState:
    """A state vector; the density matrix is formed only on demand."""

    n: int
    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=complex)
        if v.shape != (1 << self.n,):
            raise ValueError(f"expected length {1 << self.n} vector, got {v.shape}")
        if abs(np.vdot(v, v).real - 1) > _TRACE_TOL:
            raise InvariantError("state vector is not normalized")
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @property
    def dim(self) -> int:
        return 1 << self.n

    @cached_property
    def density(self) -> DensityState:
        return DensityState(self.n, np.outer(self.vector, self.vector.conj()))

    @classmethod
    def basis(cls, n: int, bits: str | int) -> PureState:
        _check_n(n)
        idx = int(bits, 2) if isinstance(bits, str) else bits
        if isinstance(bits, str) and len(bits) != n:
            raise ValueError(f"basis label {bits!r} is not {n} bits")
        v = np.zeros(1 << n, dtype=complex)
        v[idx] = 1
        return cls(n, v)


State = DensityState | PureState


@dataclass(frozen=True)
class DeviationView:
    """Sparse real coefficients ``a_b`` with ``ρ = (I + Σ a_b σ_b) / 2^n``."""

    n: int
    coefficients: dict[PauliString, float] = field(default_factory=dict)

    @classmethod
    def from_state(cls, state: DensityState, cutoff: float = 1e-12) -> DeviationView:
        coeffs = pauli_coefficients(state.matrix)
        if np.abs(coeffs.imag).max() > 1e-10:
            raise InvariantError("Pauli coefficients of a Hermitian state must be real")
        flat = coeffs.real.ravel()
        out = {}
        for code in np.flatnonzero(np.abs(flat) > cutoff):
            if code:
                out[PauliString(state.n, int(code))] = float(flat[code])
        return cls(state.n, out)

    def to_state(self) -> DensityState:
        _check_n(self.n)
        dense = np.zeros((4,) * self.n)
        dense.flat[0] = 1.0
        for p, a in self.coefficients.items():
            dense.flat[p.code] = a
        return DensityState(self.n, pauli_synthesis(dense) / (1 << self.n))

    def operator(self) -> np.ndarray:
        """The deviation itself, ``Σ a_b σ_b``, as a dense matrix."""
        dense = np.zeros((4,) * self.n)
        for p, a in self.coefficients.items():
            dense.flat[p.code] = a
        return pauli_synthesis(dense)

    def __getitem__(self, p: PauliString) -> float:
        return self.coefficients.get(p, 0.0)


def pauli_coefficients(matrix: np.ndarray) -> np.ndarray:
    """All ``tr(σ_b M)`` at once, shaped ``(4,)*n`` so that ``.flat[code]`` is ``b``.

    Contracts one qubit's (row, column) pair at a time, ``O(n 4^n)``.
    """
    d = matrix.shape[0]
    n = d.bit_length() - 1
    t = np.asarray(matrix, dtype=complex).reshape((2,) * (2 * n))
    q = _P1.transpose(0, 2, 1)  # q[p, r, c] = P_p[c, r]
    for k in range(n):
        # axes: r_k.., c_k.., p_1..p_k
        t = np.moveaxis(np.tensordot(q, t, axes=([1, 2], [0, n - k])), 0, -1)
    # axes are p_1..p_n; code order wants qubit 1 as the fastest index
    return t.transpose(tuple(reversed(range(n))))


def pauli_synthesis(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`pauli_coefficients` without the ``2^-n``: ``Σ_b c_b σ_b``."""
    n = coeffs.ndim
    t = np.asarray(coeffs, dtype=complex).transpose(tuple(reversed(range(n))))
    for _ in range(n):
        # axes: p_k.., (r, c) pairs for finished qubits
        t = np.tensordot(t, _P1, axes=([0], [0]))
    order = tuple(range(0, 2 * n, 2)) + tuple(range(1, 2 * n, 2))
    return t.transpose(order).reshape(1 << n, 1 << n)


def init_dqcp(n: int) -> PureState:
    """All qubits in ``|0>``."""
    return PureState.basis(n, 0)


def init_dqc1(n: int, clean_qubit: int = 1) -> DensityState:
    """Deviation ``σ_z`` on ``clean_qubit``; every other qubit maximally mixed."""
    _check_n(n)
    if not 1 <= clean_qubit <= n:
        raise ValueError(f"clean qubit {clean_qubit} outside 1..{n}")
    z = PauliString.single(n, clean_qubit, "Z")
    _, phase = pauli_action(z)
    return DensityState(n, np.diag(1 + phase) / (1 << n))


def maximally_mixed(n: int) -> DensityState:
    _check_n(n)
    return DensityState(n, np.eye(1 << n, dtype=complex) / (1 << n))


def is_unitary(u: np.ndarray, tol: float = 1e-8) -> bool:
    return np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) <= tol


def apply_unitary(state: State, u: np.ndarray) -> State:
    """``U ρ U†`` (or ``U|ψ>`` on the pure path)."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (state.dim, state.dim):
        raise ValueError(f"unitary of shape {u.shape} does not match {state.n} qubits")
    if not is_unitary(u):
        raise ValueError("matrix is not unitary (Frobenius test at 1e-8)")
    if isinstance(state, PureState):
        return PureState(state.n, u @ state.vector)
    return DensityState(state.n, _hermitize(u @ state.matrix @ u.conj().T))


def _hermitize(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def evolve(state: State, net: GateNetwork) -> State:
    """Apply a gate network gate by gate.

    Density matrices are re-symmetrized every ``settings.resymmetrize_every``
    gates; drift above 1e-8 before re-symmetrizing raises.
    """
    if net.n != state.n:
        raise ValueError(f"{net.n}-qubit network on a {state.n}-qubit state")
    if isinstance(state, PureState):
        v = state.vector
        for g in net.gates:
            v = apply_gate(g, v)
        return PureState(state.n, v)  # global phase is irrelevant to ρ
    rho = state.matrix
    for i, g in enumerate(net.gates, start=1):
        rho = apply_gate(g, apply_gate(g, rho).conj().T).conj().T
        if i % settings.resymmetrize_every == 0:
            if np.abs(rho - rho.conj().T).max() > _DRIFT_TOL:
                raise InvariantError(f"Hermiticity drift above {_DRIFT_TOL} after {i} gates")
            rho = _hermitize(rho)
    return DensityState(state.n, _hermitize(rho))


def expectation(state: State, a: PauliString) -> float:
    """``tr(σ_a ρ)`` via the Pauli row action, no dense Pauli matrix."""
    if a.n != state.n:
        raise ValueError(f"{a.n}-qubit Pauli on a {state.n}-qubit state")
    src, phase = pauli_action(a)
    if isinstance(state, PureState):
        v = state.vector
        return float(np.vdot(v, phase * v[src]).real)
    # tr(σρ) = Σ_r phase[r] ρ[src[r], r]
    rho = state.matrix
    return float(np.sum(phase * rho[src, np.arange(state.dim)]).real)


def deviation_coefficient(state: State, b: PauliString) -> float:
    """``a_b = tr(σ_b ρ)``; the identity coefficient is fixed by normalization."""
    if b.is_identity:
        raise ValueError("the identity coefficient is fixed at 1; ask for b != 0")
    return expectation(state, b)


def eigen_spectrum(h: PauliSum) -> np.ndarray:
    """Ascending eigenvalues of ``H`` with multiplicity."""
    return np.linalg.eigvalsh(h.matrix())


def multiplets(eigenvalues: np.ndarray, tol: float = 1e-9) -> list[tuple[float, int]]:
    """Group sorted eigenvalues closer than ``tol`` into ``(first value, multiplicity)``."""
    out: list[tuple[float, int]] = []
    prev = None
    for lam in np.sort(eigenvalues):
        if prev is not None and lam - prev <= tol:
            out[-1] = (out[-1][0], out[-1][1] + 1)
        else:
            out.append((float(lam), 1))
        prev = lam
    return out


def dump_csv(state: State) -> str:
    """Row-major ``re,im`` pairs; debugging aid, not a stable format."""
    rho = state.density.matrix if isinstance(state, PureState) else state.matrix
    buf = io.StringIO()
    for row in rho:
        buf.write(",".join(f"{z.real!r},{z.imag!r}" for z in row) + "\n")
    return buf.getvalue()
