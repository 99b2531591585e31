"""Gates, gate networks, Pauli-sum Hamiltonians and the network compilers.

A ``PauliRotation(axis, t)`` is ``exp(-i t σ_axis)``.  A
``ControlledPauliRotation`` applies the same rotation only on the branch
where the control qubit holds ``value``.  A ``GateNetwork`` lists gates in
time order and carries an exact global phase, since the gate set is
determinant-one and some targets (``T_n``, ``SWAP``) are not.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np
import scipy.linalg

from ._config import check_dense
from .pauli import PauliString, apply_pauli, pauli_action, pauli_mul

__all__ = [
    "PauliRotation",
    "ControlledPauliRotation",
    "GateNetwork",
    "PauliSum",
    "gate_unitary",
    "network_unitary",
    "apply_gate",
    "apply_network",
    "conditional_u",
    "conditional_half_evolutions",
    "trotterize",
    "build_tn",
    "swap_network",
    "pauli_gate",
    "parse_circuit",
    "format_circuit",
    "parse_hamiltonian",
    "format_hamiltonian",
    "CircuitParseError",
    "random_network",
    "random_pauli_sum",
]


@dataclass(frozen=True)
class PauliRotation:
    axis: PauliString
    angle: float

    def __post_init__(self):
        if self.axis.is_identity:
            raise ValueError("rotation axis must not be the identity string")

    @property
    def n(self) -> int:
        return self.axis.n

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.axis.support

    def inverse(self) -> PauliRotation:
        return PauliRotation(self.axis, -self.angle)


@dataclass(frozen=True)
class ControlledPauliRotation:
    control: int
    value: int
    axis: PauliString
    angle: float

    def __post_init__(self):
        if self.axis.is_identity:
            raise ValueError("rotation axis must not be the identity string")
        if self.value not in (0, 1):
            raise ValueError(f"control value must be 0 or 1, got {self.value}")
        if not 1 <= self.control <= self.axis.n:
            raise ValueError(f"control qubit {self.control} outside 1..{self.axis.n}")
        if self.axis.letter(self.control) != "I":
            raise ValueError(f"axis {self.axis.label} acts on control qubit {self.control}")

    @property
    def n(self) -> int:
        return self.axis.n

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(sorted((self.control, *self.axis.support)))

    def inverse(self) -> ControlledPauliRotation:
        return ControlledPauliRotation(self.control, self.value, self.axis, -self.angle)


Gate = Union[PauliRotation, ControlledPauliRotation]


@dataclass(frozen=True)
class GateNetwork:
    """Gates applied left to right in time; the unitary is ``e^{i phase} G_L ... G_1``."""

    n: int
    gates: tuple[Gate, ...] = ()
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if g.n != self.n:
                raise ValueError(f"gate on {g.n} qubits in a {self.n}-qubit network")

    def __len__(self) -> int:
        return len(self.gates)

    def then(self, other: GateNetwork) -> GateNetwork:
        """``self`` followed by ``other``."""
        if other.n != self.n:
            raise ValueError(f"cannot compose {self.n}- and {other.n}-qubit networks")
        return GateNetwork(self.n, self.gates + other.gates, self.phase + other.phase)

    __or__ = then

    def inverse(self) -> GateNetwork:
        return GateNetwork(self.n, tuple(g.inverse() for g in reversed(self.gates)), -self.phase)

    def power(self, k: int) -> GateNetwork:
        if k < 0:
            return self.inverse().power(-k)
        return GateNetwork(self.n, self.gates * k, self.phase * k)

    def embed(self, m: int, offset: int = 0) -> GateNetwork:
        """Act on qubits ``offset+1 .. offset+n`` of an ``m``-qubit register."""
        out = []
        for g in self.gates:
            axis = g.axis.embed(m, offset)
            if isinstance(g, PauliRotation):
                out.append(PauliRotation(axis, g.angle))
            else:
                out.append(ControlledPauliRotation(g.control + offset, g.value, axis, g.angle))
        return GateNetwork(m, tuple(out), self.phase)

    @classmethod
    def identity(cls, n: int) -> GateNetwork:
        return cls(n)


@dataclass(frozen=True)
class PauliSum:
    """Hermitian ``H = Σ c_j σ_{b_j}``; duplicate strings are merged in first-seen order."""

    n: int
    terms: tuple[tuple[float, PauliString], ...] = ()

    def __post_init__(self):
        merged: dict[PauliString, float] = {}
        for c, p in self.terms:
            c = float(c)
            if not math.isfinite(c):
                raise ValueError(f"non-finite coefficient {c} on {p.label}")
            if p.n != self.n:
                raise ValueError(f"term {p.label} has {p.n} qubits, expected {self.n}")
            merged[p] = merged.get(p, 0.0) + c
        object.__setattr__(self, "terms", tuple((c, p) for p, c in merged.items()))

    @classmethod
    def from_labels(cls, pairs: Iterable[tuple[float, str]]) -> PauliSum:
        terms = [(c, PauliString.from_label(s)) for c, s in pairs]
        if not terms:
            raise ValueError("empty Hamiltonian; use PauliSum(n) for H = 0")
        return cls(terms[0][1].n, tuple(terms))

    def matrix(self) -> np.ndarray:
        check_dense(self.n)
        d = 1 << self.n
        out = np.zeros((d, d), dtype=complex)
        for c, p in self.terms:
            src, ph = pauli_action(p)
            out[np.arange(d), src] += c * ph
        return out

    def norm_bound(self) -> float:
        """``Σ|c_j|``, an upper bound on the spectral radius."""
        return sum(abs(c) for c, _ in self.terms)

    def is_two_local(self) -> bool:
        return all(p.weight <= 2 for _, p in self.terms)

    def lint(self) -> None:
        if not self.is_two_local():
            warnings.warn("Hamiltonian has terms acting on more than two qubits", stacklevel=2)

    def exact_unitary(self, t: float) -> np.ndarray:
        return scipy.linalg.expm(-1j * t * self.matrix())


# -- dense evaluation --------------------------------------------------


def _control_rows(n: int, control: int, value: int) -> np.ndarray:
    rows = np.arange(1 << n)
    return ((rows >> (n - control)) & 1) == value


def apply_gate(g: Gate, m: np.ndarray) -> np.ndarray:
    """``G @ m`` using ``exp(-itσ) = cos t - i sin t σ`` and the Pauli row action."""
    c, s = math.cos(g.angle), math.sin(g.angle)
    rotated = c * m - 1j * s * apply_pauli(g.axis, m)
    if isinstance(g, PauliRotation):
        return rotated
    keep = ~_control_rows(g.n, g.control, g.value)
    rotated[keep] = m[keep]
    return rotated


def apply_network(net: GateNetwork, m: np.ndarray) -> np.ndarray:
    out = np.asarray(m, dtype=complex)
    for g in net.gates:
        out = apply_gate(g, out)
    if net.phase:
        out = out * np.exp(1j * net.phase)
    return out


def gate_unitary(g: Gate, n: int | None = None) -> np.ndarray:
    n = g.n if n is None else n
    if n != g.n:
        raise ValueError(f"gate acts on {g.n} qubits, asked for {n}")
    check_dense(n)
    return apply_gate(g, np.eye(1 << n, dtype=complex))


def network_unitary(net: GateNetwork) -> np.ndarray:
    check_dense(net.n)
    return apply_network(net, np.eye(1 << net.n, dtype=complex))


# -- small building blocks ---------------------------------------------


def pauli_gate(p: PauliString) -> GateNetwork:
    """The Pauli ``σ_p`` itself: ``σ = i·exp(-iπ/2 σ)``."""
    return GateNetwork(p.n, (PauliRotation(p, math.pi / 2),), math.pi / 2)


def swap_network(n: int, a: int, b: int) -> GateNetwork:
    """``SWAP = e^{iπ/4} exp(-iπ/4 (XX + YY + ZZ))``; the three terms commute."""
    gates = tuple(
        PauliRotation(PauliString.from_letters(n, {a: ch, b: ch}), math.pi / 4) for ch in "XYZ"
    )
    return GateNetwork(n, gates, math.pi / 4)


# -- compilers ---------------------------------------------------------


def _branch_sign(value: int) -> int:
    # Π_value = (I + sign·Z)/2
    return 1 if value == 0 else -1


def conditional_u(net: GateNetwork, value: int = 0) -> GateNetwork:
    """Controlled version of ``net`` on ``n+1`` qubits, control = qubit 1.

    Each rotation becomes one controlled rotation on shifted targets.  A
    controlled rotation ``exp(-itPΠ_c)`` splits into the commuting pair
    ``exp(-i t/2 P) exp(-i t/2 s_c Z_c P)``, each then controlled on qubit 1,
    so the output has at most twice the input gate count plus one gate for
    the global phase, which becomes a relative phase on the control.
    """
    if value not in (0, 1):
        raise ValueError(f"control value must be 0 or 1, got {value}")
    m = net.n + 1
    gates: list[Gate] = []
    for g in net.gates:
        axis = g.axis.embed(m, 1)
        if isinstance(g, PauliRotation):
            gates.append(ControlledPauliRotation(1, value, axis, g.angle))
        else:
            zc = PauliString.single(m, g.control + 1, "Z")
            both = pauli_mul(zc, axis).string
            gates.append(ControlledPauliRotation(1, value, axis, g.angle / 2))
            gates.append(
                ControlledPauliRotation(1, value, both, _branch_sign(g.value) * g.angle / 2)
            )
    phase = 0.0
    if net.phase:
        # e^{iφ Π_v} = e^{iφ/2} exp(+i s φ/2 Z_1)
        gates.append(
            PauliRotation(PauliString.single(m, 1, "Z"), -_branch_sign(value) * net.phase / 2)
        )
        phase = net.phase / 2
    return GateNetwork(m, tuple(gates), phase)


def trotterize(h: PauliSum, t: float, steps: int) -> GateNetwork:
    """First-order product formula ``(Π_j exp(-i c_j σ_j δ))^steps`` with ``δ = t/steps``.

    Terms are applied in input order.  Identity terms go into the global phase.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    delta = t / steps
    step: list[Gate] = []
    phase = 0.0
    for c, p in h.terms:
        if p.is_identity:
            phase -= c * delta
        elif c != 0.0:
            step.append(PauliRotation(p, c * delta))
    return GateNetwork(h.n, tuple(step) * steps, phase * steps)


def conditional_half_evolutions(h: PauliSum, t: float, steps: int) -> GateNetwork:
    """``|0><0| ⊗ U(t/2) + |1><1| ⊗ U†(t/2)`` on ``n+1`` qubits, Trotterized.

    Each Trotter factor ``exp(∓i c δ σ)`` on the two branches is exactly the
    single rotation ``exp(-i c δ Z_1⊗σ)``, so both branches share one step
    sequence with opposite angles.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    m = h.n + 1
    z1 = PauliString.single(m, 1, "Z")
    delta = (t / 2) / steps
    step: list[Gate] = []
    for c, p in h.terms:
        if c == 0.0:
            continue
        axis = z1 if p.is_identity else pauli_mul(z1, p.embed(m, 1)).string
        step.append(PauliRotation(axis, c * delta))
    return GateNetwork(m, tuple(step) * steps)


def build_tn(n: int) -> GateNetwork:
    """Flip qubit 1 iff qubits 2..n+1 are all zero (qubit 1 plays the ancilla bit 0).

    ``T = exp(-iπ/2 (X_0 - I) Π)`` with ``Π = 2^{-n} Σ_S Z_S`` the all-zero
    projector; every ``X_0 Z_S`` and ``Z_S`` commutes, so ``T`` is an exact
    product of ``2^{n+1} - 1`` rotations and a global phase.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    m = n + 1
    theta = math.pi / 2 ** (n + 1)
    gates: list[Gate] = []
    for subset in range(1 << n):
        zs = {k + 2: "Z" for k in range(n) if (subset >> k) & 1}
        gates.append(PauliRotation(PauliString.from_letters(m, {1: "X", **zs}), theta))
        if zs:
            gates.append(PauliRotation(PauliString.from_letters(m, zs), -theta))
    return GateNetwork(m, tuple(gates), theta)


# -- text formats ------------------------------------------------------


class CircuitParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _tokens(line: str) -> list[tuple[int, str]]:
    out, col = [], 0
    for tok in line.split():
        col = line.index(tok, col)
        out.append((col + 1, tok))
        col += len(tok)
    return out


def _parse_float(tok: str, lineno: int, col: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise CircuitParseError(f"expected a number, got {tok!r}", lineno, col) from None
    if not math.isfinite(v):
        raise CircuitParseError(f"non-finite number {tok!r}", lineno, col)
    return v


def _parse_pauli(tok: str, lineno: int, col: int, n: int | None) -> PauliString:
    try:
        p = PauliString.from_label(tok)
    except ValueError as e:
        raise CircuitParseError(str(e), lineno, col) from None
    if n is not None and p.n != n:
        raise CircuitParseError(f"Pauli string has {p.n} qubits, expected {n}", lineno, col)
    return p


def parse_circuit(text: str) -> GateNetwork:
    """Parse ``rot``/``crot``/``phase`` lines; ``#`` starts a comment."""
    gates: list[Gate] = []
    phase = 0.0
    n: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        col, kw = toks[0]
        if kw == "rot":
            if len(toks) != 3:
                raise CircuitParseError("rot expects <pauli-string> <angle>", lineno, col)
            axis = _parse_pauli(toks[1][1], lineno, toks[1][0], n)
            angle = _parse_float(toks[2][1], lineno, toks[2][0])
            try:
                gates.append(PauliRotation(axis, angle))
            except ValueError as e:
                raise CircuitParseError(str(e), lineno, toks[1][0]) from None
        elif kw == "crot":
            if len(toks) != 5:
                raise CircuitParseError(
                    "crot expects <control-qubit> <0|1> <pauli-string> <angle>", lineno, col
                )
            try:
                control = int(toks[1][1])
            except ValueError:
                raise CircuitParseError(f"bad control qubit {toks[1][1]!r}", lineno, toks[1][0]) from None
            if toks[2][1] not in ("0", "1"):
                raise CircuitParseError("control value must be 0 or 1", lineno, toks[2][0])
            axis = _parse_pauli(toks[3][1], lineno, toks[3][0], n)
            angle = _parse_float(toks[4][1], lineno, toks[4][0])
            try:
                gates.append(ControlledPauliRotation(control, int(toks[2][1]), axis, angle))
            except ValueError as e:
                raise CircuitParseError(str(e), lineno, toks[1][0]) from None
        elif kw == "phase":
            if len(toks) != 2:
                raise CircuitParseError("phase expects <angle>", lineno, col)
            phase += _parse_float(toks[1][1], lineno, toks[1][0])
            continue
        elif kw == "qubits":
            if len(toks) != 2 or not toks[1][1].isdigit():
                raise CircuitParseError("qubits expects a positive integer", lineno, col)
            if n is not None and n != int(toks[1][1]):
                raise CircuitParseError("conflicting qubit count", lineno, col)
            n = int(toks[1][1])
            continue
        else:
            raise CircuitParseError(f"unknown gate keyword {kw!r}", lineno, col)
        n = gates[-1].n
    if n is None:
        raise CircuitParseError("circuit declares no gates and no 'qubits' line", 1, 1)
    return GateNetwork(n, tuple(gates), phase)


def format_circuit(net: GateNetwork) -> str:
    lines = [f"qubits {net.n}"]
    for g in net.gates:
        if isinstance(g, PauliRotation):
            lines.append(f"rot {g.axis.label} {g.angle!r}")
        else:
            lines.append(f"crot {g.control} {g.value} {g.axis.label} {g.angle!r}")
    if net.phase:
        lines.append(f"phase {net.phase!r}")
    return "\n".join(lines) + "\n"


def parse_hamiltonian(text: str) -> PauliSum:
    """One ``<coefficient> <pauli-string>`` per line."""
    terms: list[tuple[float, PauliString]] = []
    n: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = _tokens(raw.split("#", 1)[0])
        if not toks:
            continue
        if len(toks) != 2:
            raise CircuitParseError("expected <coefficient> <pauli-string>", lineno, toks[0][0])
        c = _parse_float(toks[0][1], lineno, toks[0][0])
        p = _parse_pauli(toks[1][1], lineno, toks[1][0], n)
        n = p.n
        terms.append((c, p))
    if n is None:
        raise CircuitParseError("Hamiltonian file has no terms", 1, 1)
    return PauliSum(n, tuple(terms))


def format_hamiltonian(h: PauliSum) -> str:
    return "".join(f"{c!r} {p.label}\n" for c, p in h.terms)


def random_network(
    rng: np.random.Generator, n: int, ngates: int, max_weight: int = 2
) -> GateNetwork:
    """Random rotations about Pauli axes of weight ``1..max_weight``."""
    gates = []
    for _ in range(ngates):
        w = int(rng.integers(1, min(max_weight, n) + 1))
        qubits = rng.choice(np.arange(1, n + 1), size=w, replace=False)
        letters = {int(q): "XYZ"[int(rng.integers(3))] for q in qubits}
        gates.append(
            PauliRotation(PauliString.from_letters(n, letters), float(rng.uniform(0, 2 * math.pi)))
        )
    return GateNetwork(n, tuple(gates))


def random_pauli_sum(
    rng: np.random.Generator, n: int, nterms: int, max_weight: int = 2, scale: float = 1.0
) -> PauliSum:
    """Random ``max_weight``-local Hamiltonian with coefficients in ``[-scale, scale]``."""
    terms = []
    for _ in range(nterms):
        w = int(rng.integers(1, min(max_weight, n) + 1))
        qubits = rng.choice(np.arange(1, n + 1), size=w, replace=False)
        letters = {int(q): "XYZ"[int(rng.integers(3))] for q in qubits}
        terms.append((float(rng.uniform(-scale, scale)), PauliString.from_letters(n, letters)))
    return PauliSum(n, tuple(terms))
