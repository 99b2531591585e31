"""Pauli strings packed two bits per qubit.

Qubit ``k`` (1-based) occupies bits ``2k-2`` (low) and ``2k-1`` (high) of an
arbitrary-length Python integer.  The two-bit value on a qubit is
``I=0b00, X=0b01, Y=0b10, Z=0b11``, so the symplectic pair is recovered
with word operations: ``z = high`` and ``x = high ^ low``.

Dense matrices use the Kronecker convention with qubit 1 as the leftmost
factor, i.e. qubit 1 is the most significant bit of a basis index.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from ._config import check_dense

LETTERS = "IXYZ"
_LETTER_CODE = {c: i for i, c in enumerate(LETTERS)}
_PHASES = (1 + 0j, 1j, -1 + 0j, -1j)


def _even_mask(n: int) -> int:
    # 0b0101...01 covering 2n bits
    return int("01" * n, 2) if n else 0


class PauliSizeError(ValueError):
    pass


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis on ``n`` qubits (no phase)."""

    n: int
    code: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"qubit count must be non-negative, got {self.n}")
        if self.code < 0 or self.code >> (2 * self.n):
            raise ValueError(f"code {self.code:#x} does not fit in {2 * self.n} bits")

    # -- construction -------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(n, 0)

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Parse ``"XZI"`` (qubit 1 first)."""
        code = 0
        for k, ch in enumerate(label):
            try:
                v = _LETTER_CODE[ch]
            except KeyError:
                raise ValueError(
                    f"invalid Pauli letter {ch!r} at position {k + 1} in {label!r}"
                ) from None
            code |= v << (2 * k)
        return cls(len(label), code)

    @classmethod
    def from_xz(cls, n: int, x: int, z: int) -> PauliString:
        """Build from interleaved masks (bit ``2k-2`` marks qubit ``k``)."""
        lo = x ^ z
        return cls(n, (z << 1) | lo)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> PauliString:
        if not 1 <= qubit <= n:
            raise ValueError(f"qubit {qubit} outside 1..{n}")
        return cls(n, _LETTER_CODE[letter] << (2 * (qubit - 1)))

    @classmethod
    def from_letters(cls, n: int, letters: dict[int, str]) -> PauliString:
        """Build from ``{qubit: letter}``, identity elsewhere."""
        code = 0
        for q, ch in letters.items():
            if not 1 <= q <= n:
                raise ValueError(f"qubit {q} outside 1..{n}")
            code |= _LETTER_CODE[ch] << (2 * (q - 1))
        return cls(n, code)

    # -- views --------------------------------------------------------

    @cached_property
    def xmask(self) -> int:
        m = _even_mask(self.n)
        return (self.code & m) ^ ((self.code >> 1) & m)

    @cached_property
    def zmask(self) -> int:
        return (self.code >> 1) & _even_mask(self.n)

    @property
    def label(self) -> str:
        return "".join(self.letter(k) for k in range(1, self.n + 1))

    def letter(self, qubit: int) -> str:
        return LETTERS[(self.code >> (2 * (qubit - 1))) & 3]

    @property
    def is_identity(self) -> bool:
        return self.code == 0

    @property
    def weight(self) -> int:
        return ((self.code | (self.code >> 1)) & _even_mask(self.n)).bit_count()

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(k for k in range(1, self.n + 1) if (self.code >> (2 * (k - 1))) & 3)

    def embed(self, m: int, offset: int = 0) -> PauliString:
        """Place this string on qubits ``offset+1 .. offset+n`` of an ``m``-qubit register."""
        if offset < 0 or offset + self.n > m:
            raise PauliSizeError(f"cannot embed {self.n} qubits at offset {offset} into {m}")
        return PauliString(m, self.code << (2 * offset))

    def restrict(self, start: int, stop: int) -> PauliString:
        """Qubits ``start..stop`` (inclusive, 1-based) as a new string."""
        width = stop - start + 1
        return PauliString(width, (self.code >> (2 * (start - 1))) & ((1 << (2 * width)) - 1))

    def __mul__(self, other: PauliString) -> PhasedPauli:
        return pauli_mul(self, other)

    def __str__(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"PauliString({self.label!r})"


@dataclass(frozen=True)
class PhasedPauli:
    """``i**power`` times a Pauli string."""

    power: int
    string: PauliString

    def __post_init__(self):
        object.__setattr__(self, "power", self.power % 4)

    @property
    def phase(self) -> complex:
        return _PHASES[self.power]

    @property
    def is_hermitian(self) -> bool:
        return self.power % 2 == 0

    @property
    def sign(self) -> int:
        if not self.is_hermitian:
            raise ValueError("phase is imaginary; no real sign")
        return 1 if self.power == 0 else -1

    def times_i(self, k: int = 1) -> PhasedPauli:
        return PhasedPauli(self.power + k, self.string)

    def __neg__(self) -> PhasedPauli:
        return PhasedPauli(self.power + 2, self.string)

    def __repr__(self) -> str:
        return f"{('+', '+i', '-', '-i')[self.power]}{self.string.label}"


def _check_sizes(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise PauliSizeError(f"size mismatch: {a.n} vs {b.n} qubits")


def pauli_mul(a: PauliString, b: PauliString) -> PhasedPauli:
    """Product ``a·b`` with its exact phase.

    With ``P(x, z) = i^{x·z} X^x Z^z`` per qubit, moving ``Z^{z1}`` past
    ``X^{x2}`` costs ``(-1)^{z1·x2}``, which gives the phase exponent
    ``|x1&z1| + |x2&z2| - |x3&z3| + 2|z1&x2|`` (mod 4).
    """
    _check_sizes(a, b)
    x1, z1, x2, z2 = a.xmask, a.zmask, b.xmask, b.zmask
    x3, z3 = x1 ^ x2, z1 ^ z2
    power = (
        (x1 & z1).bit_count()
        + (x2 & z2).bit_count()
        - (x3 & z3).bit_count()
        + 2 * (z1 & x2).bit_count()
    )
    return PhasedPauli(power, PauliString.from_xz(a.n, x3, z3))


def commutes(a: PauliString, b: PauliString) -> bool:
    _check_sizes(a, b)
    return ((a.xmask & b.zmask).bit_count() + (a.zmask & b.xmask).bit_count()) % 2 == 0


def _index_mask(p: PauliString, interleaved: int) -> int:
    # interleaved (bit 2k-2 = qubit k) -> basis-index mask (bit n-k = qubit k)
    out = 0
    for k in range(1, p.n + 1):
        if (interleaved >> (2 * (k - 1))) & 1:
            out |= 1 << (p.n - k)
    return out


@lru_cache(maxsize=4096)
def pauli_action(p: PauliString) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(src, phase)`` with ``(σ M)[r] = phase[r] * M[src[r]]``.

    ``σ|c> = i^{|x&z|} (-1)^{|c&z|} |c^x>``, so row ``r`` of ``σM`` reads
    row ``r^x`` of ``M``.
    """
    xb, zb = _index_mask(p, p.xmask), _index_mask(p, p.zmask)
    rows = np.arange(1 << p.n, dtype=np.int64)
    src = rows ^ xb
    parity = np.bitwise_count(src & zb) & 1
    phase = _PHASES[(p.xmask & p.zmask).bit_count() % 4] * (1 - 2 * parity.astype(float))
    src.setflags(write=False)
    phase.setflags(write=False)
    return src, phase


def apply_pauli(p: PauliString, m: np.ndarray) -> np.ndarray:
    """``σ_p @ m`` without forming σ_p (works on vectors and matrices)."""
    src, phase = pauli_action(p)
    if m.ndim == 1:
        return phase * m[src]
    return phase[:, None] * m[src]


def pauli_matrix(p: PauliString) -> np.ndarray:
    check_dense(p.n)
    src, phase = pauli_action(p)
    d = 1 << p.n
    out = np.zeros((d, d), dtype=complex)
    # column c maps to row c^x, so row r has its entry in column src[r]
    out[np.arange(d), src] = phase
    return out


def all_pauli_strings(n: int):
    """Every string on ``n`` qubits, ordered by code."""
    for code in range(4**n):
        yield PauliString(n, code)
