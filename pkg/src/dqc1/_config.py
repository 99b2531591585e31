"""Process-wide knobs. ``DQC1_DENSE_LIMIT`` overrides the default at import."""

import os
from dataclasses import dataclass


class DenseLimitError(ValueError):
    """A dense 2^n object was requested above the configured qubit limit."""


class InvariantError(RuntimeError):
    """A numerical invariant (unitarity, Hermiticity, trace) was violated."""


@dataclass
class Settings:
    dense_limit: int = int(os.environ.get("DQC1_DENSE_LIMIT", "12"))
    # re-symmetrize density matrices after this many gate applications
    resymmetrize_every: int = 100


settings = Settings()


def check_dense(n: int) -> None:
    if n > settings.dense_limit:
        raise DenseLimitError(f"{n} qubits exceeds dense limit {settings.dense_limit}")
