"""Command-line front end.

Every subcommand reads its inputs from files and flags, draws all randomness
from ``--seed`` through named substreams, and writes JSON (or CSV for
spectra and sweep tables).  Flags can be preset through environment
variables ``DQC1_<FLAG>`` (e.g. ``DQC1_SHOTS``, ``DQC1_NOISE_VARIANCE``);
command-line values win.

Exit codes: 0 success, 2 input error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ._config import InvariantError, settings
from .circuit import CircuitParseError, PauliSum, parse_circuit, parse_hamiltonian, trotterize
from .measurement import EstimationBudget, NoisyMeter, estimate, substream
from .oracle_lab import SAMPLERS, SweepConfig, separation_sweep, sweep_csv
from .pauli import PauliString
from .protocols import (
    dqc1_pauli_pair,
    dqcp_matrix_element,
    estimate_pauli_coefficient,
    pseudo_pure_answer,
    readout_network,
)
from .spectroscopy import (
    WINDOWS,
    apply_eigenphases,
    check_nyquist,
    sample_f_grid,
    sample_f_unitary_grid,
    spectrum_fft,
)
from .state import dump_csv, eigen_spectrum, evolve, expectation, init_dqc1, init_dqcp, maximally_mixed

FORMAT_VERSION = 1
ENV_PREFIX = "DQC1_"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INVARIANT = 3


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    """Everything that determines a run; echoed into every JSON output."""

    command: str
    seed: int
    meter: str
    noise_variance: float
    epsilon: float
    fail_prob: float
    shots: int | None
    dense_limit: int
    options: dict = field(default_factory=dict)

    def make_meter(self, name: str | None = None) -> NoisyMeter:
        return NoisyMeter(self.meter, self.noise_variance, self.seed, substream(name or self.command))

    def make_budget(self) -> EstimationBudget:
        return EstimationBudget(self.epsilon, self.fail_prob, self.shots)


# -- helpers -----------------------------------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def _load_circuit(path: str):
    try:
        return parse_circuit(_read(path))
    except CircuitParseError as e:
        raise InputError(f"{path}: {e}") from None


def _load_hamiltonian(path: str) -> PauliSum:
    try:
        return parse_hamiltonian(_read(path))
    except CircuitParseError as e:
        raise InputError(f"{path}: {e}") from None


def _pauli(label: str, n: int, what: str) -> PauliString:
    try:
        p = PauliString.from_label(label)
    except ValueError as e:
        raise InputError(f"{what}: {e}") from None
    if p.n != n:
        raise InputError(f"{what}: {label!r} has {p.n} qubits, circuit has {n}")
    return p


def _parse_range(text: str) -> list[int]:
    """``"2..6"`` or ``"2,4,5"`` or ``"3"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            out = list(range(int(lo), int(hi) + 1))
        else:
            out = [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer range {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return out


def _num(x: float | None):
    return None if x is None else float(x)


def _cnum(z: complex | None) -> dict | None:
    return None if z is None else {"re": float(z.real), "im": float(z.imag)}


def _json(cfg: RunConfig, result: dict) -> str:
    doc = {"format_version": FORMAT_VERSION, "seed": cfg.seed, "config": asdict(cfg), **result}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# -- subcommands -------------------------------------------------------


def cmd_trace_pair(cfg: RunConfig, args) -> str:
    u = _load_circuit(args.circuit)
    a, b = _pauli(args.a, u.n, "--a"), _pauli(args.b, u.n, "--b")
    if a.is_identity or b.is_identity:
        raise InputError("trace-pair needs non-identity Pauli strings")
    est = dqc1_pauli_pair(u, a, b, cfg.make_meter(), cfg.make_budget())
    return _json(cfg, {
        "quantity": "tr(σ_a U σ_b U†)/2^n",
        "estimate_re": est.value,
        "estimate_im": 0.0,
        "stderr": est.stderr,
        "shots": est.shots,
        "dense_oracle": _cnum(None if est.dense_oracle is None else complex(est.dense_oracle)),
    })


def cmd_pauli_coeff(cfg: RunConfig, args) -> str:
    u = _load_circuit(args.circuit)
    b = _pauli(args.b, u.n, "--b")
    est = estimate_pauli_coefficient(u, b, cfg.make_meter(), cfg.make_budget())
    return _json(cfg, {
        "quantity": "tr(σ_b U)/2^n",
        "estimate_re": est.value.real,
        "estimate_im": est.value.imag,
        "stderr": est.stderr,
        "shots": est.shots,
        "dense_oracle": _cnum(est.dense_oracle),
    })


def cmd_matrix_element(cfg: RunConfig, args) -> str:
    u = _load_circuit(args.circuit)
    est = dqcp_matrix_element(u, args.a, args.b, cfg.make_meter(), cfg.make_budget())
    return _json(cfg, {
        "quantity": "<a|U|b>",
        "estimate_re": est.value.real,
        "estimate_im": est.value.imag,
        "stderr": est.stderr,
        "stderr_re": est.stderr_re,
        "stderr_im": est.stderr_im,
        "shots": est.shots,
        "dense_oracle": _cnum(est.dense_oracle),
    })


def cmd_pseudo_pure(cfg: RunConfig, args) -> str:
    u = _load_circuit(args.circuit)
    rep = pseudo_pure_answer(u, cfg.make_meter(), cfg.make_budget())
    return _json(cfg, {
        "quantity": "<0|U† σ_z^(1) U|0> via pseudo-pure input",
        "estimate_re": rep.alpha,
        "estimate_im": 0.0,
        "stderr": rep.alpha_stderr,
        "shots": rep.shots,
        "signal": rep.signal,
        "signal_stderr": rep.signal_stderr,
        "intensity": rep.intensity,
        "shots_for_sign": rep.shots_for_sign,
        "dense_oracle": _cnum(None if rep.alpha_dense is None else complex(rep.alpha_dense)),
        "signal_dense": _num(rep.signal_dense),
    })


def _spectrum_outputs(cfg: RunConfig, args, spectrum, oracle_eigs) -> str:
    exact = cfg.meter == "gaussian" and cfg.noise_variance == 0
    buf = io.StringIO()
    buf.write("frequency,intensity,stderr\n")
    for f, d, s in zip(spectrum.frequencies, spectrum.density, spectrum.stderr):
        buf.write(f"{float(f)!r},{float(d)!r},{float(s)!r}\n")
    sidecar = _json(cfg, {
        "exact": exact,
        "resolution": spectrum.resolution,
        "dt": spectrum.dt,
        "window": spectrum.window,
        "peaks": [{"frequency": p.frequency, "height": p.height, "intensity": p.intensity} for p in spectrum.peaks],
        "oracle_eigenvalues": None if oracle_eigs is None else [float(x) for x in oracle_eigs],
    })
    if args.out is not None:
        side = args.sidecar or str(Path(args.out).with_suffix(".json"))
        Path(side).write_text(sidecar)
    elif args.sidecar:
        Path(args.sidecar).write_text(sidecar)
    return buf.getvalue()


def cmd_spectrum(cfg: RunConfig, args) -> str:
    h = _load_hamiltonian(args.hamiltonian)
    if not (args.dt > 0 and math.isfinite(args.dt)):
        raise InputError(f"--dt must be positive and finite, got {args.dt}")
    if not args.force:
        check_nyquist(h, args.dt)
    samples = sample_f_grid(
        h, args.dt, args.npoints, args.trotter_steps, cfg.make_meter(), cfg.make_budget()
    )
    spectrum = spectrum_fft(samples, window=args.window)
    eigs = eigen_spectrum(h) if h.n <= cfg.dense_limit else None
    return _spectrum_outputs(cfg, args, spectrum, eigs)


def cmd_unitary_spectrum(cfg: RunConfig, args) -> str:
    w = _load_circuit(args.circuit)
    samples = sample_f_unitary_grid(w, args.npoints, cfg.make_meter(), cfg.make_budget())
    spectrum = spectrum_fft(samples, window=args.window)
    eigs = apply_eigenphases(w) if w.n <= cfg.dense_limit else None
    return _spectrum_outputs(cfg, args, spectrum, eigs)


def cmd_separation(cfg: RunConfig, args) -> str:
    sweep = SweepConfig(
        ns=tuple(args.n),
        rs=tuple(args.r),
        extra_qubits=tuple(args.extra),
        trials=args.trials,
        seed=cfg.seed,
        sampler=args.sampler,
        gates=args.gates,
    )
    if min(sweep.ns) < 1 or min(sweep.rs) < 0 or min(sweep.extra_qubits) < 0:
        raise InputError("--n must be >= 1, --r and --extra >= 0")
    return sweep_csv(separation_sweep(sweep))


def cmd_trotter_check(cfg: RunConfig, args) -> str:
    h = _load_hamiltonian(args.hamiltonian)
    if any(s < 1 for s in args.steps):
        raise InputError("--steps values must be >= 1")
    from .circuit import network_unitary

    exact = h.exact_unitary(args.t)
    rows = []
    for s in args.steps:
        err = float(np.linalg.norm(network_unitary(trotterize(h, args.t, s)) - exact, 2))
        rows.append({"steps": s, "error": err})
    slope = None
    good = [r for r in rows if r["error"] > 0]
    if len(good) >= 2:
        x = np.log([1.0 / r["steps"] for r in good])
        y = np.log([r["error"] for r in good])
        slope = float(np.polyfit(x, y, 1)[0])
    return _json(cfg, {
        "t": args.t,
        "exact": True,
        "rows": rows,
        "loglog_slope": slope,
        "two_local": h.is_two_local(),
    })


def cmd_simulate(cfg: RunConfig, args) -> str:
    u = _load_circuit(args.circuit)
    n = u.n
    init = {"dqc1": init_dqc1, "dqcp": init_dqcp, "mixed": maximally_mixed}[args.init]
    final = evolve(init(n), u)
    labels = args.observable or ["Z" + "I" * (n - 1)]
    budget = cfg.make_budget()
    out = []
    for label in labels:
        p = _pauli(label, n, "--observable")
        exact = expectation(final, p)
        if p.is_identity:
            out.append({"observable": label, "estimate": 1.0, "stderr": 0.0, "shots": 0, "dense_oracle": 1.0})
            continue
        post, sign = readout_network(p)
        est = estimate(evolve(final, post), cfg.make_meter(f"simulate/{label}"), budget)
        out.append({
            "observable": label,
            "estimate": sign * est.value,
            "stderr": est.stderr,
            "shots": est.shots,
            "dense_oracle": exact,
        })
    if args.dump_state:
        Path(args.dump_state).write_text(dump_csv(final.density))
    return _json(cfg, {"init": args.init, "expectations": out})


COMMANDS = {
    "trace-pair": cmd_trace_pair,
    "pauli-coeff": cmd_pauli_coeff,
    "matrix-element": cmd_matrix_element,
    "pseudo-pure": cmd_pseudo_pure,
    "spectrum": cmd_spectrum,
    "unitary-spectrum": cmd_unitary_spectrum,
    "separation": cmd_separation,
    "trotter-check": cmd_trotter_check,
    "simulate": cmd_simulate,
}


# -- argument parsing --------------------------------------------------


def _env(name: str, default):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _unit_interval(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {v}")
    return v


def _nonneg_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (v >= 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a finite value >= 0, got {v}")
    return v


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("estimation")
    g.add_argument("--shots", type=_positive_int, default=_env("shots", None),
                   help="fixed repetitions per estimate (voids the ε/p guarantee)")
    g.add_argument("--epsilon", type=_unit_interval, default=_env("epsilon", "0.05"))
    g.add_argument("--fail-prob", type=_unit_interval, default=_env("fail-prob", "0.05"))
    g.add_argument("--meter", choices=("projective", "gaussian"), default=_env("meter", "projective"))
    g.add_argument("--noise-variance", type=_nonneg_float, default=_env("noise-variance", "0"),
                   help="variance s of gaussian readout noise")
    g.add_argument("--seed", type=int, default=_env("seed", "0"))
    g.add_argument("--dense-limit", type=_positive_int, default=_env("dense-limit", str(settings.dense_limit)))
    g.add_argument("--out", default=_env("out", None), help="output file (default: stdout)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    ap = argparse.ArgumentParser(
        prog="dqc1",
        description="One-clean-qubit estimators, spectroscopy and oracle-separation sweeps.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace-pair", parents=[common], help="tr(σ_a U σ_b U†)/2^n")
    p.add_argument("--circuit", required=True)
    p.add_argument("--a", required=True, help="Pauli label, e.g. ZII")
    p.add_argument("--b", required=True)

    p = sub.add_parser("pauli-coeff", parents=[common], help="tr(σ_b U)/2^n")
    p.add_argument("--circuit", required=True)
    p.add_argument("--b", required=True)

    p = sub.add_parser("matrix-element", parents=[common], help="<a|U|b> from a pure register")
    p.add_argument("--circuit", required=True)
    p.add_argument("--a", required=True, help="bit string, qubit 1 first")
    p.add_argument("--b", required=True)

    p = sub.add_parser("pseudo-pure", parents=[common], help="answer bit through a pseudo-pure state")
    p.add_argument("--circuit", required=True)

    for name, source in (("spectrum", "--hamiltonian"), ("unitary-spectrum", "--circuit")):
        p = sub.add_parser(name, parents=[common], help="broadened spectrum as CSV")
        p.add_argument(source, required=True)
        p.add_argument("--npoints", type=_positive_int, default=_env("npoints", "256"))
        p.add_argument("--window", choices=WINDOWS, default=_env("window", "hann"))
        p.add_argument("--sidecar", default=None, help="JSON sidecar path (default: --out with .json)")
        if name == "spectrum":
            p.add_argument("--dt", type=float, required=True)
            p.add_argument("--trotter-steps", type=_positive_int, default=_env("trotter-steps", "1"),
                           help="Trotter steps per Δt")
            p.add_argument("--force", action="store_true", help="skip the Nyquist guard")

    p = sub.add_parser("separation", parents=[common], help="oracle-separation sweep as CSV")
    p.add_argument("--n", type=_parse_range, default="2..6")
    p.add_argument("--r", type=_parse_range, default="0..4")
    p.add_argument("--extra", type=_parse_range, default="0..2", help="ancilla counts m - n")
    p.add_argument("--trials", type=_positive_int, default=_env("trials", "200"))
    p.add_argument("--sampler", choices=sorted(SAMPLERS), default="random")
    p.add_argument("--gates", type=_positive_int, default=10, help="gates per random network")

    p = sub.add_parser("trotter-check", parents=[common], help="Trotter error versus step count")
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--steps", type=_parse_range, default="8,16,32,64,128,256")

    p = sub.add_parser("simulate", parents=[common], help="run a circuit and read Pauli expectations")
    p.add_argument("--circuit", required=True)
    p.add_argument("--init", choices=("dqc1", "dqcp", "mixed"), default="dqc1")
    p.add_argument("--observable", action="append", help="Pauli label; repeatable (default Z on qubit 1)")
    p.add_argument("--dump-state", default=None, help="write the final density matrix as re,im CSV")
    return ap


def config_from_args(args) -> RunConfig:
    skip = {"command", "shots", "epsilon", "fail_prob", "meter", "noise_variance", "seed", "dense_limit", "out"}
    options = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return RunConfig(
        command=args.command,
        seed=args.seed,
        meter=args.meter,
        noise_variance=args.noise_variance,
        epsilon=args.epsilon,
        fail_prob=args.fail_prob,
        shots=args.shots,
        dense_limit=args.dense_limit,
        options=options,
    )


def run(cfg: RunConfig, args) -> str:
    settings.dense_limit = cfg.dense_limit
    return COMMANDS[cfg.command](cfg, args)


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT
    cfg = config_from_args(args)
    old_limit = settings.dense_limit
    try:
        text = run(cfg, args)
        _emit(text, args.out)
    except InvariantError as e:
        print(f"dqc1 {cfg.command}: invariant violated: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, OSError) as e:
        print(f"dqc1 {cfg.command}: {e}", file=sys.stderr)
        return EXIT_INPUT
    finally:
        settings.dense_limit = old_limit
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
