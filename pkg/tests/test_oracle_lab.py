import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st
from scipy.stats import unitary_group

from dqc1.measurement import EstimationBudget, NoisyMeter
from dqc1.oracle_lab import (
    DeterministicOracle,
    InterleavedAlgorithm,
    NotDeterministicError,
    SweepConfig,
    evaluate_v,
    make_flipped_oracle,
    pseudo_pure_algorithm,
    random_algorithm,
    random_oracle,
    separation_sweep,
    separation_trial,
    simulate_v,
    sweep_csv,
    telescoping_terms,
    trace_bound_ratio,
)


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
@hsettings(max_examples=25, deadline=None)
def test_random_oracle_is_deterministic(n, seed):
    orc = random_oracle(np.random.default_rng(seed), n)
    u = orc.unitary
    np.testing.assert_allclose(u @ u.conj().T, np.eye(1 << n), atol=1e-10)
    out = u[:, 0].reshape(2, -1)
    bit = orc.first_bit
    assert orc.answer == 1 - 2 * bit
    np.testing.assert_allclose(out[bit], orc.residual, atol=1e-10)
    np.testing.assert_allclose(out[1 - bit], 0, atol=1e-10)


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
@hsettings(max_examples=25, deadline=None)
def test_flip_negates_answer_keeps_residual(n, seed):
    orc = random_oracle(np.random.default_rng(seed), n)
    p = orc.projector()
    np.testing.assert_allclose(p @ p, p, atol=1e-12)
    assert np.trace(p).real == pytest.approx(1.0)
    flipped = make_flipped_oracle(orc)
    assert flipped.answer == -orc.answer
    assert abs(np.vdot(flipped.residual, orc.residual)) == pytest.approx(1.0)


def test_non_deterministic_rejected():
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    with pytest.raises(NotDeterministicError):
        DeterministicOracle.from_unitary(h)


def test_trace_bound_on_random_pairs(rng):
    for _ in range(50):
        n = int(rng.integers(1, 4))
        m = n + int(rng.integers(0, 3))
        p = np.kron(random_oracle(rng, n).projector(), np.eye(1 << (m - n)))
        w1, w2 = (unitary_group.rvs(1 << m, random_state=rng) for _ in range(2))
        assert trace_bound_ratio(p, w1, w2, n) <= 1 + 1e-12


@pytest.mark.parametrize("n, m, r", [(2, 2, 1), (2, 3, 2), (3, 4, 2), (3, 5, 3)])
def test_telescoping_identity(rng, n, m, r):
    orc = random_oracle(rng, n)
    alg = random_algorithm(rng, n, m, r)
    terms = telescoping_terms(alg, orc)
    assert len(terms) == 2 * r
    assert all(abs(a) <= 2 ** (m - n + 1) + 1e-9 for a in terms)
    delta = evaluate_v(alg, make_flipped_oracle(orc)) - evaluate_v(alg, orc)
    assert sum(terms).real / 2**m == pytest.approx(delta, abs=1e-10)
    assert abs(sum(terms).imag) < 1e-10


def test_zero_queries_cannot_distinguish(rng):
    res = separation_trial(rng, 3, 4, 0, random_algorithm)
    assert res.vU == pytest.approx(res.vUprime, abs=1e-12) and res.bound == 0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_pseudo_pure_algorithm_saturates(rng, n):
    orc = random_oracle(rng, n)
    alg = pseudo_pure_algorithm(rng, n, n + 1, 1)
    vu = evaluate_v(alg, orc)
    vp = evaluate_v(alg, make_flipped_oracle(orc))
    assert abs(vp - vu) == pytest.approx(4 / 2**n, abs=1e-10)
    with pytest.raises(ValueError):
        pseudo_pure_algorithm(rng, n, n, 1)


def test_monte_carlo_agrees_with_exact(rng):
    orc = random_oracle(rng, 2)
    alg = random_algorithm(rng, 2, 3, 2)
    est = simulate_v(alg, orc, NoisyMeter(seed=5), EstimationBudget(0.02, 0.01))
    assert est.value == pytest.approx(evaluate_v(alg, orc), abs=0.02)


def test_algorithm_validation(rng):
    with pytest.raises(ValueError):
        InterleavedAlgorithm(2, (), 2)
    with pytest.raises(ValueError):
        InterleavedAlgorithm(2, random_algorithm(rng, 2, 2, 0).networks, 3)


def test_sweep_is_reproducible_and_clean():
    cfg = SweepConfig(ns=(2, 3), rs=(0, 1, 2), extra_qubits=(0, 1), trials=10, seed=4)
    a, b = sweep_csv(separation_sweep(cfg)), sweep_csv(separation_sweep(cfg))
    assert a == b
    lines = a.splitlines()
    assert lines[0] == "n,r,m,bound,observed_max,violations"
    assert len(lines) == 1 + 2 * 3 * 2
    assert all(line.endswith(",0") for line in lines[1:])


def test_pseudo_pure_sweep_hits_bound():
    cells = separation_sweep(SweepConfig(ns=(2, 3), rs=(1,), extra_qubits=(1,), trials=3, sampler="pseudo-pure"))
    for c in cells:
        assert c.violations == 0
        assert c.observed_max == pytest.approx(c.bound, abs=1e-9)


def test_unknown_sampler():
    with pytest.raises(ValueError):
        separation_sweep(SweepConfig(sampler="greedy"))
