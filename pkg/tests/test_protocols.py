import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from conftest import kron_label
from dqc1.circuit import GateNetwork, PauliRotation, network_unitary, pauli_gate, random_network
from dqc1.measurement import EstimationBudget, NoisyMeter
from dqc1.pauli import PauliString, all_pauli_strings
from dqc1.protocols import (
    dqc1_pauli_pair,
    dqcp_matrix_element,
    estimate_pauli_coefficient,
    pauli_coefficient_dense,
    pseudo_pure_answer,
    pseudo_pure_deviation_target,
    pseudo_pure_intensity,
    pseudo_pure_sign_error_rate,
    pseudo_pure_state,
    readout_network,
    shots_for_sign,
    synthesize_conjugation,
)

EXACT = NoisyMeter("gaussian", 0.0)
BUDGET = EstimationBudget(0.1, 0.1)


def P(label):
    return PauliString.from_label(label)


@pytest.mark.parametrize("n", [1, 2])
def test_conjugation_all_pairs(n):
    nonid = [p for p in all_pauli_strings(n) if not p.is_identity]
    for src, tgt in itertools.product(nonid, repeat=2):
        conj = synthesize_conjugation(src, tgt)
        g = network_unitary(conj.network)
        np.testing.assert_allclose(
            g @ kron_label(src.label) @ g.conj().T, conj.sign * kron_label(tgt.label), atol=1e-10
        )
        assert len(conj.network.gates) <= 4


@given(st.text(alphabet="IXYZ", min_size=5, max_size=5).filter(lambda s: set(s) != {"I"}))
@hsettings(max_examples=30, deadline=None)
def test_readout_network_maps_to_z1(label):
    net, sign = readout_network(P(label))
    g = network_unitary(net)
    np.testing.assert_allclose(g @ kron_label(label) @ g.conj().T, sign * kron_label("ZIIII"), atol=1e-10)


def test_identity_pair_trace():
    u = GateNetwork.identity(2)
    est = dqc1_pauli_pair(u, P("ZI"), P("ZI"), EXACT, BUDGET)
    assert est.value == pytest.approx(1.0) and est.dense_oracle == pytest.approx(1.0)


@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
@hsettings(max_examples=20, deadline=None)
def test_pair_trace_exact_mode_matches_dense(n, seed):
    rng = np.random.default_rng(seed)
    u = random_network(rng, n, 6)
    nonid = [p for p in all_pauli_strings(n) if not p.is_identity]
    a, b = (nonid[int(i)] for i in rng.integers(len(nonid), size=2))
    est = dqc1_pauli_pair(u, a, b, EXACT, BUDGET)
    assert est.value == pytest.approx(est.dense_oracle, abs=1e-10)


def test_coefficient_of_x_rotation():
    # exp(-iπ/2 X) = -iX so α_X = -i
    u = GateNetwork(1, (PauliRotation(P("X"), math.pi / 2),))
    est = estimate_pauli_coefficient(u, P("X"), EXACT, BUDGET)
    assert est.value == pytest.approx(-1j, abs=1e-12)
    assert estimate_pauli_coefficient(u, P("I"), EXACT, BUDGET).value == pytest.approx(0, abs=1e-12)


@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
@hsettings(max_examples=20, deadline=None)
def test_coefficients_exact_mode_and_parseval(n, seed):
    rng = np.random.default_rng(seed)
    u = random_network(rng, n, 8)
    mat = network_unitary(u)
    total = 0.0
    for b in all_pauli_strings(n):
        dense = pauli_coefficient_dense(u, b)
        assert dense == pytest.approx(np.trace(kron_label(b.label) @ mat) / (1 << n), abs=1e-12)
        total += abs(dense) ** 2
    assert total == pytest.approx(1.0, abs=1e-9)
    b = PauliString(n, int(rng.integers(4**n)))
    assert estimate_pauli_coefficient(u, b, EXACT, BUDGET).value == pytest.approx(pauli_coefficient_dense(u, b), abs=1e-10)


def test_matrix_element_flip():
    u = GateNetwork(1, (PauliRotation(P("X"), math.pi / 2),))
    est = dqcp_matrix_element(u, "0", "1", EXACT, BUDGET)
    assert est.value == pytest.approx(-1j, abs=1e-10)


def test_matrix_elements_all_pairs_exact(rng):
    u = random_network(rng, 2, 10)
    mat = network_unitary(u)
    for a, b in itertools.product(["00", "01", "10", "11"], repeat=2):
        est = dqcp_matrix_element(u, a, b, EXACT, BUDGET)
        assert est.value == pytest.approx(mat[int(a, 2), int(b, 2)], abs=1e-10)


def test_matrix_element_noisy_within_stderr(rng):
    u = random_network(rng, 2, 10)
    est = dqcp_matrix_element(u, "01", "11", NoisyMeter(seed=4), EstimationBudget(0.02, 0.05))
    assert abs(est.value - est.dense_oracle) < 6 * est.stderr + 1e-3


def test_matrix_element_bad_labels():
    with pytest.raises(ValueError):
        dqcp_matrix_element(GateNetwork.identity(2), "0", "01", EXACT, BUDGET)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_pseudo_pure_deviation(n):
    dev = pseudo_pure_state(n).deviation(cutoff=0).operator()
    np.testing.assert_allclose(dev, pseudo_pure_deviation_target(n), atol=1e-10)


@pytest.mark.parametrize("flip", [False, True])
def test_pseudo_pure_answer_sign(flip):
    n = 2
    u = pauli_gate(P("XI")) if flip else GateNetwork.identity(n)
    rep = pseudo_pure_answer(u, EXACT, BUDGET)
    expected = -1.0 if flip else 1.0
    assert rep.alpha == pytest.approx(expected, abs=1e-10)
    assert rep.signal == pytest.approx(expected * pseudo_pure_intensity(n), abs=1e-10)
    assert rep.alpha_dense == pytest.approx(expected)


def test_shots_for_sign_grows_as_4_to_the_n():
    ratios = [shots_for_sign(n + 1, 0.01) / shots_for_sign(n, 0.01) for n in range(2, 6)]
    assert all(r == pytest.approx(4, rel=0.01) for r in ratios)


def test_sign_error_rate_drops_with_shots():
    u = pauli_gate(P("XII"))
    few = pseudo_pure_sign_error_rate(u, 16, 200, NoisyMeter(seed=1))
    many = pseudo_pure_sign_error_rate(u, shots_for_sign(3, 0.05), 50, NoisyMeter(seed=2))
    assert many <= 0.1 < few
