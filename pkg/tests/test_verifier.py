import math

import numpy as np
import pytest

from conftest import FIXTURES, random_state, random_unitary
from oracles import fig1_acceptance_direct, fig1_acceptance_operator, qpe_probabilities
from qident.circuit import Circuit, gate, parse_circuit, random_circuit
from qident.errors import SimulationCapError
from qident.sim import circuit_unitary
from qident.spectral import SubspaceSpec, pair_operator
from qident.verifier import (
    Fig1Params,
    Mixture,
    VerifierCase,
    VerifierSpec,
    acceptance_probability,
    accept_table,
    build_equivalence_verifier,
    classify_verifier,
    estimated_distance,
    fig1_acceptance,
    find_extremal_eigenvectors,
    honest_witness,
    max_acceptance,
    pair_witness,
    qft,
    qpe_distribution,
    qpe_kernel,
    random_verifier,
    required_phase_bits,
)

DELTA = 2 * math.sin(math.pi / 8)
P4 = Fig1Params(4, DELTA, 0.2)


def verifier(name, epsilon=None):
    return VerifierSpec.from_circuit(parse_circuit((FIXTURES / name).read_text()), epsilon)


def test_acceptance_trivial_verifiers(rng):
    w = random_state(rng, 2)
    assert acceptance_probability(verifier("accept_all.qc"), w) == pytest.approx(1.0)
    assert acceptance_probability(verifier("reject_all.qc"), w) == pytest.approx(0.0)
    assert acceptance_probability(verifier("coin.qc"), w) == pytest.approx(0.5)


def test_acceptance_dimension_mismatch():
    with pytest.raises(ValueError):
        acceptance_probability(verifier("accept_all.qc"), np.ones(4) / 2)


def test_max_acceptance_examples():
    assert max_acceptance(verifier("accept_all.qc"))[0] == pytest.approx(1.0)
    assert max_acceptance(verifier("reject_all.qc"))[0] == pytest.approx(0.0)
    v = VerifierSpec(Circuit(2, (gate("cx", 0, 1),)), 1, 1, 1)
    p, w = max_acceptance(v)
    assert p == pytest.approx(1.0)
    assert abs(w[1]) == pytest.approx(1.0)


def test_max_acceptance_dominates(rng):
    for _ in range(5):
        v = random_verifier(3, 2, 20, rng)
        p_max, w_max = max_acceptance(v)
        assert acceptance_probability(v, w_max) == pytest.approx(p_max, abs=1e-12)
        for _ in range(20):
            assert acceptance_probability(v, random_state(rng, 8)) <= p_max + 1e-9


def test_mixture_linearity(rng):
    v = random_verifier(2, 2, 15, rng)
    states = tuple(random_state(rng, 4) for _ in range(3))
    weights = (0.2, 0.5, 0.3)
    expected = sum(q * acceptance_probability(v, s) for q, s in zip(weights, states))
    assert acceptance_probability(v, Mixture(weights, states)) == pytest.approx(expected, abs=1e-12)
    with pytest.raises(ValueError):
        Mixture((0.5, 0.6), states[:2])


def test_classify_verifier():
    assert classify_verifier(verifier("accept_all.qc"), 0.1) is VerifierCase.CASE1
    assert classify_verifier(verifier("reject_all.qc"), 0.1) is VerifierCase.CASE2
    assert classify_verifier(verifier("coin.qc"), 0.1) is VerifierCase.PROMISE_VIOLATED


def test_extremal_eigenvectors():
    Z = np.diag([1, -1]).astype(complex)
    a, b, alpha, beta = find_extremal_eigenvectors(Z)
    assert (alpha, beta) == pytest.approx((0, math.pi))
    assert abs(a[0]) == pytest.approx(1) and abs(b[1]) == pytest.approx(1)
    with pytest.raises(ValueError, match="no separating witnesses"):
        find_extremal_eigenvectors(np.eye(2))
    T = np.diag([1, np.exp(1j * math.pi / 4), 1, np.exp(1j * math.pi / 4)])
    a, b, alpha, beta = find_extremal_eigenvectors(T)
    assert (alpha, beta) == pytest.approx((0, math.pi / 4))
    # computational basis vectors (up to phase)
    assert np.max(np.abs(a)) == pytest.approx(1) and np.max(np.abs(b)) == pytest.approx(1)


def test_qpe_dyadic_exact():
    t = 4
    for j in range(16):
        A = np.diag([np.exp(2j * math.pi * j / 16), 1.0])
        dist = qpe_distribution(A, np.array([1, 0]), t)
        assert dist[j] == pytest.approx(1.0, abs=1e-12)


def test_qpe_two_dyadic_components():
    A = np.diag([np.exp(2j * math.pi * 3 / 16), np.exp(2j * math.pi * 11 / 16)])
    dist = qpe_distribution(A, np.array([1, 1]) / math.sqrt(2), 4)
    assert dist[3] == pytest.approx(0.5, abs=1e-12) and dist[11] == pytest.approx(0.5, abs=1e-12)


def test_qpe_matches_direct_simulation(rng):
    for t in (3, 5):
        A = random_unitary(rng, 4)
        psi = random_state(rng, 4)
        assert np.allclose(qpe_distribution(A, psi, t), qpe_probabilities(A, psi, t), atol=1e-12)


def test_qpe_kernel_normalized():
    K = qpe_kernel(np.linspace(0, 6, 13), 5)
    assert np.allclose(K.sum(axis=1), 1.0)


def test_qpe_mass_near_true_phases(rng):
    for t in (3, 4, 6):
        size = 2**t
        for _ in range(5):
            A = random_unitary(rng, 4)
            phases = np.angle(np.linalg.eigvals(A)) % (2 * math.pi)
            dist = qpe_probabilities(A, random_state(rng, 4), t)
            est = 2 * math.pi * np.arange(size) / size
            circ = np.abs(np.angle(np.exp(1j * (est[:, None] - phases[None, :])))).min(axis=1)
            assert dist[circ <= 2 * math.pi / size + 1e-12].sum() >= 8 / math.pi**2


def test_required_phase_bits():
    assert required_phase_bits(DELTA, 0.2) == 6
    assert required_phase_bits(2.0, 0.0) == 4
    assert Fig1Params.sized(DELTA, 0.2).meets_accuracy
    assert not P4.meets_accuracy
    with pytest.raises(ValueError):
        Fig1Params(4, 0.2, 0.3)


def test_estimated_distance_and_table():
    assert estimated_distance(4, 0, 4) == pytest.approx(2 * math.sin(math.pi / 8))
    assert estimated_distance(0, 4, 4) == pytest.approx(2 * math.sin(math.pi / 8))
    assert estimated_distance(8, 0, 4) == pytest.approx(math.sqrt(2))
    assert estimated_distance(15, 0, 4) == pytest.approx(2 * math.sin(math.pi / 32))
    table = accept_table(P4)
    assert not table.diagonal().any()
    assert np.array_equal(table, table.T)
    # 3 bins: 2 sin(3 pi/32) ~ 0.581 passes the 0.559 threshold, 2 bins (~0.390) does not
    assert table[3, 0] and not table[2, 0]


def test_fig1_identity_rejects(rng):
    c = random_circuit(2, 10, rng)
    w = random_state(rng, 16)
    assert fig1_acceptance(c, c, None, w, P4) == pytest.approx(0.0, abs=1e-12)


def test_fig1_s_vs_identity_honest():
    sx, idc = Circuit(2, (gate("s", 0),)), Circuit(2, ())
    w = pair_witness(np.eye(4)[0], np.eye(4)[1])
    assert fig1_acceptance(sx, idc, None, w, P4) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(honest_witness(sx, idc) * np.conj(honest_witness(sx, idc)), np.abs(w) ** 2)


def test_fig1_matches_direct_oracle(rng):
    for _ in range(5):
        a, b = random_circuit(2, 10, rng), random_circuit(2, 10, rng)
        A = pair_operator(a, b)
        for t in (3, 4):
            p = Fig1Params(t, 1.0, 0.3)
            w = random_state(rng, 16)
            expected = fig1_acceptance_direct(A, w, t, p.chord_threshold)
            assert fig1_acceptance(a, b, None, w, p) == pytest.approx(expected, abs=1e-12)


def test_fig1_mixture(rng):
    a, b = random_circuit(2, 10, rng), random_circuit(2, 10, rng)
    states = (random_state(rng, 16), random_state(rng, 16))
    m = Mixture((0.25, 0.75), states)
    expected = 0.25 * fig1_acceptance(a, b, None, states[0], P4) + 0.75 * fig1_acceptance(a, b, None, states[1], P4)
    assert fig1_acceptance(a, b, None, m, P4) == pytest.approx(expected, abs=1e-12)


def test_incoherent_mixture_property(rng):
    U = random_unitary(rng, 4)
    A_diag = np.exp(1j * np.array([0.3, 1.4, 2.9, 4.6]))
    A = U @ np.diag(A_diag) @ U.conj().T
    vecs = U.T  # rows are eigenvectors
    Q = fig1_acceptance_operator(A, 4, P4.chord_threshold)
    for _ in range(5):
        perm_a, perm_b = rng.permutation(4), rng.permutation(4)
        c = random_state(rng, 4)
        products = [pair_witness(vecs[perm_a[j]], vecs[perm_b[j]]) for j in range(4)]
        entangled = sum(c[j] * products[j] for j in range(4))
        lhs = np.vdot(entangled, Q @ entangled).real
        rhs = sum(abs(c[j]) ** 2 * np.vdot(products[j], Q @ products[j]).real for j in range(4))
        assert lhs == pytest.approx(rhs, abs=1e-9)


def test_qft_is_dft():
    for t in (1, 2, 3, 4):
        F = circuit_unitary(qft(t))
        size = 2**t
        ref = np.exp(2j * math.pi * np.outer(np.arange(size), np.arange(size)) / size) / math.sqrt(size)
        assert np.max(np.abs(F - ref)) <= 1e-12


def test_built_verifier_matches_fig1(rng):
    p = Fig1Params(3, 1.0, 0.3)
    for _ in range(3):
        a, b = random_circuit(1, 6, rng), random_circuit(1, 6, rng)
        v = build_equivalence_verifier(a, b, None, p)
        assert v.n_input == 2
        for _ in range(3):
            w = random_state(rng, 4)
            assert acceptance_probability(v, w) == pytest.approx(fig1_acceptance(a, b, None, w, p), abs=1e-9)


def test_built_verifier_serializes(rng):
    from qident.circuit import serialize_circuit

    v = build_equivalence_verifier(Circuit(1, (gate("s", 0),)), Circuit(1, ()), None, Fig1Params(3, 1.0, 0.3))
    text = serialize_circuit(v.to_circuit())
    back = VerifierSpec.from_circuit(parse_circuit(text))
    assert back == v


def test_built_verifier_subspace_rejects_outside_component():
    # subspace: qubit 1 set; A = S on qubit 0 keeps it invariant
    s = SubspaceSpec(Circuit(3, (gate("cx", 1, 2),)), 2, 1)
    sx, idc = Circuit(2, (gate("s", 0),)), Circuit(2, ())
    v = build_equivalence_verifier(sx, idc, s, P4)
    e = np.eye(4)
    inside_b = e[3]
    for theta in (0.0, 0.4, 1.1, math.pi / 2):
        # component along |00> lies outside the subspace
        psi_a = math.cos(theta) * e[2] + math.sin(theta) * e[0]
        w = pair_witness(psi_a, inside_b)
        expected = math.cos(theta) ** 2
        assert fig1_acceptance(sx, idc, s, w, P4) == pytest.approx(expected, abs=1e-9)
        assert acceptance_probability(v, w) == pytest.approx(expected, abs=1e-9)


def test_built_verifier_cxflag_subspace(rng):
    s = SubspaceSpec(parse_circuit((FIXTURES / "cxflag.qc").read_text()), 1, 1)
    z, idc = Circuit(1, (gate("z", 0),)), Circuit(1, ())
    p = Fig1Params(3, 1.0, 0.3)
    v = build_equivalence_verifier(z, idc, s, p)
    for _ in range(3):
        w = random_state(rng, 4)
        assert acceptance_probability(v, w) == pytest.approx(fig1_acceptance(z, idc, s, w, p), abs=1e-9)
    # restriction is a global phase: nothing is accepted
    assert max_acceptance(v)[0] <= 1e-12


def test_build_cap():
    big = Circuit(6, ())
    with pytest.raises(SimulationCapError):
        build_equivalence_verifier(big, big, None, P4)
