"""Hardness reduction: from a verifier U build Z = U^H W U V and check its norm bounds.

The register is extended by one qubit (the highest index).  V adds the phase
phi to that qubit when every ancilla is |0>, W adds phi when the output qubit
reads |1>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, cp, embed, inverse
from .errors import SimulationCapError
from .sim import MAX_UNITARY_QUBITS, circuit_unitary, operator_norm
from .spectral import distance_to_phase_multiple
from .verifier import VerifierCase, VerifierSpec, max_acceptance, random_verifier

AMBIGUOUS_BAND = (1 / 3, 2 / 3)
TOL = 1e-9


def v_gate(v: VerifierSpec, phi: float):
    extra = v.circuit.n_qubits
    ancillas = range(v.n_input, v.n_input + v.m_ancilla)
    return cp(phi, [(a, False) for a in ancillas], [extra])


def w_gate(v: VerifierSpec, phi: float):
    extra = v.circuit.n_qubits
    return cp(phi, [(v.output_qubit, True)], [extra])


def build_Z(v: VerifierSpec, phi: float) -> Circuit:
    N = v.circuit.n_qubits + 1
    if N > MAX_UNITARY_QUBITS:
        raise SimulationCapError(f"Z needs {N} qubits, unitary cap is {MAX_UNITARY_QUBITS}")
    U = embed(v.circuit, N, range(N - 1))
    gates = (v_gate(v, phi),) + U.gates + (w_gate(v, phi),) + inverse(U).gates
    return Circuit(N, gates)


def theorem_bounds(epsilon: float, phi: float) -> tuple[float, float]:
    """``(lower_case1, upper_case2)`` clamped to [0, 2].

    sqrt(2(1 - cos phi)) and 2 sqrt(1 - cos(phi/2)) are evaluated as
    2 sin(phi/2) and 2 sqrt(2) sin(phi/4), which avoid cancellation near 0.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    root = math.sqrt(epsilon)
    lower = 2 * abs(math.sin(phi / 2)) - 2 * root
    upper = 2 * math.sqrt(2) * abs(math.sin(phi / 4)) + 2 * math.sqrt(2) * root
    return max(lower, 0.0), min(upper, 2.0)


@dataclass(frozen=True)
class Separation:
    ok: bool
    gap: float
    lower: float
    upper: float
    approx_lower: float
    approx_upper: float


def separation_ok(epsilon: float, phi: float) -> Separation:
    """Whether the case-1 lower bound strictly exceeds the case-2 upper bound.

    The small-angle forms are the leading-order expansions phi - 2 sqrt(eps)
    and phi/sqrt(2) + 2 sqrt(2 eps), for comparison only.
    """
    lower, upper = theorem_bounds(epsilon, phi)
    root = math.sqrt(epsilon)
    return Separation(
        ok=lower > upper,
        gap=lower - upper,
        lower=lower,
        upper=upper,
        approx_lower=phi - 2 * root,
        approx_upper=phi / math.sqrt(2) + 2 * math.sqrt(2) * root,
    )


def critical_epsilon(phi: float) -> float:
    """Largest epsilon for which the bounds still separate (exclusive)."""
    lower0, upper0 = theorem_bounds(0.0, phi)
    gap0 = lower0 - upper0
    if gap0 <= 0:
        return 0.0
    return (gap0 / (2 + 2 * math.sqrt(2))) ** 2


@dataclass(frozen=True)
class TheoremReport:
    case: VerifierCase
    epsilon: float
    phi: float
    measured: float
    bound: float
    satisfied: bool
    margin: float
    warning: str | None
    p_max: float
    min_distance: float
    epsilon_declared: float | None = None

    def to_dict(self) -> dict:
        return {
            "case": self.case.value,
            "epsilon": self.epsilon,
            "phi": self.phi,
            "measured": self.measured,
            "bound": self.bound,
            "satisfied": self.satisfied,
            "margin": self.margin,
            "warning": self.warning,
            "p_max": self.p_max,
            "min_distance": self.min_distance,
            "epsilon_declared": self.epsilon_declared,
        }


def check_theorem(v: VerifierSpec, phi: float, seed: int = 0) -> TheoremReport:
    """Measure epsilon from the exact maximum acceptance and test the matching bound on Z."""
    if not 0 < phi <= math.pi:
        raise ValueError("phi must lie in (0, pi]")
    p_max, _ = max_acceptance(v)
    warnings = []
    if AMBIGUOUS_BAND[0] < p_max < AMBIGUOUS_BAND[1]:
        warnings.append(f"p_max={p_max:.6g} lies between 1/3 and 2/3; case chosen by the 1/2 cutoff")
    Zm = circuit_unitary(build_Z(v, phi))
    d = distance_to_phase_multiple(Zm).distance
    if p_max >= 0.5:
        case, eps = VerifierCase.CASE1, max(1 - p_max, 0.0)
        bound = theorem_bounds(eps, phi)[0]
        measured = d
        satisfied = measured >= bound - TOL
        margin = measured - bound
        if phi > math.pi / 2:
            warnings.append("phi > pi/2: the case-1 lower bound is not guaranteed there")
    else:
        case, eps = VerifierCase.CASE2, p_max
        bound = theorem_bounds(eps, phi)[1]
        measured = operator_norm(Zm - np.exp(0.5j * phi) * np.eye(Zm.shape[0]), seed=seed)
        satisfied = measured <= bound + TOL
        margin = bound - measured
    return TheoremReport(
        case=case,
        epsilon=eps,
        phi=phi,
        measured=measured,
        bound=bound,
        satisfied=satisfied,
        margin=margin,
        warning="; ".join(warnings) or None,
        p_max=p_max,
        min_distance=d,
        epsilon_declared=v.epsilon,
    )


def case1_witness(v: VerifierSpec, psi: np.ndarray) -> np.ndarray:
    """(|0> + |1>)/sqrt 2 on the extra qubit, ``psi`` on the inputs, ancillas |0..0>."""
    N = v.circuit.n_qubits
    state = np.zeros(2 ** (N + 1), dtype=complex)
    k = 2**v.n_input
    state[:k] = psi / math.sqrt(2)
    state[2**N: 2**N + k] = psi / math.sqrt(2)
    return state


PHI_GRID = tuple(k * math.pi / 16 for k in range(1, 9))


def sample_verifiers(count: int, seed: int, max_qubits: int = 5) -> list[VerifierSpec]:
    """Seeded random verifiers with n + m <= max_qubits and at least one ancilla."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        total = int(rng.integers(2, max_qubits + 1))
        m = int(rng.integers(1, total))
        out.append(random_verifier(total - m, m, int(rng.integers(2, 21)), rng))
    return out
