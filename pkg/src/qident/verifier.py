"""QMA acceptance semantics and the phase-estimation equivalence verifier.

The verifier compares two witness registers: each is checked for membership in
the invariant subspace, then run through phase estimation against
``A = U_x U_y^H``; it accepts when both membership flags are set and the two
phase estimates are far enough apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .circuit import (
    Circuit,
    Gate,
    concat,
    controlled,
    cp,
    embed,
    gate,
    inverse,
    power,
    random_circuit,
)
from .errors import CircuitError, NotInvariantError, SimulationCapError
from .sim import MAX_STATE_QUBITS, apply_circuit, unitary_eig
from .spectral import (
    SubspaceSpec,
    pair_operator,
    invariance_defect,
    minimal_covering_arc,
    restricted_operator,
    subspace_projector,
)

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class VerifierSpec:
    """Verifier circuit on ``n_input`` witness qubits followed by ``m_ancilla`` ancillas."""

    circuit: Circuit
    n_input: int
    m_ancilla: int
    output_qubit: int
    epsilon: float | None = None

    def __post_init__(self):
        if self.n_input < 0 or self.m_ancilla < 0:
            raise CircuitError("register sizes must be nonnegative")
        if self.n_input + self.m_ancilla != self.circuit.n_qubits:
            raise CircuitError(
                f"n_input + m_ancilla = {self.n_input + self.m_ancilla} but circuit has "
                f"{self.circuit.n_qubits} qubits"
            )
        if not 0 <= self.output_qubit < self.circuit.n_qubits:
            raise CircuitError("output qubit out of range")
        if self.epsilon is not None and not 0 < self.epsilon <= 1 / 3:
            raise ValueError("epsilon must lie in (0, 1/3]")

    @classmethod
    def from_circuit(cls, c: Circuit, epsilon: float | None = None) -> VerifierSpec:
        """Read the register split from the ``output``/``ancillas`` directives."""
        if c.output_qubit is None:
            raise CircuitError("verifier circuit needs an 'output' directive")
        m = c.ancilla_count or 0
        return cls(c, c.n_qubits - m, m, c.output_qubit, epsilon)

    def to_circuit(self) -> Circuit:
        return Circuit(self.circuit.n_qubits, self.circuit.gates, self.output_qubit, self.m_ancilla)


@dataclass(frozen=True)
class Mixture:
    """Convex combination of pure witness states."""

    weights: tuple[float, ...]
    states: tuple[np.ndarray, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.weights) != len(self.states) or not self.states:
            raise ValueError("mixture needs matching, nonempty weights and states")
        if np.any(w < 0) or abs(w.sum() - 1) > 1e-9:
            raise ValueError("mixture weights must be nonnegative and sum to 1")
        for psi in self.states:
            if abs(np.linalg.norm(psi) - 1) > 1e-9:
                raise ValueError("mixture component is not normalized")


Witness = Union[np.ndarray, Mixture]


class VerifierCase(str, Enum):
    CASE1 = "CASE1"
    CASE2 = "CASE2"
    PROMISE_VIOLATED = "PROMISE_VIOLATED"


def _accepted_columns(v: VerifierSpec, inputs: np.ndarray) -> np.ndarray:
    """Run the verifier on input-register states (columns), ancillas |0..0>; return output-1 part."""
    N = v.circuit.n_qubits
    if inputs.shape[0] != 2**v.n_input:
        raise ValueError(
            f"witness dimension {inputs.shape[0]} does not match {v.n_input} input qubits"
        )
    full = np.zeros((2**N,) + inputs.shape[1:], dtype=complex)
    full[: 2**v.n_input] = inputs
    out = apply_circuit(full, v.circuit)
    mask = ((np.arange(2**N) >> v.output_qubit) & 1) == 1
    return out[mask]


def acceptance_probability(v: VerifierSpec, w: Witness) -> float:
    """``tr(U (rho (x) |0><0|) U^H P_1)`` by statevector simulation."""
    if isinstance(w, Mixture):
        return float(sum(p * acceptance_probability(v, psi) for p, psi in zip(w.weights, w.states)))
    psi = np.asarray(w, dtype=complex)
    if abs(np.linalg.norm(psi) - 1) > 1e-9:
        raise ValueError("witness is not normalized")
    good = _accepted_columns(v, psi)
    return float(np.clip(np.vdot(good, good).real, 0.0, 1.0))


def acceptance_operator(v: VerifierSpec) -> np.ndarray:
    """``Q = (1 (x) <0^m|) U^H P_1 U (1 (x) |0^m>)`` on the input register."""
    if v.n_input > 10:
        raise SimulationCapError("max_acceptance supports at most 10 input qubits")
    good = _accepted_columns(v, np.eye(2**v.n_input, dtype=complex))
    Q = good.conj().T @ good
    return (Q + Q.conj().T) / 2


def max_acceptance(v: VerifierSpec) -> tuple[float, np.ndarray]:
    w, vecs = np.linalg.eigh(acceptance_operator(v))
    return float(np.clip(w[-1], 0.0, 1.0)), vecs[:, -1]


def classify_verifier(v: VerifierSpec, epsilon: float) -> VerifierCase:
    if not 0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    p, _ = max_acceptance(v)
    if p >= 1 - epsilon:
        return VerifierCase.CASE1
    if p <= epsilon:
        return VerifierCase.CASE2
    return VerifierCase.PROMISE_VIOLATED


# -- honest witnesses --------------------------------------------------------

def find_extremal_eigenvectors(A: np.ndarray) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Eigenvectors at the two endpoints of the minimal covering arc of ``A``'s spectrum.

    Returns ``(psi_a, psi_b, alpha, beta)`` with alpha the arc start and beta its end.
    """
    phases, vecs = unitary_eig(A)
    start, length = minimal_covering_arc(phases)
    if length < 1e-12:
        raise ValueError("degenerate spectrum: no separating witnesses exist")
    end = math.fmod(start + length, TWO_PI)

    def nearest(theta):
        d = np.abs(np.angle(np.exp(1j * (phases - theta))))
        return int(np.argmin(d))

    ia, ib = nearest(start), nearest(end)
    return vecs[:, ia], vecs[:, ib], float(phases[ia]), float(phases[ib])


def pair_witness(psi_a: np.ndarray, psi_b: np.ndarray) -> np.ndarray:
    """|psi_a> (x) |psi_b> with register a on the low qubits."""
    return np.kron(psi_b, psi_a)


def honest_witness(U_x: Circuit, U_y: Circuit, s: SubspaceSpec | None = None) -> np.ndarray:
    A = restricted_operator(U_x, U_y, s)
    psi_a, psi_b, _, _ = find_extremal_eigenvectors(A)
    if s is not None:
        B = subspace_projector(s).basis
        psi_a, psi_b = B @ psi_a, B @ psi_b
    return pair_witness(psi_a, psi_b)


# -- phase estimation --------------------------------------------------------

def qpe_kernel(theta, t: int) -> np.ndarray:
    """``K_t(theta, y) = |2^-t sum_k exp(i k (theta - 2 pi y / 2^t))|^2``; shape (len(theta), 2^t)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    size = 2**t
    k = np.arange(size)
    y = np.arange(size)
    # amplitude(theta, y) = 2^-t sum_k e^{ik theta} e^{-2 pi i k y / 2^t}
    amp = np.exp(1j * np.outer(theta, k)) @ np.exp(-2j * math.pi * np.outer(k, y) / size) / size
    return np.abs(amp) ** 2


def qpe_distribution(A: np.ndarray, psi: np.ndarray, t: int) -> np.ndarray:
    """Outcome distribution of ``t``-bit phase estimation of ``A`` on ``psi``."""
    psi = np.asarray(psi, dtype=complex)
    if abs(np.linalg.norm(psi) - 1) > 1e-9:
        raise ValueError("state is not normalized")
    phases, vecs = unitary_eig(A)
    weights = np.abs(vecs.conj().T @ psi) ** 2
    return weights @ qpe_kernel(phases, t)


def required_phase_bits(delta: float, mu: float) -> int:
    """Smallest t with bin error pi/2^t at most (delta^2 - mu^2)/8, and at least 4."""
    gap = delta**2 - mu**2
    if gap <= 0:
        raise ValueError("need delta > mu")
    return max(4, math.ceil(math.log2(8 * math.pi / gap)))


@dataclass(frozen=True)
class Fig1Params:
    t: int
    delta: float
    mu: float

    def __post_init__(self):
        if self.t < 2:
            raise ValueError("need at least 2 phase bits per witness")
        if not 0 <= self.mu < self.delta <= 2:
            raise ValueError("thresholds must satisfy 0 <= mu < delta <= 2")

    @classmethod
    def sized(cls, delta: float, mu: float) -> Fig1Params:
        return cls(required_phase_bits(delta, mu), delta, mu)

    @property
    def chord_threshold(self) -> float:
        """Accept threshold on the estimated distance, midway between mu^2 and delta^2."""
        return math.sqrt((self.delta**2 + self.mu**2) / 2)

    @property
    def meets_accuracy(self) -> bool:
        return self.t >= required_phase_bits(self.delta, self.mu)


def estimated_distance(y_a, y_b, t: int):
    """Distance to global phases implied by two phase estimates.

    The circular difference is taken in (-pi, pi] and mapped to
    ``sqrt(2 (1 - cos(diff/2))) = 2 sin(|diff|/4)``.
    """
    size = 2**t
    diff = np.mod(np.asarray(y_a) - np.asarray(y_b), size) * (TWO_PI / size)
    diff = np.where(diff > math.pi, diff - TWO_PI, diff)
    return 2 * np.sin(np.abs(diff) / 4)


def accept_table(p: Fig1Params) -> np.ndarray:
    """Boolean ``[y_a, y_b]`` table of phase-estimate pairs the comparator accepts."""
    y = np.arange(2**p.t)
    return estimated_distance(y[:, None], y[None, :], p.t) >= p.chord_threshold


def _subspace_projector_for(A: np.ndarray, s: SubspaceSpec | None, n: int) -> np.ndarray | None:
    if s is None:
        return None
    if s.n != n:
        raise CircuitError("subspace input register does not match the circuits")
    B = subspace_projector(s).basis
    defect = invariance_defect(A, B)
    if defect > 1e-7:
        raise NotInvariantError(f"subspace not invariant under U_x U_y^H (leak {defect:.3g})")
    return B @ B.conj().T


def fig1_acceptance(
    U_x: Circuit,
    U_y: Circuit,
    s: SubspaceSpec | None,
    w: Witness,
    p: Fig1Params,
) -> float:
    """Acceptance probability of the equivalence verifier, evaluated in A's eigenbasis.

    Membership checks project each register onto the subspace; phase estimation
    on register a (b) then yields outcome y with probability given by the
    phase-estimation kernel of each eigencomponent.  Eigencomponents stay
    orthogonal through the readout, so the joint distribution is a sum of
    per-component kernel products.
    """
    n = U_x.n_qubits
    A = pair_operator(U_x, U_y)
    P = _subspace_projector_for(A, s, n)
    phases, vecs = unitary_eig(A)
    kernel = qpe_kernel(phases, p.t)
    table = accept_table(p)

    def pure(psi):
        psi = np.asarray(psi, dtype=complex)
        if psi.shape != (4**n,):
            raise ValueError(f"pair witness must have dimension {4**n}")
        W = psi.reshape(2**n, 2**n)  # [b, a]
        if P is not None:
            W = P @ W @ P.T
        C = vecs.conj().T @ W @ vecs.conj()  # [l (b), k (a)]
        weights = np.abs(C) ** 2
        joint = kernel.T @ weights.T @ kernel  # [y_a, y_b]
        return float(np.sum(joint[table]))

    if isinstance(w, Mixture):
        return float(sum(q * pure(psi) for q, psi in zip(w.weights, w.states)))
    return pure(w)


# -- gate-level construction -------------------------------------------------

def qft(t: int) -> Circuit:
    """|k> -> 2^{-t/2} sum_y exp(2 pi i k y / 2^t) |y>, qubit 0 least significant."""
    gates: list[Gate] = []
    for j in reversed(range(t)):
        gates.append(gate("h", j))
        for l in reversed(range(j)):
            gates.append(cp(math.pi / 2 ** (j - l), [(l, True)], [j]))
    for q in range(t // 2):
        gates.append(gate("swap", q, t - 1 - q))
    return Circuit(t, tuple(gates))


@dataclass(frozen=True)
class VerifierLayout:
    n: int
    t: int
    m: int | None  # None: no membership check

    @property
    def wit_a(self):
        return list(range(0, self.n))

    @property
    def wit_b(self):
        return list(range(self.n, 2 * self.n))

    @property
    def phase_a(self):
        base = 2 * self.n
        return list(range(base, base + self.t))

    @property
    def phase_b(self):
        base = 2 * self.n + self.t
        return list(range(base, base + self.t))

    def member_anc(self, reg: int):
        base = 2 * self.n + 2 * self.t + reg * self.m
        return list(range(base, base + self.m))

    def flag(self, reg: int) -> int:
        return 2 * self.n + 2 * self.t + 2 * self.m + reg

    @property
    def n_qubits(self) -> int:
        extra = 0 if self.m is None else 2 * self.m + 2
        return 2 * self.n + 2 * self.t + extra + 1

    @property
    def output(self) -> int:
        return self.n_qubits - 1


def build_equivalence_verifier(
    U_x: Circuit, U_y: Circuit, s: SubspaceSpec | None, p: Fig1Params
) -> VerifierSpec:
    """Gate-level verifier: membership checks, two phase estimations and the comparator.

    The comparator is a table of signed-control phase gates conjugated by H on the
    output qubit, one per accepted (y_a, y_b) pattern; patterns are disjoint
    basis states, so their multi-controlled NOTs combine into a logical OR.
    """
    if U_x.n_qubits != U_y.n_qubits:
        raise CircuitError("compared circuits act on different qubit counts")
    n = U_x.n_qubits
    if n > 5:
        raise SimulationCapError("equivalence verifier supports at most 5 qubits per witness")
    lay = VerifierLayout(n, p.t, None if s is None else s.m)
    N = lay.n_qubits
    if N > MAX_STATE_QUBITS:
        raise SimulationCapError(f"verifier needs {N} qubits, cap is {MAX_STATE_QUBITS}")
    if s is not None and s.n != n:
        raise CircuitError("subspace input register does not match the circuits")

    gates: list[Gate] = []
    wits = (lay.wit_a, lay.wit_b)
    phases = (lay.phase_a, lay.phase_b)

    if s is not None:
        last = s.n + s.m - 1
        for reg in (0, 1):
            qmap = wits[reg] + lay.member_anc(reg)
            gates += embed(s.circuit, N, qmap).gates
            gates.append(gate("cx", qmap[last], lay.flag(reg)))
            gates += embed(inverse(s.circuit), N, qmap).gates

    A = concat(inverse(U_y), U_x)
    iqft = inverse(qft(p.t))
    for reg in (0, 1):
        gates += [gate("h", q) for q in phases[reg]]
        for j, ctl in enumerate(phases[reg]):
            block = embed(power(A, 2**j), N, wits[reg])
            gates += controlled(block, ctl).gates
        gates += embed(iqft, N, phases[reg]).gates

    out = lay.output
    flags = [] if s is None else [(lay.flag(0), True), (lay.flag(1), True)]
    table = accept_table(p)
    gates.append(gate("h", out))
    for y_a, y_b in zip(*np.nonzero(table)):
        ctls = [(q, bool((y_a >> i) & 1)) for i, q in enumerate(lay.phase_a)]
        ctls += [(q, bool((y_b >> i) & 1)) for i, q in enumerate(lay.phase_b)]
        gates.append(cp(math.pi, ctls + flags, [out]))
    gates.append(gate("h", out))

    circuit = Circuit(N, tuple(gates), out, N - 2 * n)
    return VerifierSpec(circuit, 2 * n, N - 2 * n, out)


def random_verifier(n_input: int, m_ancilla: int, n_gates: int, rng: np.random.Generator) -> VerifierSpec:
    c = random_circuit(n_input + m_ancilla, n_gates, rng)
    out = int(rng.integers(c.n_qubits))
    return VerifierSpec(c, n_input, m_ancilla, out)
