"""Distance from a unitary to the global phases, identity/equivalence decisions,
and restriction to an invariant subspace given by a membership circuit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .circuit import Circuit
from .errors import CircuitError, NotInvariantError, SubspaceError
from .sim import apply_circuit, circuit_unitary, unitary_eig

TWO_PI = 2 * math.pi
_TIE_TOL = 1e-12


def minimal_covering_arc(phases) -> tuple[float, float]:
    """Shortest circular arc containing every phase, as ``(arc_start, arc_length)``.

    The arc is the complement of the largest gap between circularly consecutive
    phases.  Equal-length candidates resolve to the smallest start.
    """
    p = np.sort(np.asarray(phases, dtype=float).ravel())
    if p.size == 0:
        raise ValueError("minimal_covering_arc needs at least one phase")
    gaps = np.diff(np.append(p, p[0] + TWO_PI))
    largest = gaps.max()
    # gap i runs from p[i] to p[i+1]; the arc starts where that gap ends
    starts = [float(p[(i + 1) % p.size]) for i in np.flatnonzero(gaps >= largest - _TIE_TOL)]
    return min(starts), float(TWO_PI - largest)


class Verdict(str, Enum):
    FAR = "FAR"
    NEAR = "NEAR"
    PROMISE_VIOLATED = "PROMISE_VIOLATED"


@dataclass(frozen=True)
class SpectralReport:
    eigenphases: tuple[float, ...]
    arc_start: float
    arc_length: float
    optimal_phase: float
    distance: float

    def to_dict(self) -> dict:
        return {
            "eigenphases": list(self.eigenphases),
            "arc_start": self.arc_start,
            "arc_length": self.arc_length,
            "optimal_phase": self.optimal_phase,
            "distance": self.distance,
        }


def report_from_phases(phases) -> SpectralReport:
    phases = np.sort(np.asarray(phases, dtype=float))
    start, length = minimal_covering_arc(phases)
    return SpectralReport(
        eigenphases=tuple(float(t) for t in phases),
        arc_start=start,
        arc_length=length,
        optimal_phase=float(math.fmod(start + length / 2, TWO_PI)),
        distance=2 * math.sin(length / 4),
    )


def distance_to_phase_multiple(U: np.ndarray) -> SpectralReport:
    """Exact ``min_phi ||U - e^{i phi} 1||`` for a unitary ``U``.

    ``U - e^{i phi} 1`` is normal, so its norm is the largest chord from
    ``e^{i phi}`` to the spectrum; the minimax point is the midpoint of the
    minimal covering arc of length L and the chord there is ``2 sin(L/4)``.
    """
    phases, _ = unitary_eig(U)
    return report_from_phases(phases)


def grid_distance(U: np.ndarray, n_grid: int = 100_000, refine: int = 8) -> tuple[float, float]:
    """Brute-force ``min_phi ||U - e^{i phi} 1||`` over a uniform phi grid.

    Returns ``(value, phi_at_min)``.  The grid is scanned with the largest chord
    from ``e^{i phi}`` to the eigenvalues of ``U`` (general LAPACK solver, no
    covering-arc geometry); the ``refine`` best grid points are then re-scored
    with the true operator norm from a singular value decomposition.  Grid
    resolution adds at most ``2 sin(pi / n_grid)`` to the exact minimum.
    """
    U = np.asarray(U, dtype=complex)
    lam = np.linalg.eigvals(U)
    grid = np.arange(n_grid) * (TWO_PI / n_grid)
    chords = np.zeros(n_grid)
    for z in lam:
        np.maximum(chords, np.abs(np.exp(1j * grid) - z), out=chords)
    eye = np.eye(U.shape[0])
    best, best_phi = np.inf, 0.0
    for i in np.argsort(chords, kind="stable")[:refine]:
        val = float(np.linalg.norm(U - np.exp(1j * grid[i]) * eye, 2))
        if val < best:
            best, best_phi = val, float(grid[i])
    return best, best_phi


@dataclass(frozen=True)
class IdentityVerdict:
    verdict: Verdict
    distance: float
    optimal_phase: float
    delta: float
    mu: float
    report: SpectralReport

    def to_dict(self) -> dict:
        d = self.report.to_dict()
        d.update(verdict=self.verdict.value, delta=self.delta, mu=self.mu)
        return d


def _check_thresholds(delta: float, mu: float) -> None:
    if not 0 <= mu < delta <= 2:
        raise ValueError(f"thresholds must satisfy 0 <= mu < delta <= 2 (got delta={delta}, mu={mu})")


def classify(report: SpectralReport, delta: float, mu: float) -> IdentityVerdict:
    _check_thresholds(delta, mu)
    d = report.distance
    if d >= delta:
        v = Verdict.FAR
    elif d <= mu:
        v = Verdict.NEAR
    else:
        v = Verdict.PROMISE_VIOLATED
    return IdentityVerdict(v, d, report.optimal_phase, delta, mu, report)


def decide_identity(c: Circuit, delta: float, mu: float) -> IdentityVerdict:
    _check_thresholds(delta, mu)
    return classify(distance_to_phase_multiple(circuit_unitary(c)), delta, mu)


# -- invariant subspaces -----------------------------------------------------

@dataclass(frozen=True)
class SubspaceSpec:
    """Membership circuit ``V`` on n input + m ancilla qubits.

    A state psi on the inputs is in the subspace iff ``V (psi (x) |0^m>)`` has
    its last qubit (index n+m-1) in |1>.
    """

    circuit: Circuit
    n: int
    m: int

    def __post_init__(self):
        if self.n < 1 or self.m < 0 or self.circuit.n_qubits != self.n + self.m:
            raise CircuitError(
                f"membership circuit has {self.circuit.n_qubits} qubits, expected n+m={self.n + self.m}"
            )


@dataclass(frozen=True)
class SubspaceProjection:
    matrix: np.ndarray
    basis: np.ndarray = field(repr=False)

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


_MEMBER_TOL = 1e-6


def subspace_projector(s: SubspaceSpec) -> SubspaceProjection:
    """Compressed membership operator on the input register and an orthonormal basis of its 1-eigenspace."""
    n, m = s.n, s.m
    total = n + m
    # columns V (|j> (x) |0^m>); ancillas are the high qubits so these are the first 2^n basis states
    cols = np.zeros((2**total, 2**n), dtype=complex)
    cols[: 2**n, :] = np.eye(2**n)
    out = apply_circuit(cols, s.circuit)
    flag = (np.arange(2**total) >> (total - 1)) & 1
    good = out[flag == 1]
    M = good.conj().T @ good
    M = (M + M.conj().T) / 2
    w, vecs = np.linalg.eigh(M)
    if np.any((w > _MEMBER_TOL) & (w < 1 - _MEMBER_TOL)):
        raise SubspaceError("subspace circuit is not a clean membership test")
    return SubspaceProjection(M, vecs[:, w >= 1 - _MEMBER_TOL])


def pair_operator(U_x: Circuit, U_y: Circuit) -> np.ndarray:
    if U_x.n_qubits != U_y.n_qubits:
        raise CircuitError("compared circuits act on different qubit counts")
    ux = circuit_unitary(U_x)
    uy = circuit_unitary(U_y)
    return ux @ uy.conj().T


def invariance_defect(A: np.ndarray, basis: np.ndarray) -> float:
    """``||(1 - P) A P||`` for the projector onto span(basis)."""
    if basis.shape[1] == 0:
        return 0.0
    AB = A @ basis
    leak = AB - basis @ (basis.conj().T @ AB)
    return float(np.linalg.norm(leak, 2))


def restricted_operator(U_x: Circuit, U_y: Circuit, s: SubspaceSpec | None = None) -> np.ndarray:
    """``B^H (U_x U_y^H) B`` for an orthonormal basis B of the subspace (full space if ``s`` is None)."""
    A = pair_operator(U_x, U_y)
    if s is None:
        return A
    if s.n != U_x.n_qubits:
        raise CircuitError("subspace input register does not match the circuits")
    B = subspace_projector(s).basis
    if B.shape[1] == 0:
        raise SubspaceError("subspace is trivial")
    defect = invariance_defect(A, B)
    if defect > 1e-7:
        raise NotInvariantError(f"subspace not invariant under U_x U_y^H (leak {defect:.3g})")
    return B.conj().T @ A @ B


def decide_equivalence(
    U_x: Circuit, U_y: Circuit, s: SubspaceSpec | None, delta: float, mu: float
) -> IdentityVerdict:
    _check_thresholds(delta, mu)
    A = restricted_operator(U_x, U_y, s)
    return classify(distance_to_phase_multiple(A), delta, mu)
