"""Dense statevector / unitary simulation and the spectral primitives on top of it."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import scipy.linalg

from .circuit import Circuit, Gate, GateKind, gate_matrix
from .errors import ConvergenceError, NonUnitaryError, SimulationCapError, StateFormatError

MAX_STATE_QUBITS = 24
MAX_UNITARY_QUBITS = 12


def _check_dim(state: np.ndarray, n: int) -> None:
    if state.shape[0] != 2**n:
        raise ValueError(f"state dimension {state.shape[0]} does not match {n} qubits")


def _apply_inplace(psi: np.ndarray, g: Gate, n: int) -> np.ndarray:
    """Apply ``g`` to ``psi`` viewed as a (2,)*n [+ batch] tensor.

    Axis ``n-1-q`` holds qubit ``q``.  May mutate ``psi``; returns the result.
    """
    if g.kind is GateKind.CP:
        index = [slice(None)] * psi.ndim
        for ctl in g.controls:
            index[n - 1 - ctl.qubit] = int(ctl.positive)
        for q in g.targets:
            index[n - 1 - q] = 1
        psi[tuple(index)] *= np.exp(1j * g.angle)
        return psi
    if g.kind is GateKind.ID:
        return psi
    k = len(g.targets)
    mat = gate_matrix(g).reshape((2,) * (2 * k))
    axes = [n - 1 - q for q in g.targets]
    out = np.tensordot(mat, psi, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def apply_gate(state: np.ndarray, g: Gate, n: int) -> np.ndarray:
    """Return ``G state`` for one gate on an ``n``-qubit register.

    ``state`` may carry a trailing batch axis (one column per state).
    """
    state = np.asarray(state, dtype=complex)
    _check_dim(state, n)
    if any(q >= n for q in g.qubits):
        raise ValueError("gate index out of range")
    psi = state.reshape((2,) * n + state.shape[1:]).copy()
    return _apply_inplace(psi, g, n).reshape(state.shape)


def apply_circuit(state: np.ndarray, c: Circuit) -> np.ndarray:
    n = c.n_qubits
    if n > MAX_STATE_QUBITS:
        raise SimulationCapError(f"{n} qubits exceeds the statevector cap of {MAX_STATE_QUBITS}")
    state = np.asarray(state, dtype=complex)
    _check_dim(state, n)
    psi = state.reshape((2,) * n + state.shape[1:]).copy()
    for g in c.gates:
        psi = _apply_inplace(psi, g, n)
    return np.ascontiguousarray(psi).reshape(state.shape)


def circuit_unitary(c: Circuit) -> np.ndarray:
    if c.n_qubits > MAX_UNITARY_QUBITS:
        raise SimulationCapError(
            f"{c.n_qubits} qubits exceeds the unitary cap of {MAX_UNITARY_QUBITS}"
        )
    return apply_circuit(np.eye(2**c.n_qubits, dtype=complex), c)


def basis_state(index: int, n: int) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[index] = 1
    return psi


def unitarity_error(U: np.ndarray) -> float:
    U = np.asarray(U)
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


# -- operator norm -----------------------------------------------------------

_SQUARING_DIM = 512
_SQUARINGS = 48


def operator_norm(
    M: np.ndarray,
    seed: int = 0,
    tol: float = 1e-12,
    max_iter: int = 10_000,
) -> float:
    """Largest singular value of ``M`` by power iteration on the Gram matrix ``M^H M``.

    For dimensions up to 512 the Gram matrix is first raised to a large power by
    repeated squaring, which makes the iterate converge even when the top
    singular values are nearly degenerate.  The returned value is the Rayleigh
    quotient of the original Gram matrix, so squaring round-off only enters at
    second order.
    """
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return 0.0
    gram = M.conj().T @ M
    scale = float(np.max(np.abs(gram)))
    if scale == 0.0:
        return 0.0
    gram = gram / scale
    rng = np.random.default_rng(seed)
    dim = gram.shape[0]
    x = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    x /= np.linalg.norm(x)

    op = gram
    if dim <= _SQUARING_DIM:
        for _ in range(_SQUARINGS):
            op = op @ op
            peak = np.max(np.abs(op))
            if peak == 0:
                break
            op = op / peak
            op = (op + op.conj().T) / 2
        y = op @ x
        if np.linalg.norm(y) > 0:
            x = y / np.linalg.norm(y)

    rho = float(np.real(np.vdot(x, gram @ x)))
    for it in range(1, max_iter + 1):
        y = gram @ x
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        x = y / ny
        rho_new = float(np.real(np.vdot(x, gram @ x)))
        if abs(rho_new - rho) <= tol * abs(rho_new):
            return math.sqrt(max(rho_new, 0.0) * scale)
        rho = rho_new
    raise ConvergenceError("power iteration did not converge", max_iter)


# -- eigenphases -------------------------------------------------------------

_TWO_PI = 2 * math.pi


def wrap_phase(theta):
    """Map angles into [0, 2*pi), sending values within 1e-14 of 2*pi to 0."""
    t = np.mod(theta, _TWO_PI)
    return np.where(_TWO_PI - t < 1e-14, 0.0, t)


def unitary_eig(U: np.ndarray, atol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Eigenphases (sorted, in [0, 2pi)) and an orthonormal eigenbasis of a unitary.

    Uses the complex Schur form, whose triangular factor is diagonal for normal
    input, so degenerate eigenspaces still come back orthonormal.
    """
    U = np.asarray(U, dtype=complex)
    err = unitarity_error(U)
    if err > atol:
        raise NonUnitaryError(f"matrix is not unitary (max |U^H U - 1| = {err:.3g})")
    try:
        T, Q = scipy.linalg.schur(U, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NonUnitaryError(f"eigen-solver failure: {exc}") from exc
    lam = np.diag(T)
    if np.max(np.abs(np.abs(lam) - 1)) > atol:
        raise NonUnitaryError("eigenvalue off the unit circle")
    phases = wrap_phase(np.angle(lam))
    order = np.argsort(phases, kind="stable")
    return phases[order], Q[:, order]


def eigenphases(U: np.ndarray) -> np.ndarray:
    return unitary_eig(U)[0]


def eigenphase_crosscheck(U: np.ndarray, phases: np.ndarray) -> float:
    """Max deviation between the Hermitian-part spectra and cos/sin of ``phases``.

    (U + U^H)/2 has eigenvalues cos(theta_j) and (U - U^H)/2i has sin(theta_j),
    so this validates the unit-circle placement without the Schur route.
    """
    U = np.asarray(U, dtype=complex)
    re = np.linalg.eigvalsh((U + U.conj().T) / 2)
    im = np.linalg.eigvalsh((U - U.conj().T) / 2j)
    return float(max(
        np.max(np.abs(np.sort(re) - np.sort(np.cos(phases)))),
        np.max(np.abs(np.sort(im) - np.sort(np.sin(phases)))),
    ))


# -- statevector files -------------------------------------------------------

def format_state(psi: np.ndarray) -> str:
    psi = np.asarray(psi, dtype=complex)
    lines = [f"dim {psi.shape[0]}"]
    lines += [f"{z.real!r} {z.imag!r}" for z in psi.tolist()]
    return "\n".join(lines) + "\n"


def parse_state(text: str) -> np.ndarray:
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise StateFormatError("empty statevector file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "dim" or not head[1].isdigit():
        raise StateFormatError("first line must be 'dim D'")
    dim = int(head[1])
    if dim < 1 or dim & (dim - 1):
        raise StateFormatError("dimension must be a power of two")
    if len(lines) - 1 != dim:
        raise StateFormatError(f"expected {dim} amplitude lines, got {len(lines) - 1}")
    psi = np.empty(dim, dtype=complex)
    for i, ln in enumerate(lines[1:]):
        parts = ln.split()
        if len(parts) != 2:
            raise StateFormatError(f"amplitude line {i + 2}: expected 're im'")
        try:
            psi[i] = complex(float(parts[0]), float(parts[1]))
        except ValueError:
            raise StateFormatError(f"amplitude line {i + 2}: not a number") from None
    if not np.all(np.isfinite(psi)):
        raise StateFormatError("non-finite amplitude")
    norm = np.linalg.norm(psi)
    if abs(norm - 1) > 1e-9:
        raise StateFormatError(f"state norm {norm!r} is not 1 within 1e-9")
    return psi


def load_state(path: str | Path) -> np.ndarray:
    return parse_state(Path(path).read_text(encoding="utf-8"))


def save_state(path: str | Path, psi: np.ndarray) -> None:
    Path(path).write_text(format_state(psi), encoding="utf-8")
