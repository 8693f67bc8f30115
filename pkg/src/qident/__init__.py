"""Identity and equivalence checks for small quantum circuits.

Dense simulation of a gate-level IR, the operator-norm distance of a unitary to
the global phases, a phase-estimation verifier for circuit equivalence and the
reduction circuit that maps verifier acceptance to that distance.
"""

from .circuit import (
    Circuit,
    Gate,
    GateKind,
    SignedControl,
    concat,
    controlled,
    cp,
    embed,
    gate,
    inverse,
    parse_circuit,
    power,
    random_circuit,
    serialize_circuit,
)
from .errors import (
    CircuitError,
    CircuitSyntaxError,
    ConvergenceError,
    NonUnitaryError,
    NotInvariantError,
    QidentError,
    SimulationCapError,
    StateFormatError,
    SubspaceError,
)
from .reduction import (
    PHI_GRID,
    TheoremReport,
    build_Z,
    check_theorem,
    critical_epsilon,
    separation_ok,
    theorem_bounds,
)
from .sim import apply_circuit, apply_gate, circuit_unitary, eigenphases, operator_norm
from .spectral import (
    IdentityVerdict,
    SpectralReport,
    SubspaceSpec,
    Verdict,
    decide_equivalence,
    decide_identity,
    distance_to_phase_multiple,
    minimal_covering_arc,
    restricted_operator,
    subspace_projector,
)
from .verifier import (
    Fig1Params,
    Mixture,
    VerifierCase,
    VerifierSpec,
    acceptance_probability,
    build_equivalence_verifier,
    classify_verifier,
    fig1_acceptance,
    honest_witness,
    max_acceptance,
    qpe_distribution,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
