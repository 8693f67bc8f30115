"""Regenerate src/qident/fixtures/calibration.json.

Completeness: honest-witness acceptance for S on qubit 0 (2 qubits) versus the
identity.  Soundness: maximum acceptance over all pair witnesses when both
circuits are equal.  Both come from the brute-force quadratic form in
``oracles.fig1_acceptance_operator``.

    python tests/calibrate_fig1.py
"""

import json
import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from oracles import fig1_acceptance_operator, matrix_product_unitary  # noqa: E402

from qident.circuit import Circuit, gate  # noqa: E402

T = 4
DELTA = 2 * math.sin(math.pi / 8)
MU = 0.2


def main():
    threshold = math.sqrt((DELTA**2 + MU**2) / 2)
    S = matrix_product_unitary(Circuit(2, (gate("s", 0),)))
    I = np.eye(4)
    # honest pair: |0> on register a (phase 0), |1> on register b (phase pi/2)
    e0, e1 = np.eye(4)[0], np.eye(4)[1]
    w = np.kron(e1, e0)
    Q_sep = fig1_acceptance_operator(S @ I.conj().T, T, threshold)
    completeness = float(np.real(np.vdot(w, Q_sep @ w)))
    Q_same = fig1_acceptance_operator(S @ S.conj().T, T, threshold)
    soundness = float(np.linalg.eigvalsh((Q_same + Q_same.conj().T) / 2)[-1])
    out = {
        "t": T,
        "delta": DELTA,
        "mu": MU,
        "chord_threshold": threshold,
        "completeness": completeness,
        "soundness": soundness,
        "soundness_limit": 0.05,
        "required_gap": 0.5,
    }
    path = Path(__file__).parents[1] / "src" / "qident" / "fixtures" / "calibration.json"
    path.write_text(json.dumps(out, indent=2) + "\n")
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
