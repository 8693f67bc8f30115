"""Command-line front end.

Every command prints one JSON run report on stdout and a short human summary
on stderr.  Exit codes:

    0  success (dist/verifier/accept/reduce), NEAR (equiv), all satisfied (theorem)
    1  FAR (equiv), some bound violated (theorem)
    2  parse error, malformed or missing witness
    3  simulation cap exceeded
    4  promise violated (verdict still printed)
    5  subspace not invariant (equiv)
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .circuit import Circuit, parse_circuit, serialize_circuit
from .errors import (
    CircuitError,
    CircuitSyntaxError,
    NotInvariantError,
    SimulationCapError,
    StateFormatError,
    SubspaceError,
)
from .reduction import PHI_GRID, build_Z, check_theorem, sample_verifiers
from .sim import circuit_unitary, format_state, load_state
from .spectral import (
    SubspaceSpec,
    Verdict,
    classify,
    decide_equivalence,
    distance_to_phase_multiple,
    grid_distance,
)
from .verifier import (
    Fig1Params,
    VerifierSpec,
    acceptance_probability,
    build_equivalence_verifier,
    honest_witness,
    max_acceptance,
    required_phase_bits,
)

EXIT_OK, EXIT_FAR, EXIT_PARSE, EXIT_CAP, EXIT_PROMISE, EXIT_NOT_INVARIANT = range(6)

_ANGLE_TOKENS = {"pi": math.pi, "pi/2": math.pi / 2, "pi/4": math.pi / 4, "pi/8": math.pi / 8}


def angle(text: str) -> float:
    if text in _ANGLE_TOKENS:
        return _ANGLE_TOKENS[text]
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


class _Run:
    """Collects input digests and emits the run report."""

    def __init__(self, argv: list[str]):
        self.argv = argv
        self.inputs: dict[str, str] = {}
        self.t0 = time.perf_counter()

    def read(self, path: str) -> str:
        data = Path(path).read_bytes()
        self.inputs[path] = hashlib.sha256(data).hexdigest()
        return data.decode("utf-8")

    def circuit(self, path: str) -> Circuit:
        return parse_circuit(self.read(path))

    def emit(self, payload: dict, summary: str) -> None:
        report = {
            "command": self.argv,
            "inputs": self.inputs,
            "payload": payload,
            "wall_time": time.perf_counter() - self.t0,
        }
        print(json.dumps(report))
        print(summary, file=sys.stderr)


def _subspace(run: _Run, args, n: int) -> SubspaceSpec | None:
    if not args.subspace:
        return None
    return SubspaceSpec(run.circuit(args.subspace), n, args.anc)


def cmd_dist(run: _Run, args) -> int:
    c = run.circuit(args.circuit)
    report = distance_to_phase_multiple(circuit_unitary(c))
    payload = report.to_dict()
    code = EXIT_OK
    summary = f"distance {report.distance:.10g}"
    if args.delta is not None or args.mu is not None:
        if args.delta is None or args.mu is None:
            raise ValueError("--delta and --mu go together")
        verdict = classify(report, args.delta, args.mu)
        payload = verdict.to_dict()
        summary += f", verdict {verdict.verdict.value}"
        if verdict.verdict is Verdict.PROMISE_VIOLATED:
            code = EXIT_PROMISE
    if args.oracle_grid:
        value, phi = grid_distance(circuit_unitary(c), args.oracle_grid)
        bound = 2 * math.sin(math.pi / args.oracle_grid)
        payload["oracle"] = {
            "grid": args.oracle_grid,
            "value": value,
            "phi": phi,
            "discrepancy": abs(value - report.distance),
            "grid_bound": bound,
        }
        summary += f", grid oracle {value:.10g} (|diff| {abs(value - report.distance):.2e})"
    run.emit(payload, summary)
    return code


def cmd_equiv(run: _Run, args) -> int:
    a, b = run.circuit(args.a), run.circuit(args.b)
    s = _subspace(run, args, a.n_qubits)
    verdict = decide_equivalence(a, b, s, args.delta, args.mu)
    run.emit(verdict.to_dict(), f"verdict {verdict.verdict.value}, distance {verdict.distance:.10g}")
    return {
        Verdict.NEAR: EXIT_OK,
        Verdict.FAR: EXIT_FAR,
        Verdict.PROMISE_VIOLATED: EXIT_PROMISE,
    }[verdict.verdict]


def cmd_verifier(run: _Run, args) -> int:
    a, b = run.circuit(args.a), run.circuit(args.b)
    s = _subspace(run, args, a.n_qubits)
    t = args.t if args.t is not None else required_phase_bits(args.delta, args.mu)
    p = Fig1Params(t, args.delta, args.mu)
    v = build_equivalence_verifier(a, b, s, p)
    payload = {
        "t": p.t,
        "delta": p.delta,
        "mu": p.mu,
        "chord_threshold": p.chord_threshold,
        "meets_accuracy": p.meets_accuracy,
        "n_qubits": v.circuit.n_qubits,
        "n_input": v.n_input,
        "ancillas": v.m_ancilla,
        "output": v.output_qubit,
        "gates": len(v.circuit),
    }
    if args.emit:
        Path(args.emit).write_text(serialize_circuit(v.to_circuit()), encoding="utf-8")
        payload["emitted"] = args.emit
    if args.emit_witness:
        Path(args.emit_witness).write_text(format_state(honest_witness(a, b, s)), encoding="utf-8")
        payload["witness"] = args.emit_witness
    run.emit(payload, f"verifier on {v.circuit.n_qubits} qubits, {len(v.circuit)} gates, t={t}")
    return EXIT_OK


def cmd_accept(run: _Run, args) -> int:
    v = VerifierSpec.from_circuit(run.circuit(args.verifier))
    payload: dict = {"n_input": v.n_input, "ancillas": v.m_ancilla, "output": v.output_qubit}
    witness = None
    if args.witness:
        witness = load_state(args.witness)
        run.inputs[args.witness] = hashlib.sha256(Path(args.witness).read_bytes()).hexdigest()
    elif args.honest:
        if not args.pair:
            raise StateFormatError("--honest needs --pair A.qc B.qc")
        a, b = run.circuit(args.pair[0]), run.circuit(args.pair[1])
        witness = honest_witness(a, b, _subspace(run, args, a.n_qubits))
    elif not args.max:
        raise StateFormatError("no witness given (use --witness, --honest or --max)")
    summary = []
    if witness is not None:
        if witness.shape[0] != 2**v.n_input:
            raise StateFormatError(
                f"witness dimension {witness.shape[0]} does not match {v.n_input} input qubits"
            )
        p = acceptance_probability(v, witness)
        payload["acceptance"] = p
        summary.append(f"acceptance {p:.10g}")
    if args.max:
        p_max, _ = max_acceptance(v)
        payload["p_max"] = p_max
        summary.append(f"p_max {p_max:.10g}")
    run.emit(payload, ", ".join(summary))
    return EXIT_OK


def cmd_reduce(run: _Run, args) -> int:
    v = VerifierSpec.from_circuit(run.circuit(args.verifier))
    z = build_Z(v, args.phi)
    payload = {"phi": args.phi, "n_qubits": z.n_qubits, "gates": len(z)}
    if args.emit:
        Path(args.emit).write_text(serialize_circuit(z), encoding="utf-8")
        payload["emitted"] = args.emit
    report = distance_to_phase_multiple(circuit_unitary(z))
    payload["distance"] = report.distance
    run.emit(payload, f"Z on {z.n_qubits} qubits, distance {report.distance:.10g}")
    return EXIT_OK


def _theorem_job(job):
    v, phi, seed = job
    return check_theorem(v, phi, seed=seed).to_dict()


def cmd_theorem(run: _Run, args) -> int:
    verifiers: list[tuple[str, VerifierSpec]] = []
    if args.verifier:
        verifiers.append((args.verifier, VerifierSpec.from_circuit(run.circuit(args.verifier))))
    if args.random:
        for i, v in enumerate(sample_verifiers(args.random, args.seed)):
            verifiers.append((f"random[{i}]", v))
    if not verifiers:
        raise StateFormatError("give a verifier file and/or --random N")
    phis = list(PHI_GRID) if args.phi_grid else [args.phi]
    jobs = [(v, phi, args.seed) for _, v in verifiers for phi in phis]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_theorem_job, jobs))
    else:
        results = [_theorem_job(j) for j in jobs]
    names = [name for name, _ in verifiers for _ in phis]
    for name, r in zip(names, results):
        r["verifier"] = name
    n_ok = sum(r["satisfied"] for r in results)
    payload = {"reports": results, "satisfied": n_ok, "total": len(results)}
    if len(results) == 1:
        payload = dict(results[0])
    run.emit(payload, f"{n_ok}/{len(results)} bounds satisfied")
    return EXIT_OK if n_ok == len(results) else EXIT_FAR


_ERROR_CODES = [
    ((CircuitSyntaxError, StateFormatError, CircuitError, OSError, UnicodeDecodeError), EXIT_PARSE, "parse"),
    (SimulationCapError, EXIT_CAP, "cap"),
    ((NotInvariantError, SubspaceError), EXIT_NOT_INVARIANT, "subspace"),
    (ValueError, EXIT_PARSE, "invalid"),
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qident", description=__doc__.split("\n")[0])
    parser.add_argument("--seed", type=int, default=0, help="RNG seed (QIDENT_SEED overrides)")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    def subspace_opts(p):
        p.add_argument("--subspace", metavar="V.qc", help="membership circuit on n+m qubits")
        p.add_argument("--anc", type=int, default=0, help="ancilla count m of the membership circuit")

    p = add("dist", help="distance of a circuit to the global phases")
    p.add_argument("circuit")
    p.add_argument("--delta", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--oracle-grid", type=int, metavar="N")
    p.set_defaults(func=cmd_dist)

    p = add("equiv", help="equivalence check of two circuits")
    p.add_argument("a")
    p.add_argument("b")
    subspace_opts(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.set_defaults(func=cmd_equiv)

    p = add("verifier", help="build the phase-estimation equivalence verifier")
    p.add_argument("a")
    p.add_argument("b")
    subspace_opts(p)
    p.add_argument("--t", type=int, help="phase bits per witness (default: accuracy rule)")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--emit", metavar="OUT.qc")
    p.add_argument("--emit-witness", metavar="W.txt", help="write the honest pair witness")
    p.set_defaults(func=cmd_verifier)

    p = add("accept", help="acceptance probability of a verifier")
    p.add_argument("verifier")
    p.add_argument("--witness", metavar="W.txt")
    p.add_argument("--honest", action="store_true", help="arc-endpoint eigenvector witness")
    p.add_argument("--pair", nargs=2, metavar=("A.qc", "B.qc"), help="circuits for --honest")
    subspace_opts(p)
    p.add_argument("--max", action="store_true", help="also report the maximum over witnesses")
    p.set_defaults(func=cmd_accept)

    p = add("reduce", help="build Z = U^H W U V from a verifier")
    p.add_argument("verifier")
    p.add_argument("--phi", type=angle, required=True)
    p.add_argument("--emit", metavar="Z.qc")
    p.set_defaults(func=cmd_reduce)

    p = add("theorem", help="check the norm bounds on Z")
    p.add_argument("verifier", nargs="?")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--phi", type=angle)
    g.add_argument("--phi-grid", action="store_true", help=f"{len(PHI_GRID)} values k*pi/16, k=1..8")
    p.add_argument("--random", type=int, metavar="N", help="also check N seeded random verifiers")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_theorem)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    env_seed = os.environ.get("QIDENT_SEED")
    if env_seed is not None:
        args.seed = int(env_seed)
    run = _Run(argv)
    try:
        return args.func(run, args)
    except Exception as exc:
        for types, code, kind in _ERROR_CODES:
            if isinstance(exc, types):
                break
        else:
            raise
        print(json.dumps({"command": argv, "error": kind, "message": str(exc)}))
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
