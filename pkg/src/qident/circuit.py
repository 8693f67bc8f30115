"""Gate-level circuit IR, the ``.qc`` text format and structural transforms.

Qubit 0 is the least-significant bit of a basis-state index.  Circuits are
immutable; every transform returns a new value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CircuitError, CircuitSyntaxError


class GateKind(str, Enum):
    ID = "id"
    X = "x"
    Y = "y"
    Z = "z"
    H = "h"
    S = "s"
    SDG = "sdg"
    T = "t"
    TDG = "tdg"
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    CX = "cx"
    CZ = "cz"
    SWAP = "swap"
    CP = "cp"

    @property
    def arity(self) -> int | None:
        """Number of target qubits; ``None`` for the variadic CP."""
        if self is GateKind.CP:
            return None
        if self in (GateKind.CX, GateKind.CZ, GateKind.SWAP):
            return 2
        return 1

    @property
    def has_angle(self) -> bool:
        return self in _ANGLED


_ANGLED = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.CP})
_DAGGER = {
    GateKind.S: GateKind.SDG,
    GateKind.SDG: GateKind.S,
    GateKind.T: GateKind.TDG,
    GateKind.TDG: GateKind.T,
}


@dataclass(frozen=True)
class SignedControl:
    """Control condition on one qubit: ``positive`` requires |1>, otherwise |0>."""

    qubit: int
    positive: bool

    def __str__(self) -> str:
        return f"{'+' if self.positive else '-'}{self.qubit}"


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    targets: tuple[int, ...]
    angle: float | None = None
    controls: tuple[SignedControl, ...] = ()

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        object.__setattr__(self, "controls", tuple(self.controls))
        if kind.arity is not None and len(self.targets) != kind.arity:
            raise CircuitError(f"{kind.value} takes {kind.arity} qubit(s), got {len(self.targets)}")
        if kind.has_angle != (self.angle is not None):
            raise CircuitError(f"{kind.value}: angle {'required' if kind.has_angle else 'not allowed'}")
        if self.angle is not None:
            angle = float(self.angle)
            if not math.isfinite(angle):
                raise CircuitError(f"{kind.value}: non-finite angle")
            object.__setattr__(self, "angle", angle)
        if self.controls and kind is not GateKind.CP:
            raise CircuitError("only cp carries signed controls")
        qs = self.qubits
        if len(set(qs)) != len(qs):
            raise CircuitError(f"duplicate qubit in {kind.value} gate")
        if any(q < 0 for q in qs):
            raise CircuitError("negative qubit index")

    @property
    def qubits(self) -> tuple[int, ...]:
        """Controls first, then targets; the order used by :func:`gate_matrix`."""
        return tuple(c.qubit for c in self.controls) + self.targets

    def dagger(self) -> Gate:
        if self.kind in _DAGGER:
            return replace(self, kind=_DAGGER[self.kind])
        if self.angle is not None:
            return replace(self, angle=-self.angle)
        return self

    def remap(self, mapping: Sequence[int] | Mapping[int, int]) -> Gate:
        return Gate(
            self.kind,
            tuple(mapping[q] for q in self.targets),
            self.angle,
            tuple(SignedControl(mapping[c.qubit], c.positive) for c in self.controls),
        )


def gate(name: str, *qubits: int, angle: float | None = None) -> Gate:
    """Shorthand constructor, e.g. ``gate("cx", 0, 1)`` or ``gate("rz", 2, angle=0.3)``."""
    return Gate(GateKind(name), tuple(qubits), angle)


def cp(angle: float, controls: Iterable[tuple[int, bool]] = (), targets: Iterable[int] = ()) -> Gate:
    """Phase ``exp(i*angle)`` on basis states matching every control and target."""
    return Gate(
        GateKind.CP,
        tuple(targets),
        angle,
        tuple(SignedControl(q, pos) for q, pos in controls),
    )


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    output_qubit: int | None = None
    ancilla_count: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_qubits < 1:
            raise CircuitError("circuit needs at least one qubit")
        for g in self.gates:
            if any(q >= self.n_qubits for q in g.qubits):
                raise CircuitError(
                    f"qubit index out of range in {g.kind.value} gate (n_qubits={self.n_qubits})"
                )
        if self.output_qubit is not None and not 0 <= self.output_qubit < self.n_qubits:
            raise CircuitError("output qubit out of range")
        if self.ancilla_count is not None and not 0 <= self.ancilla_count <= self.n_qubits:
            raise CircuitError("ancilla count out of range")

    def __len__(self) -> int:
        return len(self.gates)

    def with_gates(self, gates: Iterable[Gate]) -> Circuit:
        return replace(self, gates=tuple(gates))


# -- gate matrices -----------------------------------------------------------

_SQ2 = 1 / math.sqrt(2)
_FIXED = {
    GateKind.ID: np.eye(2, dtype=complex),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.diag([1, -1]).astype(complex),
    GateKind.H: np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    GateKind.S: np.diag([1, 1j]),
    GateKind.SDG: np.diag([1, -1j]),
    GateKind.T: np.diag([1, np.exp(1j * math.pi / 4)]),
    GateKind.TDG: np.diag([1, np.exp(-1j * math.pi / 4)]),
    GateKind.CX: np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
    GateKind.SWAP: np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def gate_matrix(g: Gate) -> np.ndarray:
    """Unitary of ``g`` on ``g.qubits``; the first listed qubit is the most significant."""
    if g.kind in _FIXED:
        return _FIXED[g.kind]
    theta = g.angle
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if g.kind is GateKind.RX:
        return np.array([[c, -1j * s], [-1j * s, c]])
    if g.kind is GateKind.RY:
        return np.array([[c, -s], [s, c]], dtype=complex)
    if g.kind is GateKind.RZ:
        return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    # CP: single marked basis pattern among its qubits
    k = len(g.qubits)
    pattern = [int(ctl.positive) for ctl in g.controls] + [1] * len(g.targets)
    idx = 0
    for bit in pattern:
        idx = (idx << 1) | bit
    diag = np.ones(2**k, dtype=complex)
    diag[idx] = np.exp(1j * theta)
    return np.diag(diag)


# -- .qc text format ---------------------------------------------------------

def _syntax(msg: str, line: int, col: int) -> CircuitSyntaxError:
    return CircuitSyntaxError(msg, line, col)


def _tokens(line: str) -> list[tuple[str, int]]:
    out = []
    i = 0
    while i < len(line):
        if line[i].isspace():
            i += 1
            continue
        j = i
        while j < len(line) and not line[j].isspace():
            j += 1
        out.append((line[i:j], i + 1))
        i = j
    return out


def _parse_index(tok: str, lineno: int, col: int) -> int:
    if not tok.isdigit():
        raise _syntax(f"expected qubit index, got {tok!r}", lineno, col)
    return int(tok)


def _parse_qubit(tok: str, n_qubits: int, lineno: int, col: int) -> int:
    q = _parse_index(tok, lineno, col)
    if q >= n_qubits:
        raise _syntax(f"qubit index {q} out of range (n_qubits={n_qubits})", lineno, col)
    return q


def _parse_angle(tok: str, lineno: int, col: int) -> float:
    try:
        value = float(tok)
    except ValueError:
        raise _syntax(f"expected angle, got {tok!r}", lineno, col) from None
    if not math.isfinite(value):
        raise _syntax("angle must be finite", lineno, col)
    return value


def parse_circuit(text: str) -> Circuit:
    """Parse ``.qc`` source into a :class:`Circuit`.

    Raises :class:`CircuitSyntaxError` carrying the 1-based line and column of
    the offending token.
    """
    n_qubits = None
    output = None
    ancillas = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        head, hcol = toks[0]
        args = toks[1:]
        if n_qubits is None:
            if head != "qubits" or len(args) != 1:
                raise _syntax("first statement must be 'qubits N'", lineno, hcol)
            n_qubits = _parse_index(args[0][0], lineno, args[0][1])
            if n_qubits < 1:
                raise _syntax("qubit count must be positive", lineno, args[0][1])
            continue
        if head in ("output", "ancillas"):
            if len(args) != 1:
                raise _syntax(f"'{head}' takes one integer", lineno, hcol)
            value = _parse_index(args[0][0], lineno, args[0][1])
            if head == "output":
                if value >= n_qubits:
                    raise _syntax("output qubit out of range", lineno, args[0][1])
                output = value
            else:
                if value > n_qubits:
                    raise _syntax("ancilla count exceeds qubit count", lineno, args[0][1])
                ancillas = value
            continue
        try:
            kind = GateKind(head)
        except ValueError:
            raise _syntax(f"unknown gate {head!r}", lineno, hcol) from None
        if kind is GateKind.CP:
            gates.append(_parse_cp(args, n_qubits, lineno, hcol))
            continue
        n_idx = kind.arity
        n_expected = n_idx + (1 if kind.has_angle else 0)
        if len(args) != n_expected:
            raise _syntax(f"{head} expects {n_expected} argument(s)", lineno, hcol)
        qubits = tuple(_parse_qubit(t, n_qubits, lineno, c) for t, c in args[:n_idx])
        angle = _parse_angle(args[n_idx][0], lineno, args[n_idx][1]) if kind.has_angle else None
        if len(set(qubits)) != len(qubits):
            raise _syntax(f"duplicate qubit in {head} gate", lineno, hcol)
        gates.append(Gate(kind, qubits, angle))
    if n_qubits is None:
        raise _syntax("missing 'qubits N' header", 1, 1)
    return Circuit(n_qubits, tuple(gates), output, ancillas)


def _parse_cp(args, n_qubits: int, lineno: int, hcol: int) -> Gate:
    if not args:
        raise _syntax("cp expects an angle", lineno, hcol)
    angle = _parse_angle(args[0][0], lineno, args[0][1])
    controls: list[SignedControl] = []
    targets: list[int] = []
    after_colon = False
    for tok, col in args[1:]:
        if tok == ":":
            if after_colon:
                raise _syntax("repeated ':' in cp", lineno, col)
            after_colon = True
        elif after_colon:
            targets.append(_parse_qubit(tok, n_qubits, lineno, col))
        else:
            if tok[:1] not in "+-" or len(tok) < 2:
                raise _syntax(f"cp control needs an explicit sign, got {tok!r}", lineno, col)
            controls.append(SignedControl(_parse_qubit(tok[1:], n_qubits, lineno, col), tok[0] == "+"))
    qubits = [c.qubit for c in controls] + targets
    if len(set(qubits)) != len(qubits):
        raise _syntax("duplicate qubit in cp gate", lineno, hcol)
    return Gate(GateKind.CP, tuple(targets), angle, tuple(controls))


def format_angle(x: float) -> str:
    """Shortest decimal that round-trips to the same double."""
    return repr(float(x))


def _format_gate(g: Gate) -> str:
    if g.kind is GateKind.CP:
        parts = ["cp", format_angle(g.angle)]
        parts += [str(c) for c in g.controls]
        if g.targets:
            parts.append(":")
            parts += [str(q) for q in g.targets]
        return " ".join(parts)
    parts = [g.kind.value] + [str(q) for q in g.targets]
    if g.angle is not None:
        parts.append(format_angle(g.angle))
    return " ".join(parts)


def serialize_circuit(c: Circuit) -> str:
    lines = [f"qubits {c.n_qubits}"]
    if c.output_qubit is not None:
        lines.append(f"output {c.output_qubit}")
    if c.ancilla_count is not None:
        lines.append(f"ancillas {c.ancilla_count}")
    lines += [_format_gate(g) for g in c.gates]
    return "\n".join(lines) + "\n"


# -- structural transforms ---------------------------------------------------

def inverse(c: Circuit) -> Circuit:
    return c.with_gates(g.dagger() for g in reversed(c.gates))


def concat(a: Circuit, b: Circuit) -> Circuit:
    """``a`` then ``b``; implements ``U_b @ U_a``.  Annotations come from ``a`` when set."""
    if a.n_qubits != b.n_qubits:
        raise CircuitError(f"qubit-count mismatch: {a.n_qubits} vs {b.n_qubits}")
    return Circuit(
        a.n_qubits,
        a.gates + b.gates,
        a.output_qubit if a.output_qubit is not None else b.output_qubit,
        a.ancilla_count if a.ancilla_count is not None else b.ancilla_count,
    )


def power(c: Circuit, k: int) -> Circuit:
    if k < 0:
        return power(inverse(c), -k)
    return c.with_gates(c.gates * k)


def embed(c: Circuit, n_total: int, qubit_map: Sequence[int] | Mapping[int, int]) -> Circuit:
    """Place ``c`` on ``n_total`` qubits, sending qubit ``q`` to ``qubit_map[q]``."""
    if n_total < c.n_qubits:
        raise CircuitError("target register smaller than circuit")
    images = [qubit_map[q] for q in range(c.n_qubits)]
    if len(set(images)) != len(images):
        raise CircuitError("qubit map is not injective")
    if any(not 0 <= q < n_total for q in images):
        raise CircuitError("qubit map leaves the target register")
    identity = n_total == c.n_qubits and images == list(range(n_total))
    return Circuit(
        n_total,
        tuple(g.remap(images) for g in c.gates),
        None if c.output_qubit is None else images[c.output_qubit],
        c.ancilla_count if identity else None,
    )


def _controlled_gate(g: Gate, ctl: int) -> list[Gate]:
    """Exact controlled version of one gate, using only the IR alphabet."""
    k = g.kind
    on = (ctl, True)
    if k is GateKind.ID:
        return []
    if k is GateKind.CP:
        return [Gate(k, g.targets, g.angle, g.controls + (SignedControl(ctl, True),))]
    if k in (GateKind.Z, GateKind.S, GateKind.SDG, GateKind.T, GateKind.TDG):
        phase = {GateKind.Z: math.pi, GateKind.S: math.pi / 2, GateKind.SDG: -math.pi / 2,
                 GateKind.T: math.pi / 4, GateKind.TDG: -math.pi / 4}[k]
        return [cp(phase, [on], g.targets)]
    t = g.targets[0]
    if k is GateKind.X:
        return [gate("cx", ctl, t)]
    if k is GateKind.Y:
        return [gate("sdg", t), gate("cx", ctl, t), gate("s", t)]
    if k in (GateKind.RY, GateKind.RZ):
        half = g.angle / 2
        return [Gate(k, (t,), half), gate("cx", ctl, t), Gate(k, (t,), -half), gate("cx", ctl, t)]
    if k is GateKind.RX:
        return [gate("h", t)] + _controlled_gate(gate("rz", t, angle=g.angle), ctl) + [gate("h", t)]
    if k is GateKind.H:
        # H = X . RY(pi/2)
        return _controlled_gate(gate("ry", t, angle=math.pi / 2), ctl) + [gate("cx", ctl, t)]
    a, b = g.targets
    if k is GateKind.CZ:
        return [cp(math.pi, [on], (a, b))]
    if k is GateKind.CX:
        return [gate("h", b), cp(math.pi, [on], (a, b)), gate("h", b)]
    # controlled swap: CX(b,a) . Toffoli(ctl, a -> b) . CX(b,a)
    return [gate("cx", b, a)] + _controlled_gate(gate("cx", a, b), ctl) + [gate("cx", b, a)]


def controlled(c: Circuit, control: int) -> Circuit:
    """Circuit implementing |0><0| (x) 1 + |1><1| (x) U_c with ``control`` as the control qubit.

    ``control`` must be a qubit of ``c`` that no gate touches.
    """
    if not 0 <= control < c.n_qubits:
        raise CircuitError("control qubit out of range")
    if any(control in g.qubits for g in c.gates):
        raise CircuitError("control qubit is acted on by the circuit")
    out: list[Gate] = []
    for g in c.gates:
        out.extend(_controlled_gate(g, control))
    return c.with_gates(out)


def random_circuit(n_qubits: int, n_gates: int, rng: np.random.Generator) -> Circuit:
    """Random circuit over the full alphabet; used by tests and fuzz sweeps."""
    kinds = [k for k in GateKind if (k.arity or 1) <= n_qubits]
    gates = []
    for _ in range(n_gates):
        kind = kinds[rng.integers(len(kinds))]
        angle = float(rng.uniform(-math.pi, math.pi)) if kind.has_angle else None
        if kind is GateKind.CP:
            k = int(rng.integers(0, min(n_qubits, 3) + 1))
            qs = rng.choice(n_qubits, size=k, replace=False)
            n_ctl = int(rng.integers(0, k + 1))
            ctls = tuple(SignedControl(int(q), bool(rng.integers(2))) for q in qs[:n_ctl])
            gates.append(Gate(kind, tuple(int(q) for q in qs[n_ctl:]), angle, ctls))
        else:
            qs = rng.choice(n_qubits, size=kind.arity, replace=False)
            gates.append(Gate(kind, tuple(int(q) for q in qs), angle))
    return Circuit(n_qubits, tuple(gates))
