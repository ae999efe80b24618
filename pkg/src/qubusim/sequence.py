"""Compilation IR for bus circuits: instructions, sequences, execution.

A GateSequence is an ordered list of three instruction kinds:

* Displace(qubit, beta): one controlled displacement D(beta * sigma_z) of the
  bus, the unit of cost in every operation count.
* Local(qubit, u, label): an arbitrary 2x2 unitary on one qubit.
* Barrier(label): structural marker, carries no semantics and no cost.

The executor folds a sequence through the hybrid-state simulator, and
effective_unitary reconstructs the compiled qubit unitary column by column.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .hybrid import (
    EntangledBusError,
    HybridState,
    _check_unitary,
    apply_displacement,
    apply_local,
    init_state,
    merge_branches,
    qubit_amplitudes,
)

__all__ = [
    "Displace",
    "Local",
    "Barrier",
    "GateSequence",
    "EntangledBusWarning",
    "count_ops",
    "execute",
    "effective_unitary",
    "sequence_to_json",
    "sequence_from_json",
    "save_sequence",
    "load_sequence",
]

SEQUENCE_FORMAT_VERSION = 1


class EntangledBusWarning(RuntimeWarning):
    """A local unitary was applied to a qubit currently entangled with the bus."""


@dataclass(frozen=True)
class Displace:
    qubit: int
    beta: complex


@dataclass(frozen=True, eq=False)
class Local:
    qubit: int
    u: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "u", _check_unitary(self.u))


@dataclass(frozen=True)
class Barrier:
    label: str = ""


Instruction = Displace | Local | Barrier


@dataclass
class GateSequence:
    """Ordered instruction list over a fixed-size register."""

    num_qubits: int
    instructions: list[Instruction] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for ins in self.instructions:
            q = getattr(ins, "qubit", None)
            if q is not None and not 0 <= q < self.num_qubits:
                raise ValueError(f"instruction qubit {q} out of range")
        declared = self.metadata.get("bus_ops")
        if declared is not None and declared != count_ops(self)["bus"]:
            raise ValueError("declared bus-operation count disagrees with instructions")

    def extend(self, other: "GateSequence") -> None:
        if other.num_qubits != self.num_qubits:
            raise ValueError("register sizes differ")
        self.instructions.extend(other.instructions)


def count_ops(seq: GateSequence) -> dict:
    """{'bus': #Displace, 'local': #Local, 'total': sum}; barriers are free."""
    bus = sum(1 for i in seq.instructions if isinstance(i, Displace))
    local = sum(1 for i in seq.instructions if isinstance(i, Local))
    return {"bus": bus, "local": local, "total": bus + local}


def _local_is_clean(state: HybridState, qubit: int, tol: float = 1e-9) -> bool:
    """True when the bus amplitude does not depend on the qubit's bit value."""
    seen: dict[str, complex] = {}
    for br in state.branches:
        key = br.basis[:qubit] + "_" + br.basis[qubit + 1 :]
        if key in seen:
            if abs(seen[key] - br.alpha) > tol:
                return False
        else:
            seen[key] = br.alpha
    return True


def execute(seq: GateSequence, state: HybridState) -> HybridState:
    """Fold a sequence through the branch simulator.

    Emits EntangledBusWarning when a local unitary hits a qubit whose bit is
    correlated with the bus amplitude (branch count can then grow); compiled
    sequences produced by the builders never do this.
    """
    if seq.num_qubits != state.num_qubits:
        raise ValueError("sequence and state register sizes differ")
    for ins in seq.instructions:
        if isinstance(ins, Displace):
            state = apply_displacement(state, ins.qubit, ins.beta)
        elif isinstance(ins, Local):
            if not _local_is_clean(state, ins.qubit):
                warnings.warn(
                    f"local unitary on qubit {ins.qubit} while entangled with the bus",
                    EntangledBusWarning,
                    stacklevel=2,
                )
            state = apply_local(state, ins.qubit, ins.u)
        # barriers are inert
    return merge_branches(state)


def effective_unitary(seq: GateSequence, n: int | None = None, tol: float = 1e-9) -> np.ndarray:
    """Compiled qubit unitary, reconstructed one basis column at a time.

    Requires the sequence to leave the bus disentangled on every basis input
    and to return it to the same amplitude for all of them, so the register
    factors out with consistent relative phases.  Limited to n <= 10.
    """
    if n is None:
        n = seq.num_qubits
    if n != seq.num_qubits:
        raise ValueError("n must equal the sequence register size")
    if n > 10:
        raise ValueError("effective_unitary supports at most 10 qubits")
    dim = 2**n
    u = np.zeros((dim, dim), dtype=complex)
    residuals = []
    for j in range(dim):
        out = execute(seq, init_state(n, format(j, f"0{n}b")))
        u[:, j] = qubit_amplitudes(out, tol)
        residuals.append(out.branches[0].alpha if out.branches else 0j)
    if max(abs(r - residuals[0]) for r in residuals) > tol:
        raise EntangledBusError("residual bus amplitude depends on the input basis state")
    if np.max(np.abs(u.conj().T @ u - np.eye(dim))) > 1e-9:
        raise EntangledBusError("reconstructed matrix is not unitary; bus leakage suspected")
    return u


# ---------------------------------------------------------------------------
# Sequence JSON interchange
# ---------------------------------------------------------------------------

def _complex_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def sequence_to_json(seq: GateSequence) -> dict:
    """Fixed interchange schema; counts always match the instruction list."""
    body = []
    for ins in seq.instructions:
        if isinstance(ins, Displace):
            body.append({"op": "disp", "q": ins.qubit, "beta": _complex_pair(ins.beta)})
        elif isinstance(ins, Local):
            body.append(
                {
                    "op": "local",
                    "q": ins.qubit,
                    "u": [[_complex_pair(ins.u[r, c]) for c in range(2)] for r in range(2)],
                    "label": ins.label,
                }
            )
        else:
            body.append({"op": "barrier", "label": ins.label})
    counts = count_ops(seq)
    return {
        "version": SEQUENCE_FORMAT_VERSION,
        "num_qubits": seq.num_qubits,
        "strategy": seq.metadata.get("strategy", ""),
        "instructions": body,
        "counts": {"bus": counts["bus"], "local": counts["local"]},
    }


def sequence_from_json(doc: dict) -> GateSequence:
    if doc.get("version") != SEQUENCE_FORMAT_VERSION:
        raise ValueError("unsupported sequence format version")
    instructions: list[Instruction] = []
    for item in doc["instructions"]:
        op = item["op"]
        if op == "disp":
            instructions.append(Displace(int(item["q"]), complex(*item["beta"])))
        elif op == "local":
            u = np.array(
                [[complex(*item["u"][r][c]) for c in range(2)] for r in range(2)]
            )
            instructions.append(Local(int(item["q"]), u, item.get("label", "")))
        elif op == "barrier":
            instructions.append(Barrier(item.get("label", "")))
        else:
            raise ValueError(f"unknown instruction kind {op!r}")
    seq = GateSequence(int(doc["num_qubits"]), instructions, {"strategy": doc.get("strategy", "")})
    counts = count_ops(seq)
    declared = doc.get("counts", {})
    if declared and (declared.get("bus") != counts["bus"] or declared.get("local") != counts["local"]):
        raise ValueError("declared counts do not match the instruction list")
    seq.metadata["bus_ops"] = counts["bus"]
    return seq


def save_sequence(seq: GateSequence, path) -> None:
    with open(path, "w") as fh:
        json.dump(sequence_to_json(seq), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_sequence(path) -> GateSequence:
    with open(path) as fh:
        return sequence_from_json(json.load(fh))
