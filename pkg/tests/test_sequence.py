"""IR mechanics: counting, execution diagnostics, JSON interchange."""

import numpy as np
import pytest

from qubusim.builders import Carryover, HADAMARD, build_cphase, build_uzz
from qubusim.bcs import CouplingMatrix
from qubusim.hybrid import init_state
from qubusim.sequence import (
    Barrier,
    Displace,
    EntangledBusWarning,
    GateSequence,
    Local,
    count_ops,
    effective_unitary,
    execute,
    load_sequence,
    save_sequence,
    sequence_from_json,
    sequence_to_json,
)

from oracles import random_dense_coupling


def test_count_ops_ignores_barriers():
    seq = GateSequence(2, [Displace(0, 0.1), Barrier("x"), Local(1, np.eye(2)),
                           Barrier(), Displace(1, 0.2j)])
    assert count_ops(seq) == {"bus": 2, "local": 1, "total": 3}
    assert count_ops(GateSequence(1, [])) == {"bus": 0, "local": 0, "total": 0}


def test_sequence_rejects_out_of_range_qubits():
    with pytest.raises(ValueError):
        GateSequence(1, [Displace(1, 0.5)])


def test_sequence_metadata_count_validation():
    with pytest.raises(ValueError):
        GateSequence(2, [Displace(0, 0.1)], {"bus_ops": 3})


def test_execute_identity_sequence():
    s = init_state(2, "10")
    out = execute(GateSequence(2, [Barrier(), Local(0, np.eye(2))]), s)
    assert out.branches[0].basis == "10"
    assert abs(out.branches[0].coeff - 1.0) < 1e-12


def test_execute_warns_on_entangled_local():
    seq = GateSequence(1, [Local(0, HADAMARD), Displace(0, 0.6), Local(0, HADAMARD)])
    with pytest.warns(EntangledBusWarning):
        execute(seq, init_state(1, "0"))


def test_compiled_sequences_execute_without_warnings(recwarn):
    rng = np.random.default_rng(211)
    cm = CouplingMatrix(3, random_dense_coupling(3, rng))
    seq = build_uzz(cm, Carryover())
    execute(seq, init_state(3, "101"))
    assert not [w for w in recwarn.list if issubclass(w.category, EntangledBusWarning)]


def test_effective_unitary_rejects_mismatched_size():
    with pytest.raises(ValueError):
        effective_unitary(build_cphase(0, 1, 0.2), 3)


def test_effective_unitary_entangled_bus_raises():
    from qubusim.hybrid import EntangledBusError

    seq = GateSequence(1, [Displace(0, 0.4)])
    with pytest.raises(EntangledBusError):
        effective_unitary(seq, 1)


def test_json_roundtrip(tmp_path):
    seq = build_cphase(0, 1, 0.37)
    seq.instructions.append(Local(1, HADAMARD, "h"))
    seq.instructions.append(Barrier("end"))
    path = tmp_path / "seq.json"
    save_sequence(seq, path)
    loaded = load_sequence(path)
    assert loaded.num_qubits == 2
    assert count_ops(loaded) == count_ops(seq)
    u1 = effective_unitary(seq, 2)
    u2 = effective_unitary(loaded, 2)
    assert np.max(np.abs(u1 - u2)) < 1e-12


def test_json_field_shapes():
    doc = sequence_to_json(build_cphase(0, 1, 0.5))
    assert doc["version"] == 1
    assert doc["counts"] == {"bus": 4, "local": 0}
    assert doc["instructions"][0]["op"] == "disp"
    assert isinstance(doc["instructions"][0]["beta"], list)


def test_json_count_validation_on_load():
    doc = sequence_to_json(build_cphase(0, 1, 0.5))
    doc["counts"]["bus"] = 3
    with pytest.raises(ValueError):
        sequence_from_json(doc)


def test_json_rejects_unknown_ops_and_versions():
    doc = sequence_to_json(build_cphase(0, 1, 0.5))
    doc["version"] = 2
    with pytest.raises(ValueError):
        sequence_from_json(doc)
    doc["version"] = 1
    doc["instructions"][0]["op"] = "squeeze"
    with pytest.raises(ValueError):
        sequence_from_json(doc)
