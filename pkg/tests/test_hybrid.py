"""Branch-simulator unit tests: state algebra, displacements, locals."""

import math

import numpy as np
import pytest

from qubusim.hybrid import (
    EntangledBusError,
    apply_displacement,
    apply_local,
    coherent_overlap,
    diagonal_fast_path,
    extract_qubit_vector,
    init_state,
    inner_product,
    is_bus_disentangled,
    merge_branches,
    norm,
    state_from_vector,
    to_debug_json,
)
from qubusim.sequence import Displace

from oracles import H2


def test_init_state_basics():
    s = init_state(2, "00")
    assert len(s.branches) == 1
    assert s.branches[0].coeff == 1.0
    assert s.branches[0].alpha == 0j

    s = init_state(1, "1")
    assert s.branches[0].basis == "1"
    assert abs(norm(s) - 1.0) < 1e-12

    s = init_state(3, "010")
    assert abs(norm(s) - 1.0) < 1e-12


def test_init_state_rejects_bad_basis():
    with pytest.raises(ValueError):
        init_state(2, "000")
    with pytest.raises(ValueError):
        init_state(2, "0x")
    with pytest.raises(ValueError):
        init_state(0, "")


def test_displacement_on_vacuum():
    s = apply_displacement(init_state(1, "0"), 0, 0.5)
    assert abs(s.branches[0].alpha - 0.5) < 1e-15
    assert abs(s.branches[0].coeff - 1.0) < 1e-15  # vacuum: no phase

    s = apply_displacement(init_state(1, "1"), 0, 0.5)
    assert abs(s.branches[0].alpha + 0.5) < 1e-15


def test_displacement_composition_rule():
    # D(a)D(b) = exp((a conj(b) - conj(a) b)/2) D(a+b) on a fixed branch,
    # checked for 1000 random pairs.
    rng = np.random.default_rng(11)
    for _ in range(1000):
        a = complex(rng.normal(), rng.normal())
        b = complex(rng.normal(), rng.normal())
        s = init_state(1, "0")
        s = apply_displacement(s, 0, b)
        s = apply_displacement(s, 0, a)
        direct = apply_displacement(init_state(1, "0"), 0, a + b)
        scalar = np.exp((a * np.conj(b) - np.conj(a) * b) / 2.0)
        got = s.branches[0]
        want_alpha = direct.branches[0].alpha
        assert abs(got.alpha - want_alpha) < 1e-12
        assert abs(got.coeff - scalar * direct.branches[0].coeff) < 1e-12


def test_same_quadrature_displacements_accumulate_no_phase():
    rng = np.random.default_rng(3)
    for _ in range(50):
        x1, x2 = rng.normal(size=2)
        s = init_state(1, "0")
        s = apply_displacement(s, 0, x1)
        s = apply_displacement(s, 0, x2)
        assert abs(s.branches[0].coeff.imag) < 1e-14
        assert s.branches[0].coeff.real > 0
        s = init_state(1, "1")
        s = apply_displacement(s, 0, 1j * x1)
        s = apply_displacement(s, 0, 1j * x2)
        assert abs(s.branches[0].coeff - 1.0) < 1e-14


def test_apply_local_identity_and_hadamard():
    s = init_state(2, "00")
    assert len(apply_local(s, 0, np.eye(2)).branches) == 1

    s = apply_local(init_state(1, "0"), 0, H2)
    assert len(s.branches) == 2
    assert abs(norm(s) - 1.0) < 1e-12
    # H twice returns to a single branch (cancellation removes the other)
    s = apply_local(s, 0, H2)
    assert len(s.branches) == 1
    assert s.branches[0].basis == "0"


def test_apply_local_rejects_non_unitary():
    with pytest.raises(ValueError):
        apply_local(init_state(1, "0"), 0, np.array([[1.0, 0.0], [0.0, 2.0]]))


def test_local_while_bus_entangled_preserves_norm():
    s = init_state(2, "00")
    s = apply_local(s, 0, H2)
    s = apply_displacement(s, 0, 0.7)       # bus now correlated with qubit 0
    s = apply_local(s, 0, H2)                # branch count may grow
    assert abs(norm(s) - 1.0) < 1e-10
    assert not is_bus_disentangled(s, 1e-9)


def test_inner_product_coherent_overlap():
    v = init_state(1, "0")
    assert abs(inner_product(v, v) - 1.0) < 1e-14
    d = apply_displacement(v, 0, 1.0)
    # <0|alpha=1> = exp(-1/2)
    assert abs(inner_product(v, d) - math.exp(-0.5)) < 1e-14
    assert abs(coherent_overlap(0, 1) - math.exp(-0.5)) < 1e-15


def test_inner_product_size_mismatch():
    with pytest.raises(ValueError):
        inner_product(init_state(1, "0"), init_state(2, "00"))


def test_merge_branches_sums_and_cancels():
    s = init_state(1, "0")
    s.branches.append(s.branches[0].__class__("0", 0j, 0.5 + 0j))
    s.branches[0].coeff = 0.5 + 0j
    merged = merge_branches(s)
    assert len(merged.branches) == 1
    assert abs(merged.branches[0].coeff - 1.0) < 1e-14

    s = init_state(1, "0")
    s.branches.append(s.branches[0].__class__("0", 0j, -1.0 + 0j))
    merged = merge_branches(s)
    assert merged.branches == []


def test_merge_preserves_inner_products():
    rng = np.random.default_rng(5)
    s = init_state(2, "00")
    s = apply_local(s, 0, H2)
    s = apply_displacement(s, 1, 0.3 + 0.2j)
    s = apply_local(s, 1, H2)
    probe = apply_displacement(init_state(2, "10"), 0, 0.1)
    before = inner_product(probe, s)
    after = inner_product(probe, merge_branches(s))
    assert abs(before - after) < 1e-12
    assert abs(norm(s) - norm(merge_branches(s))) < 1e-12


def test_extract_qubit_vector():
    vec = extract_qubit_vector(init_state(2, "01"))
    assert np.allclose(vec, [0, 1, 0, 0])

    entangled = apply_displacement(apply_local(init_state(1, "0"), 0, H2), 0, 1.0)
    with pytest.raises(EntangledBusError):
        extract_qubit_vector(entangled)


def test_extract_phase_convention():
    s = state_from_vector(np.array([0.6 * np.exp(0.3j), 0.8 * np.exp(0.3j)]), 1)
    vec = extract_qubit_vector(s)
    assert vec[1].imag == pytest.approx(0.0, abs=1e-12)
    assert vec[1].real > 0


def test_is_bus_disentangled_fresh_state():
    assert is_bus_disentangled(init_state(3, "010"))


def test_diagonal_fast_path_matches_branch_simulation():
    rng = np.random.default_rng(17)
    cases = [(3, 10)] * 20 + [(6, 14)] * 2
    for n, n_ops in cases:
        instrs = [Displace(int(rng.integers(n)), complex(rng.normal(), rng.normal()) * 0.4)
                  for _ in range(n_ops)]
        eff = diagonal_fast_path(instrs, n)
        for idx in range(2**n):
            basis = format(idx, f"0{n}b")
            s = init_state(n, basis)
            for ins in instrs:
                s = apply_displacement(s, ins.qubit, ins.beta)
            br = s.branches[0]
            assert abs(br.alpha - eff.residual_alpha_per_basis[basis]) < 1e-10
            got_phase = np.angle(br.coeff)
            want = eff.phase_per_basis[basis]
            assert abs(np.exp(1j * got_phase) - np.exp(1j * want)) < 1e-10


def test_diagonal_fast_path_empty_and_errors():
    eff = diagonal_fast_path([], 2)
    assert all(p == 0.0 for p in eff.phase_per_basis.values())
    assert all(r == 0j for r in eff.residual_alpha_per_basis.values())
    assert set(eff.phase_per_basis) == {"00", "01", "10", "11"}
    from qubusim.sequence import Local

    with pytest.raises(ValueError):
        diagonal_fast_path([Local(0, np.eye(2))], 1)


def test_debug_json_roundtrip_fields():
    s = apply_displacement(init_state(2, "10"), 0, 0.25 + 0.5j)
    doc = to_debug_json(s)
    assert doc["num_qubits"] == 2
    assert doc["branches"][0]["basis"] == "10"
    assert doc["branches"][0]["alpha"] == [-0.25, -0.5]
