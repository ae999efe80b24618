"""Exact simulation of a qubit register coupled to a continuous-variable bus.

The joint state is stored as a weighted sum of branches

    |psi> = sum_b  c_b |b> (x) |alpha_b>

where |b> is a computational basis string over the qubits and |alpha_b> is a
coherent state of the bus.  Controlled displacements D(beta * sigma_z) map
coherent states to coherent states, so this representation is closed under
the full bus gate set and the simulation is exact (no Fock truncation).

Conventions
-----------
* Qubit 0 is the most significant bit of a basis string ("10" means qubit 0
  is in |1>).
* sigma_z eigenvalue is +1 for bit '0' and -1 for bit '1'.
* A displacement D(beta) acting on |alpha> gives
  exp((beta*conj(alpha) - conj(beta)*alpha)/2) |alpha + beta>,
  i.e. the branch picks up the phase Im(beta * conj(alpha)).
* Real beta displaces the position quadrature, imaginary beta the momentum
  quadrature.  Displacements on the same quadrature commute and produce no
  phase; orthogonal quadratures generate the qubit-qubit phases.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BranchTerm",
    "HybridState",
    "DiagonalEffect",
    "EntangledBusError",
    "init_state",
    "state_from_vector",
    "apply_displacement",
    "apply_local",
    "inner_product",
    "norm",
    "is_bus_disentangled",
    "extract_qubit_vector",
    "merge_branches",
    "coherent_overlap",
    "to_debug_json",
]

MERGE_TOL = 1e-12        # alpha equality tolerance when merging branches
COEFF_DROP_TOL = 1e-14   # branches below this weight are discarded
DISENTANGLE_TOL = 1e-9   # default tolerance for bus-disentanglement checks


class EntangledBusError(Exception):
    """Raised when an operation requires a disentangled bus and the bus is not."""


@dataclass
class BranchTerm:
    """One term c |basis> (x) |alpha> of a hybrid state."""

    basis: str
    alpha: complex
    coeff: complex


@dataclass
class HybridState:
    """Qubit register plus bus, as a list of coherent-state branches."""

    num_qubits: int
    branches: list[BranchTerm] = field(default_factory=list)

    def norm(self) -> float:
        return norm(self)

    def copy(self) -> "HybridState":
        return HybridState(
            self.num_qubits,
            [BranchTerm(b.basis, b.alpha, b.coeff) for b in self.branches],
        )


def init_state(n: int, basis: str) -> HybridState:
    """Product state |basis> (x) |vacuum>."""
    if n <= 0:
        raise ValueError(f"need a positive qubit count, got {n}")
    if len(basis) != n or any(c not in "01" for c in basis):
        raise ValueError(f"basis string {basis!r} does not describe {n} qubits")
    return HybridState(n, [BranchTerm(basis, 0j, 1.0 + 0j)])


def state_from_vector(vec: np.ndarray, num_qubits: int) -> HybridState:
    """Qubit state from a 2^n amplitude vector, bus in vacuum."""
    vec = np.asarray(vec, dtype=complex)
    if vec.shape != (2**num_qubits,):
        raise ValueError(f"expected a vector of length {2**num_qubits}")
    branches = [
        BranchTerm(format(i, f"0{num_qubits}b"), 0j, complex(a))
        for i, a in enumerate(vec)
        if abs(a) > COEFF_DROP_TOL
    ]
    return HybridState(num_qubits, branches)


def coherent_overlap(a: complex, b: complex) -> complex:
    """<a|b> = exp(-|a|^2/2 - |b|^2/2 + conj(a) b)."""
    return np.exp(-0.5 * abs(a) ** 2 - 0.5 * abs(b) ** 2 + np.conj(a) * b)


def _sign(basis: str, qubit: int) -> int:
    return 1 if basis[qubit] == "0" else -1


def apply_displacement(s: HybridState, qubit: int, beta: complex) -> HybridState:
    """Controlled displacement D(beta * sigma_z) on the given qubit.

    Branches with the qubit in |0> are displaced by +beta, branches with the
    qubit in |1> by -beta; each picks up the phase Im(s*beta*conj(alpha)).
    """
    if not 0 <= qubit < s.num_qubits:
        raise IndexError(f"qubit {qubit} out of range for {s.num_qubits} qubits")
    beta = complex(beta)
    if not np.isfinite(beta.real) or not np.isfinite(beta.imag):
        raise ValueError("displacement amplitude must be finite")
    out = []
    for br in s.branches:
        d = _sign(br.basis, qubit) * beta
        phase = np.exp(1j * (d * np.conj(br.alpha)).imag)
        out.append(BranchTerm(br.basis, br.alpha + d, br.coeff * phase))
    return HybridState(s.num_qubits, out)


def _check_unitary(u: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError("local unitaries must be 2x2")
    if np.max(np.abs(u.conj().T @ u - np.eye(2))) > tol:
        raise ValueError("matrix is not unitary within 1e-12")
    return u


def apply_local(s: HybridState, qubit: int, u: np.ndarray) -> HybridState:
    """Local 2x2 unitary on one qubit; branches split and are re-merged."""
    if not 0 <= qubit < s.num_qubits:
        raise IndexError(f"qubit {qubit} out of range for {s.num_qubits} qubits")
    u = _check_unitary(u)
    out = []
    for br in s.branches:
        bit = int(br.basis[qubit])
        for new_bit in (0, 1):
            amp = u[new_bit, bit]
            if abs(amp) <= COEFF_DROP_TOL:
                continue
            basis = br.basis[:qubit] + str(new_bit) + br.basis[qubit + 1 :]
            out.append(BranchTerm(basis, br.alpha, br.coeff * amp))
    return merge_branches(HybridState(s.num_qubits, out), MERGE_TOL)


def inner_product(s1: HybridState, s2: HybridState) -> complex:
    """<s1|s2> using coherent overlaps between branches with equal basis."""
    if s1.num_qubits != s2.num_qubits:
        raise ValueError("states have different register sizes")
    by_basis: dict[str, list[BranchTerm]] = {}
    for br in s2.branches:
        by_basis.setdefault(br.basis, []).append(br)
    total = 0j
    for b1 in s1.branches:
        for b2 in by_basis.get(b1.basis, ()):
            total += np.conj(b1.coeff) * b2.coeff * coherent_overlap(b1.alpha, b2.alpha)
    return complex(total)


def norm(s: HybridState) -> float:
    return float(np.sqrt(max(inner_product(s, s).real, 0.0)))


def merge_branches(s: HybridState, tol: float = MERGE_TOL) -> HybridState:
    """Sum branches with equal basis and alpha within tol; drop null branches."""
    groups: dict[str, list[BranchTerm]] = {}
    for br in s.branches:
        groups.setdefault(br.basis, []).append(br)
    out = []
    for basis, terms in groups.items():
        clusters: list[BranchTerm] = []
        for t in sorted(terms, key=lambda b: (b.alpha.real, b.alpha.imag)):
            for c in clusters:
                if abs(t.alpha - c.alpha) <= tol:
                    c.coeff += t.coeff
                    break
            else:
                clusters.append(BranchTerm(basis, t.alpha, t.coeff))
        out.extend(c for c in clusters if abs(c.coeff) > COEFF_DROP_TOL)
    return HybridState(s.num_qubits, out)


def _common_alpha(s: HybridState) -> tuple[complex, float]:
    """Weighted mean bus amplitude and the largest branch deviation from it."""
    if not s.branches:
        return 0j, 0.0
    weights = np.array([abs(b.coeff) ** 2 for b in s.branches])
    alphas = np.array([b.alpha for b in s.branches])
    mean = complex(np.sum(weights * alphas) / np.sum(weights))
    dev = float(np.max(np.abs(alphas - mean)))
    return mean, dev


def is_bus_disentangled(s: HybridState, tol: float = DISENTANGLE_TOL) -> bool:
    """True iff every branch's bus amplitude lies within tol of a common value."""
    _, dev = _common_alpha(s)
    return dev <= tol


def extract_qubit_vector(s: HybridState, tol: float = DISENTANGLE_TOL) -> np.ndarray:
    """Qubit amplitudes once the bus factors out.

    The common bus factor is dropped and the global phase is fixed so the
    largest-magnitude amplitude is real positive; the result is normalized.
    Raises EntangledBusError when branch bus amplitudes disagree beyond tol.
    """
    vec = qubit_amplitudes(s, tol)
    vec = vec / np.linalg.norm(vec)
    k = int(np.argmax(np.abs(vec)))
    phase = vec[k] / abs(vec[k])
    return vec / phase


def qubit_amplitudes(s: HybridState, tol: float = DISENTANGLE_TOL) -> np.ndarray:
    """Raw qubit amplitudes (no phase fixing, no normalization).

    Valid only when the bus is disentangled: the joint state is then
    (sum_b c_b |b>) (x) |alpha_common> and the c_b are returned as given,
    so relative phases between basis states are preserved.
    """
    if not is_bus_disentangled(s, tol):
        raise EntangledBusError("bus is still entangled with the register")
    vec = np.zeros(2**s.num_qubits, dtype=complex)
    for br in s.branches:
        vec[int(br.basis, 2)] += br.coeff
    return vec


@dataclass
class DiagonalEffect:
    """Closed-form effect of a displacement-only sequence.

    phase_per_basis[b] is the accumulated phase (radians) on basis string b;
    residual_alpha_per_basis[b] is the bus amplitude left behind.
    """

    phase_per_basis: dict[str, float]
    residual_alpha_per_basis: dict[str, complex]


def diagonal_fast_path(instructions, n: int) -> DiagonalEffect:
    """Compose displacement-only instructions analytically for all 2^n bases.

    Two displacements compose as D(a)D(b) = exp((a conj(b) - conj(a) b)/2)
    D(a+b), so the phase on a basis with signs s_j is
    sum over ordered pairs j<k of Im(beta_k s_k conj(beta_j s_j)) and the
    residual amplitude is sum_j s_j beta_j.
    """
    from .sequence import Displace  # local import to avoid a module cycle

    betas = []
    qubits = []
    for ins in instructions:
        if not isinstance(ins, Displace):
            raise ValueError("diagonal_fast_path accepts displacement instructions only")
        betas.append(complex(ins.beta))
        qubits.append(ins.qubit)

    dim = 2**n
    idx = np.arange(dim)
    phases = np.zeros(dim)
    residual = np.zeros(dim, dtype=complex)
    for beta, q in zip(betas, qubits):
        signs = 1.0 - 2.0 * ((idx >> (n - 1 - q)) & 1)
        step = signs * beta
        phases += (step * np.conj(residual)).imag
        residual += step

    keys = [format(i, f"0{n}b") for i in range(dim)]
    return DiagonalEffect(
        phase_per_basis={k: float(p) for k, p in zip(keys, phases)},
        residual_alpha_per_basis={k: complex(r) for k, r in zip(keys, residual)},
    )


def to_debug_json(s: HybridState) -> dict:
    """JSON-friendly dump of a hybrid state."""
    return {
        "num_qubits": s.num_qubits,
        "branches": [
            {
                "basis": b.basis,
                "alpha": [b.alpha.real, b.alpha.imag],
                "coeff": [b.coeff.real, b.coeff.imag],
            }
            for b in s.branches
        ],
    }
