"""Pairing-model Hamiltonian in qubit form, with exact-diagonalization oracles.

The model on N qubits is

    H = sum_m eps_m/2 sigma_z^m  +  sum_{m<l} V_ml/2 (sigma_x^m sigma_x^l
                                                      + r sigma_y^m sigma_y^l)

with on-site energies eps (any self-couplings already absorbed), a symmetric
coupling matrix V with zero diagonal, and an anisotropy parameter r.  At
r = 1 the total excitation number (count of |1> bits) is conserved, which
enables sector-restricted spectra.

Qubit 0 is the most significant bit of the basis index, consistently with
the rest of the package.  Time evolution is exp(-iHt).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CouplingMatrix",
    "BCSModel",
    "SpectrumResult",
    "SectorUnavailableError",
    "hamiltonian_matrix",
    "exact_spectrum",
    "energy_gap",
    "exact_evolution",
    "trotter_error",
    "sector_indices",
    "spectrum_to_csv",
    "model_to_json",
    "model_from_json",
    "save_model",
    "load_model",
]

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)

DENSE_LIMIT = 14


class SectorUnavailableError(Exception):
    """Excitation sectors only exist at r = 1, where [H, sum sigma_z] = 0."""


@dataclass(frozen=True)
class CouplingMatrix:
    """Symmetric real N x N coupling matrix with zero diagonal."""

    n: int
    v: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        if v.shape != (self.n, self.n):
            raise ValueError(f"coupling matrix must be {self.n}x{self.n}")
        if np.max(np.abs(v - v.T)) > 1e-12:
            raise ValueError("coupling matrix must be symmetric")
        if np.max(np.abs(np.diag(v))) > 1e-12:
            raise ValueError("coupling matrix must have zero diagonal")
        object.__setattr__(self, "v", v)

    @classmethod
    def from_array(cls, v) -> "CouplingMatrix":
        v = np.asarray(v, dtype=float)
        return cls(v.shape[0], v)

    def scaled(self, factor: float) -> "CouplingMatrix":
        return CouplingMatrix(self.n, self.v * factor)

    def max_range(self) -> int:
        """Largest |m - l| with a nonzero coupling (0 for an empty matrix)."""
        idx = np.nonzero(self.v)
        return int(np.max(np.abs(idx[0] - idx[1]))) if idx[0].size else 0


@dataclass(frozen=True)
class BCSModel:
    n_modes: int
    n_excitations: int
    eps: np.ndarray
    v: CouplingMatrix
    r: float = 1.0

    def __post_init__(self):
        eps = np.asarray(self.eps, dtype=float)
        if eps.shape != (self.n_modes,):
            raise ValueError("eps must have one entry per mode")
        if not np.all(np.isfinite(eps)):
            raise ValueError("eps entries must be finite")
        if self.v.n != self.n_modes:
            raise ValueError("coupling matrix size must match the mode count")
        if not 0 <= self.n_excitations <= self.n_modes:
            raise ValueError("excitation count must lie in [0, N]")
        object.__setattr__(self, "eps", eps)


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sector: int | None = None
    basis_indices: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))


def _kron_chain(ops: list[np.ndarray]) -> np.ndarray:
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def _embed(op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    return _kron_chain([op if q == qubit else np.eye(2) for q in range(n)])


def hamiltonian_matrix(m: BCSModel) -> np.ndarray:
    """Dense 2^N x 2^N Hamiltonian assembled from Pauli terms."""
    n = m.n_modes
    if n > DENSE_LIMIT:
        raise ValueError(f"dense Hamiltonian limited to {DENSE_LIMIT} qubits")
    h = np.zeros((2**n, 2**n), dtype=complex)
    for q in range(n):
        h += 0.5 * m.eps[q] * _embed(_SZ, q, n)
    for a in range(n):
        for b in range(a + 1, n):
            if m.v.v[a, b] == 0.0:
                continue
            xx = _embed(_SX, a, n) @ _embed(_SX, b, n)
            yy = _embed(_SY, a, n) @ _embed(_SY, b, n)
            h += 0.5 * m.v.v[a, b] * (xx + m.r * yy)
    return h


def sector_indices(n: int, excitations: int) -> np.ndarray:
    """Basis indices whose bit count equals the excitation number."""
    return np.array([i for i in range(2**n) if bin(i).count("1") == excitations])


def exact_spectrum(m: BCSModel, sector: int | None = None) -> SpectrumResult:
    """Full or excitation-sector spectrum by dense diagonalization."""
    h = hamiltonian_matrix(m)
    if sector is None:
        w, vecs = np.linalg.eigh(h)
        return SpectrumResult(w, vecs, None, np.arange(2**m.n_modes))
    if abs(m.r - 1.0) > 1e-12:
        raise SectorUnavailableError("excitation sectors require r = 1")
    idx = sector_indices(m.n_modes, sector)
    w, vecs = np.linalg.eigh(h[np.ix_(idx, idx)])
    return SpectrumResult(w, vecs, sector, idx)


def energy_gap(m: BCSModel, sector: int | None = None) -> float:
    """E1 - E0 of the (optionally sector-restricted) spectrum."""
    w = exact_spectrum(m, sector).eigenvalues
    if len(w) < 2:
        raise ValueError("spectrum has fewer than two levels")
    return float(w[1] - w[0])


def exact_evolution(m: BCSModel, t: float) -> np.ndarray:
    """exp(-iHt) through the eigendecomposition."""
    if m.n_modes > 10:
        raise ValueError("exact evolution limited to 10 qubits")
    h = hamiltonian_matrix(m)
    w, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * w * t)) @ vecs.conj().T


def trotter_error(m: BCSModel, t: float, steps: int, order: int = 2) -> float:
    """Spectral-norm distance between the compiled product formula and exp(-iHt).

    The compiled step comes from the sequence builders and is reconstructed
    with effective_unitary, so this measures the full pipeline, not just the
    abstract splitting.
    """
    if m.n_modes > 8:
        raise ValueError("trotter_error limited to 8 qubits")
    if steps < 1:
        raise ValueError("need at least one step")
    from .builders import build_trotter_step
    from .sequence import effective_unitary

    seq = build_trotter_step(m, t / steps, order=order)
    u_step = effective_unitary(seq, m.n_modes)
    u = np.linalg.matrix_power(u_step, steps)
    return float(np.linalg.norm(u - exact_evolution(m, t), 2))


# ---------------------------------------------------------------------------
# Model JSON and spectrum CSV
# ---------------------------------------------------------------------------

def spectrum_to_csv(spec: SpectrumResult) -> str:
    lines = ["index,eigenvalue"]
    lines += [f"{i},{float(w)!r}" for i, w in enumerate(spec.eigenvalues)]
    return "\n".join(lines) + "\n"


def model_to_json(m: BCSModel) -> dict:
    return {
        "N": m.n_modes,
        "n": m.n_excitations,
        "eps": [float(e) for e in m.eps],
        "V": [[float(x) for x in row] for row in m.v.v],
        "r": float(m.r),
    }


def model_from_json(doc: dict) -> BCSModel:
    n = int(doc["N"])
    return BCSModel(
        n_modes=n,
        n_excitations=int(doc["n"]),
        eps=np.array(doc["eps"], dtype=float),
        v=CouplingMatrix(n, np.array(doc["V"], dtype=float)),
        r=float(doc.get("r", 1.0)),
    )


def save_model(m: BCSModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_json(m), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_model(path) -> BCSModel:
    with open(path) as fh:
        return model_from_json(json.load(fh))
