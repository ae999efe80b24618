"""Gate-sequence builders: every bus schedule the compiler knows how to emit.

Phase bookkeeping
-----------------
Displacements compose as D(a)D(b) = exp((a conj(b) - conj(a) b)/2) D(a+b),
so a closed loop of controlled displacements leaves the register with the
phase  sum over ordered pairs j<k of Im(beta_k s_k conj(beta_j s_j)).
For the canonical four-operation pattern

    D(a s_m), D(p s_l), D(-a s_m), D(-p s_l)

the net phase is 2 Im(p conj(a)) s_m s_l, i.e. exp(i c Z_m Z_l) with
c = 2 Im(p conj(a)); a and p must sit on orthogonal quadratures for the
phase to be nonzero.  All builders reduce to this identity.

Because the phase of a displacement loop is invariant under flipping every
sigma_z sign, bus sequences can only generate even functions of the signs
(constants and Z(x)Z couplings).  Phase corrections linear in a single Z
always require a local unitary; this shapes the CNOT gadget and the
controlled constructions below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bcs import BCSModel, CouplingMatrix
from .sequence import Barrier, Displace, GateSequence, Local, count_ops

__all__ = [
    "Naive",
    "Stepwise",
    "Carryover",
    "Limited",
    "FixedRange",
    "Strategy",
    "InfeasibleStrategyError",
    "NotProductFormError",
    "UnsatisfiableCarryoverError",
    "DEFAULT_BETA_BOUND",
    "build_cphase",
    "build_uzz",
    "solve_carryover",
    "CarryoverStep",
    "decompose_limited",
    "conjugate_to_axis",
    "build_u0",
    "build_cnot",
    "make_controlled",
    "make_controlled_locals",
    "build_trotter_step",
    "build_adiabatic_init",
    "adiabatic_steps",
    "build_qft",
    "QftMode",
    "dense_formula_count",
]

DEFAULT_BETA_BOUND = 8.0

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
# W maps Z to X (or Y) under conjugation: W Z W^dag = X / Y.
_W_AXIS = {
    "x": HADAMARD,
    "y": np.array([[1, 0], [0, 1j]], dtype=complex) @ HADAMARD,
}


class InfeasibleStrategyError(Exception):
    """The requested schedule cannot realize the given coupling matrix."""


class NotProductFormError(InfeasibleStrategyError):
    """Couplings lack the rank-one product structure the limited schedule needs."""


class UnsatisfiableCarryoverError(InfeasibleStrategyError):
    """No carryover chain exists for the coupling graph (not raised in practice:
    the planner restarts a fresh chain per connected component)."""


@dataclass(frozen=True)
class Naive:
    pass


@dataclass(frozen=True)
class Stepwise:
    pass


@dataclass(frozen=True)
class Carryover:
    pass


@dataclass(frozen=True)
class Limited:
    """Product-structured couplings V[m,l] = a[m] * b[l] on the upper triangle.

    Leave a and b unset to have them recovered from the matrix (the ratio
    consistency test is the feasibility contract)."""

    a: tuple | None = None
    b: tuple | None = None


@dataclass(frozen=True)
class FixedRange:
    p: int


Strategy = Naive | Stepwise | Carryover | Limited | FixedRange


def strategy_name(s: Strategy) -> str:
    return {
        Naive: "naive",
        Stepwise: "stepwise",
        Carryover: "carryover",
        Limited: "limited",
        FixedRange: "fixed-range",
    }[type(s)]


def dense_formula_count(s: Strategy, n: int) -> int:
    """Closed-form bus-operation count for fully dense couplings."""
    if isinstance(s, Naive):
        return 2 * n * n - 2 * n
    if isinstance(s, Stepwise):
        return n * n + n - 2
    if isinstance(s, Carryover):
        return n * n - n + 2
    if isinstance(s, Limited):
        return 4 * n - 4
    if isinstance(s, FixedRange):
        p = s.p
        return 2 * p * n - p * p - p + 2
    raise TypeError(f"unknown strategy {s!r}")


def _partner_amp(active: complex, phase_coeff: float) -> complex:
    """Partner amplitude p with 2 Im(p conj(active)) = phase_coeff.

    p sits on the quadrature orthogonal to the active amplitude."""
    return 1j * phase_coeff * active / (2.0 * abs(active) ** 2)


def _zrot(phi: float) -> np.ndarray:
    """diag(e^{-i phi}, e^{i phi}), the phase exp(-i phi Z)."""
    return np.diag([np.exp(-1j * phi), np.exp(1j * phi)])


# ---------------------------------------------------------------------------
# Two-qubit primitives
# ---------------------------------------------------------------------------

def build_cphase(q1: int, q2: int, theta: float, num_qubits: int | None = None) -> GateSequence:
    """Four displacements realizing exp(i theta Z_q1 Z_q2).

    The first quadrature amplitude is fixed at 1, the partner carries
    theta/2, so the product constraint 2 b1 b2 = theta holds.  The bus
    returns to its initial amplitude on every branch.
    """
    if q1 == q2:
        raise ValueError("phase gate needs two distinct qubits")
    n = num_qubits if num_qubits is not None else max(q1, q2) + 1
    b1 = -1.0 + 0j
    b2 = _partner_amp(b1, theta)
    ins = [
        Displace(q1, b1),
        Displace(q2, b2),
        Displace(q1, -b1),
        Displace(q2, -b2),
    ]
    return GateSequence(n, ins, {"strategy": "cphase", "theta": theta})


def build_cnot(control: int, target: int, num_qubits: int | None = None) -> GateSequence:
    """CNOT gadget in 4 displacements and 2 local unitaries.

    The geometric core exp(i pi/4 Z Z) is dressed with a Hadamard before and
    a phase-corrected Hadamard after on the target.  Constraint: a loop of
    controlled displacements cannot generate phases linear in a single Z, so
    the control's phase correction is unreachable within this budget and the
    output equals CNOT times diag(1, -i) on the control.  Basis states map
    per the CNOT truth table up to a per-input phase, and entangling power
    is exact; the paired-core constructions in make_controlled cancel the
    residual and are exact.
    """
    if control == target:
        raise ValueError("control and target must differ")
    n = num_qubits if num_qubits is not None else max(control, target) + 1
    corr = _zrot(math.pi / 4)  # exp(-i pi/4 Z)
    core_b = _partner_amp(1.0 + 0j, math.pi / 4)
    ins = [
        Local(target, HADAMARD, "h"),
        Displace(control, 1.0 + 0j),
        Displace(target, core_b),
        Displace(control, -1.0 + 0j),
        Displace(target, -core_b),
        Local(target, HADAMARD @ corr, "h+phase"),
    ]
    return GateSequence(n, ins, {"strategy": "cnot"})


# ---------------------------------------------------------------------------
# U_zz schedules
# ---------------------------------------------------------------------------

def _active_scale(coeffs: list[float], beta_bound: float) -> float:
    """Magnitude for the free active amplitude of one step.

    Defaults to 1; balances active against partners only when some partner
    would exceed the bound."""
    if not coeffs:
        return 1.0
    worst = max(abs(c) for c in coeffs) / 2.0  # partner magnitude at active=1 is |c|/2
    if worst <= beta_bound:
        return 1.0
    return math.sqrt(worst)


def _build_naive(v: CouplingMatrix, beta_bound: float) -> list:
    ins = []
    for m in range(v.n):
        for l in range(m + 1, v.n):
            if v.v[m, l] == 0.0:
                continue
            c = v.v[m, l] / 2.0
            x = _active_scale([c], beta_bound)
            p = _partner_amp(x, c)
            ins += [Displace(m, x), Displace(l, p), Displace(m, -x), Displace(l, -p)]
    return ins


def _build_stepwise(v: CouplingMatrix, beta_bound: float) -> list:
    """One disconnected cycle per qubit m, covering all pairs (m, l>m)."""
    ins = []
    for m in range(v.n - 1):
        partners = [l for l in range(m + 1, v.n) if v.v[m, l] != 0.0]
        if not partners:
            continue
        coeffs = [v.v[m, l] / 2.0 for l in partners]
        x = _active_scale(coeffs, beta_bound)
        amps = [_partner_amp(x, c) for c in coeffs]
        ins.append(Displace(m, x))
        ins += [Displace(l, p) for l, p in zip(partners, amps)]
        ins.append(Displace(m, -x))
        ins += [Displace(l, -p) for l, p in zip(partners, amps)]
    return ins


@dataclass
class CarryoverStep:
    """One step of the carryover chain.

    The active qubit is already attached to the bus (with active_beta) when
    the step begins, unless fresh is set; partners attach on the orthogonal
    quadrature, the carried partner stays attached for the next step.
    """

    active: int
    active_beta: complex
    partners: list[tuple[int, complex]]
    carried: int | None
    fresh: bool


def _carryover_plan(v: CouplingMatrix, start_amp: dict[int, float]) -> list[CarryoverStep]:
    n = v.n
    coupled = [q for q in range(n) if np.any(v.v[q] != 0.0)]
    unvisited = set(coupled)
    plan: list[CarryoverStep] = []
    active: int | None = None
    active_beta = 0j
    fresh = False
    while True:
        if active is None:
            starts = [q for q in coupled if q in unvisited
                      and any(v.v[q, l] != 0.0 for l in unvisited if l != q)]
            if not starts:
                break
            active = starts[0]
            unvisited.discard(active)
            active_beta = complex(start_amp.get(active, 1.0))
            fresh = True
        partners = [l for l in sorted(unvisited) if v.v[active, l] != 0.0]
        amps = [(l, _partner_amp(active_beta, v.v[active, l] / 2.0)) for l in partners]
        carried = partners[0] if partners else None
        plan.append(CarryoverStep(active, active_beta, amps, carried, fresh))
        fresh = False
        if carried is None:
            active = None
        else:
            unvisited.discard(carried)
            active_beta = dict(amps)[carried]
            active = carried
    return plan


def solve_carryover(v: CouplingMatrix, beta_bound: float = DEFAULT_BETA_BOUND) -> list[CarryoverStep]:
    """Plan the carryover schedule: per-step amplitudes and carried qubits.

    A chain visits qubits leaving one attached to the bus between steps;
    the carried amplitude is whatever realized its coupling in the previous
    step, so only the chain's starting amplitude is free.  Skipped zero
    couplings cost nothing, and a chain restarts (fresh attach) whenever the
    active qubit has no remaining partners, which handles disconnected
    coupling graphs; the ascending qubit order is kept otherwise.

    Within a chain every amplitude is proportional either to the start
    amplitude c or to 1/c (quadratures alternate), so when the default
    c = 1 would break the beta bound, c is rebalanced per chain.
    """
    plan = _carryover_plan(v, {})
    chains: list[dict] = []
    depth = 0
    for step in plan:
        if step.fresh:
            chains.append({"start": step.active, "even": [], "odd": []})
            depth = 0
        ch = chains[-1]
        ch["even" if depth % 2 == 0 else "odd"].append(abs(step.active_beta))
        ch["odd" if depth % 2 == 0 else "even"].extend(abs(p) for _, p in step.partners)
        depth += 1
    start_amp: dict[int, float] = {}
    for ch in chains:
        amps = ch["even"] + ch["odd"]
        if amps and max(amps) > beta_bound and ch["even"] and ch["odd"]:
            start_amp[ch["start"]] = math.sqrt(max(ch["odd"]) / max(ch["even"]))
    if start_amp:
        plan = _carryover_plan(v, start_amp)
    return plan


def _build_carryover(v: CouplingMatrix, beta_bound: float) -> list:
    ins = []
    for step in solve_carryover(v, beta_bound):
        if step.fresh:
            ins.append(Displace(step.active, step.active_beta))
        ins += [Displace(l, p) for l, p in step.partners]
        ins.append(Displace(step.active, -step.active_beta))
        ins += [Displace(l, -p) for l, p in step.partners if l != step.carried]
    return ins


def decompose_limited(v: CouplingMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Recover row/column constants with V[m,l] = a[m] b[l] for m < l.

    Feasibility is the ratio consistency test: V[m,l]/V[m,l'] must not
    depend on m wherever defined.  Constants are found by propagation over
    the nonzero entries and verified exactly (1e-12) on every pair,
    including required zeros.  Raises NotProductFormError on the first
    violated entry.
    """
    n = v.n
    a = np.zeros(n)
    b = np.zeros(n)
    assigned_a = np.zeros(n, dtype=bool)
    assigned_b = np.zeros(n, dtype=bool)
    edges: dict[int, list[int]] = {}
    for m in range(n - 1):
        for l in range(m + 1, n):
            if v.v[m, l] != 0.0:
                edges.setdefault(m, []).append(l)
                edges.setdefault(~l, []).append(m)  # ~l tags column nodes

    for root in range(n - 1):
        if root not in edges or assigned_a[root]:
            continue
        a[root] = 1.0
        assigned_a[root] = True
        frontier = [root]
        while frontier:
            node = frontier.pop()
            if node >= 0:
                for l in edges.get(node, ()):
                    if not assigned_b[l]:
                        b[l] = v.v[node, l] / a[node]
                        assigned_b[l] = True
                        frontier.append(~l)
            else:
                col = ~node
                for m in edges.get(node, ()):
                    if not assigned_a[m]:
                        a[m] = v.v[m, col] / b[col]
                        assigned_a[m] = True
                        frontier.append(m)

    for m in range(n - 1):
        for l in range(m + 1, n):
            want = v.v[m, l]
            got = a[m] * b[l]
            if abs(want - got) > 1e-12 * max(1.0, abs(want)):
                raise NotProductFormError(
                    f"couplings are not product-structured: V[{m},{l}]={want} "
                    f"but row/column constants give {got}"
                )
    # One global rescale keeps the two constant sets comparable in size.
    ma, mb = np.max(np.abs(a)), np.max(np.abs(b))
    if ma > 0 and mb > 0:
        c = math.sqrt(mb / ma)
        a, b = a * c, b / c
    return a, b


def _build_limited(v: CouplingMatrix, strategy: Limited, beta_bound: float) -> list:
    if strategy.a is not None and strategy.b is not None:
        a = np.asarray(strategy.a, dtype=float)
        b = np.asarray(strategy.b, dtype=float)
        if a.shape != (v.n,) or b.shape != (v.n,):
            raise InfeasibleStrategyError("limited constants must have one entry per qubit")
        for m in range(v.n - 1):
            for l in range(m + 1, v.n):
                if abs(v.v[m, l] - a[m] * b[l]) > 1e-12 * max(1.0, abs(v.v[m, l])):
                    raise NotProductFormError(
                        f"supplied constants do not reproduce V[{m},{l}]"
                    )
    else:
        a, b = decompose_limited(v)
    n = v.n
    # Pair phase is 2 u_l w_m with u on position, w on momentum; target is
    # V[m,l]/2 = a[m] b[l] / 2, so u_l = b[l]/2 and w_m = a[m]/2.
    u = b / 2.0
    w = a / 2.0
    ins = []
    for l in range(1, n):
        if u[l] != 0.0:
            ins.append(Displace(l, complex(u[l])))
    if w[0] != 0.0:
        ins.append(Displace(0, 1j * w[0]))
    for m in range(1, n - 1):
        if u[m] != 0.0:
            ins.append(Displace(m, complex(-u[m])))
        if w[m] != 0.0:
            ins.append(Displace(m, 1j * w[m]))
    if u[n - 1] != 0.0:
        ins.append(Displace(n - 1, complex(-u[n - 1])))
    for m in range(n - 1):
        if w[m] != 0.0:
            ins.append(Displace(m, -1j * w[m]))
    return ins


def build_uzz(v: CouplingMatrix, strategy: Strategy,
              beta_bound: float = DEFAULT_BETA_BOUND) -> GateSequence:
    """Compile exp(i sum_{m<l} V[m,l]/2 Z_m Z_l) under the chosen schedule.

    Dense coupling matrices hit the closed-form bus counts exactly:
    naive 2N^2-2N, stepwise N^2+N-2, carryover N^2-N+2, limited 4N-4,
    fixed-range 2pN-p^2-p+2.  Zero couplings are skipped and only ever
    lower the count.
    """
    if isinstance(strategy, Naive):
        ins = _build_naive(v, beta_bound)
    elif isinstance(strategy, Stepwise):
        ins = _build_stepwise(v, beta_bound)
    elif isinstance(strategy, Carryover):
        ins = _build_carryover(v, beta_bound)
    elif isinstance(strategy, Limited):
        ins = _build_limited(v, strategy, beta_bound)
    elif isinstance(strategy, FixedRange):
        p = strategy.p
        if not 1 <= p <= v.n - 1:
            raise InfeasibleStrategyError(f"interaction range must lie in [1, {v.n - 1}]")
        if v.max_range() > p:
            raise InfeasibleStrategyError(
                f"couplings reach beyond range {p}; found range {v.max_range()}"
            )
        ins = _build_carryover(v, beta_bound)
    else:
        raise TypeError(f"unknown strategy {strategy!r}")
    seq = GateSequence(v.n, ins)
    seq.metadata = {
        "strategy": strategy_name(strategy),
        "bus_ops": count_ops(seq)["bus"],
        "bus_ops_dense": dense_formula_count(strategy, v.n),
    }
    return seq


# ---------------------------------------------------------------------------
# Basis changes and local layers
# ---------------------------------------------------------------------------

def _is_diagonal_local(u: np.ndarray) -> bool:
    return abs(u[0, 1]) < 1e-12 and abs(u[1, 0]) < 1e-12


def conjugate_to_axis(seq: GateSequence, axis: str) -> GateSequence:
    """Turn a Z-diagonal sequence into its X(x)X or Y(x)Y analog.

    Adds one basis-change local per qubit on each side (2N locals); the
    inner sequence must be diagonal in the computational basis.
    """
    if axis not in _W_AXIS:
        raise ValueError("axis must be 'x' or 'y'")
    for ins in seq.instructions:
        if isinstance(ins, Local) and not _is_diagonal_local(ins.u):
            raise ValueError("sequence must implement a Z-diagonal effect")
    w = _W_AXIS[axis]
    n = seq.num_qubits
    pre = [Local(q, w.conj().T, f"to-{axis}") for q in range(n)]
    post = [Local(q, w, f"from-{axis}") for q in range(n)]
    return GateSequence(
        n,
        pre + list(seq.instructions) + post,
        dict(seq.metadata, axis=axis),
    )


def build_u0(eps: np.ndarray, tau: float, num_qubits: int | None = None) -> GateSequence:
    """N local z-rotations realizing exp(i sum_m eps_m tau/2 Z_m)."""
    eps = np.asarray(eps, dtype=float)
    n = num_qubits if num_qubits is not None else len(eps)
    ins = [
        Local(m, np.diag([np.exp(0.5j * eps[m] * tau), np.exp(-0.5j * eps[m] * tau)]), "rz")
        for m in range(len(eps))
    ]
    return GateSequence(n, ins, {"strategy": "u0"})


# ---------------------------------------------------------------------------
# Controlled constructions
# ---------------------------------------------------------------------------

def _cnot_gadget(ancilla: int, common: int, core_sign: int) -> list:
    """CNOT(ancilla -> common) up to the phase exp(-core_sign i pi/4 (1 - Z_a)).

    Two gadgets with opposite core signs compose to a residual-free pair:
    the ancilla phase corrections cancel, which is how every controlled
    builder stays exact without extra instructions.
    """
    p = _partner_amp(1.0 + 0j, core_sign * math.pi / 4)
    corr = _zrot(core_sign * math.pi / 4)
    return [
        Local(common, HADAMARD, "h"),
        Displace(ancilla, 1.0 + 0j),
        Displace(common, p),
        Displace(ancilla, -1.0 + 0j),
        Displace(common, -p),
        Local(common, HADAMARD @ corr, "h+phase"),
    ]


def _system_qubits(num_qubits: int, ancilla: int) -> list[int]:
    return [q for q in range(num_qubits) if q != ancilla]


def make_controlled(v: CouplingMatrix, ancilla: int = 0, axis: str = "z",
                    beta_bound: float = DEFAULT_BETA_BOUND) -> GateSequence:
    """Controlled version of the zz (or xx/yy) evolution, one ancilla qubit.

    Each disconnected cycle (qubit m against all higher partners) is run as
    two half-angle cycles sandwiched by CNOT gadgets on the cycle's common
    qubit: with the ancilla in |0> the halves cancel, with |1> the common
    qubit is flipped between them and the halves add up.  Dense couplings
    cost 2(N^2+7N-8) operations, or 2(N^2+8N-8) with an axis transform.
    """
    n_sys = v.n
    n = n_sys + 1
    if not 0 <= ancilla < n:
        raise ValueError(f"ancilla index {ancilla} infeasible for {n_sys} system qubits")
    sys_q = _system_qubits(n, ancilla)
    ins = []
    for m in range(n_sys - 1):
        partners = [l for l in range(m + 1, n_sys) if v.v[m, l] != 0.0]
        if not partners:
            continue
        common = sys_q[m]
        for half_sign, core_sign in ((1, 1), (-1, -1)):
            coeffs = [half_sign * v.v[m, l] / 4.0 for l in partners]
            x = _active_scale(coeffs, beta_bound)
            amps = [_partner_amp(x, c) for c in coeffs]
            ins.append(Displace(common, x))
            ins += [Displace(sys_q[l], p) for l, p in zip(partners, amps)]
            ins.append(Displace(common, -x))
            ins += [Displace(sys_q[l], -p) for l, p in zip(partners, amps)]
            ins += _cnot_gadget(ancilla, common, core_sign)
        ins.append(Barrier(f"cycle-{m}"))
    seq = GateSequence(n, ins, {"strategy": f"controlled-{axis}zz", "ancilla": ancilla})
    if axis == "z":
        return seq
    w = _W_AXIS[axis]
    pre = [Local(q, w.conj().T, f"to-{axis}") for q in sys_q]
    post = [Local(q, w, f"from-{axis}") for q in sys_q]
    return GateSequence(n, pre + seq.instructions + post, seq.metadata)


def _su2_split(u: np.ndarray) -> tuple[float, np.ndarray, float]:
    """u = e^{i delta} B diag(e^{i eta}, e^{-i eta}) B^dag with B unitary."""
    u = np.asarray(u, dtype=complex)
    det = np.linalg.det(u)
    delta = np.angle(det) / 2.0
    su = u * np.exp(-1j * delta)
    w, vecs = np.linalg.eig(su)
    # Order eigenvalues as e^{+i eta}, e^{-i eta}
    angles = np.angle(w)
    order = np.argsort(-angles)
    w, vecs = w[order], vecs[:, order]
    q, _ = np.linalg.qr(vecs)  # eigenvectors of a unitary can be orthonormalized
    eta = float(np.angle(w[0]))
    return delta, q, eta


def make_controlled_locals(us: list[np.ndarray], ancilla: int = 0,
                           beta_bound: float = DEFAULT_BETA_BOUND) -> GateSequence:
    """Controlled tensor product of N single-qubit unitaries in 8N+4 ops.

    Uses half-power locals between two bus fan-outs (the fan-out is every
    CNOT(ancilla -> m) merged into a single 2N+2-operation cycle); the two
    fan-outs carry opposite core signs so their ancilla corrections cancel.
    When the product of determinants is not 1 a single extra ancilla phase
    is appended (8N+5 operations) to keep the controlled action exact.
    """
    n_sys = len(us)
    if n_sys == 0:
        raise ValueError("need at least one local unitary")
    n = n_sys + 1
    if not 0 <= ancilla < n:
        raise ValueError(f"ancilla index {ancilla} infeasible for {n_sys} system qubits")
    sys_q = _system_qubits(n, ancilla)
    splits = [_su2_split(u) for u in us]

    p_corr = _zrot(math.pi / 4)
    q_corr = _zrot(-math.pi / 4)
    core_amp = _partner_amp(1.0 + 0j, math.pi / 4)

    layer1 = [
        Local(sys_q[m], HADAMARD @ _zrot(-eta / 2.0) @ basis.conj().T, "prep")
        for m, (_, basis, eta) in enumerate(splits)
    ]
    cycle1 = [Displace(ancilla, 1.0 + 0j)]
    cycle1 += [Displace(q, core_amp) for q in sys_q]
    cycle1.append(Displace(ancilla, -1.0 + 0j))
    cycle1 += [Displace(q, -core_amp) for q in sys_q]
    layer2 = [Local(q, HADAMARD @ p_corr, "h+phase") for q in sys_q]
    layer3 = [
        Local(sys_q[m], HADAMARD @ _zrot(eta / 2.0), "half-power")
        for m, (_, _, eta) in enumerate(splits)
    ]
    cycle2 = [Displace(ancilla, 1.0 + 0j)]
    cycle2 += [Displace(q, -core_amp) for q in sys_q]
    cycle2.append(Displace(ancilla, -1.0 + 0j))
    cycle2 += [Displace(q, core_amp) for q in sys_q]
    layer4 = [
        Local(sys_q[m], basis @ HADAMARD @ q_corr, "finish")
        for m, (_, basis, _) in enumerate(splits)
    ]
    ins = layer1 + cycle1 + layer2 + layer3 + cycle2 + layer4

    total_delta = sum(d for d, _, _ in splits)
    if abs(np.exp(1j * total_delta) - 1.0) > 1e-12:
        ins.append(Local(ancilla, np.diag([1.0, np.exp(1j * total_delta)]), "det-phase"))
    return GateSequence(n, ins, {"strategy": "controlled-locals", "ancilla": ancilla})


# ---------------------------------------------------------------------------
# Trotter steps and quasi-adiabatic initialization
# ---------------------------------------------------------------------------

def _evolution_factors(model: BCSModel, tau: float, order: int) -> list[tuple[str, float]]:
    """Factor list (kind, time) approximating exp(-iH tau)."""
    if order == 1:
        return [("u0", tau), ("xx", tau), ("yy", tau)]
    if order == 2:
        return [("u0", tau / 2), ("xx", tau / 2), ("yy", tau),
                ("xx", tau / 2), ("u0", tau / 2)]
    raise ValueError("order must be 1 or 2")


def build_trotter_step(model: BCSModel, tau: float, order: int = 2,
                       controlled: int | None = None,
                       strategy: Strategy = Carryover(),
                       coupling_scale: float = 1.0,
                       beta_bound: float = DEFAULT_BETA_BOUND) -> GateSequence:
    """One product-formula step for exp(-iH tau).

    Second order uses the symmetric splitting
    U0(tau/2) Uxx(tau/2) Uyy(tau) Uxx(tau/2) U0(tau/2), first order the plain
    product.  With `controlled` set to an ancilla index, the single-qubit
    factors go through make_controlled_locals and the coupling factors
    through make_controlled, on a register one qubit wider.
    coupling_scale multiplies the interaction part only (the adiabatic ramp).
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    n = model.n_modes
    num_qubits = n if controlled is None else n + 1

    def factor_seq(kind: str, t: float) -> GateSequence:
        if kind == "u0":
            if controlled is None:
                seq = build_u0(model.eps, -t, n)
                return seq
            us = [np.diag([np.exp(-0.5j * e * t), np.exp(0.5j * e * t)]) for e in model.eps]
            return make_controlled_locals(us, ancilla=controlled, beta_bound=beta_bound)
        scale = -t * coupling_scale * (model.r if kind == "yy" else 1.0)
        coupling = model.v.scaled(scale)
        axis = "x" if kind == "xx" else "y"
        if controlled is None:
            return conjugate_to_axis(build_uzz(coupling, strategy, beta_bound), axis)
        return make_controlled(coupling, ancilla=controlled, axis=axis, beta_bound=beta_bound)

    seq = GateSequence(num_qubits, [], {"strategy": f"trotter-{order}"})
    for kind, t in _evolution_factors(model, tau, order):
        seq.extend(factor_seq(kind, t))
    return seq


def adiabatic_steps(delta: float) -> int:
    """Step count for a target precision: pi / delta, as an integer."""
    if not 0 < delta < 1:
        raise ValueError("precision must lie in (0, 1)")
    return int(math.pi / delta)


def build_adiabatic_init(model: BCSModel, steps: int, tau: float,
                         ramp: str = "linear",
                         strategy: Strategy = Carryover(),
                         beta_bound: float = DEFAULT_BETA_BOUND) -> GateSequence:
    """Quasi-adiabatic ramp: S first-order steps with interactions scaled by c.

    c climbs from ~0 to 1 over the schedule (linear by default, cosine
    optional).  Run slowly enough this prepares the interacting ground
    state; run deliberately fast it leaves a ground/first-excited mixture
    whose phases feed the gap estimate.
    """
    if steps < 1:
        raise ValueError("need at least one step")
    ramps = {
        "linear": lambda s: s,
        "cosine": lambda s: 0.5 * (1.0 - math.cos(math.pi * s)),
    }
    if ramp not in ramps:
        raise ValueError(f"unknown ramp {ramp!r}")
    seq = GateSequence(model.n_modes, [], {"strategy": f"adiabatic-{ramp}", "steps": steps})
    for j in range(1, steps + 1):
        c = ramps[ramp](j / steps)
        seq.extend(build_trotter_step(model, tau, order=1, strategy=strategy,
                                      coupling_scale=c, beta_bound=beta_bound))
    per_step = count_ops(build_trotter_step(model, tau, order=1, strategy=strategy,
                                            beta_bound=beta_bound))
    seq.metadata["ops_per_step"] = per_step["total"]
    return seq


# ---------------------------------------------------------------------------
# Quantum Fourier transform on the bus
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QftMode:
    measurement_ready: bool = True
    forward: bool = True


def build_qft(k: int, mode: QftMode = QftMode(), beta_bound: float = DEFAULT_BETA_BOUND) -> GateSequence:
    """Fourier transform on k qubits with all controlled phases bus-mediated.

    Every two-qubit rotation is a pure ZZ exponential, so the whole ladder
    runs as one sweep: qubit 0 attaches to the position quadrature, the rest
    to momentum; each later qubit detaches, takes its accumulated diagonal
    correction and a Hadamard, and re-attaches on position.  4k-4 bus
    operations total.  The rotation angles fall off exponentially with qubit
    separation, which is exactly the product structure one sweep can carry.

    measurement_ready drops the k-1 diagonal corrections that sit after the
    Hadamards (invisible to Z-basis statistics), leaving 6k-5 operations;
    the full unitary keeps them (2k-2 corrections).  Output bit order is
    reversed relative to the textbook transform; readout is re-ordered
    classically, no swap network is emitted.
    """
    if k < 1:
        raise ValueError("need at least one qubit")
    sign = 1.0 if mode.forward else -1.0
    ins: list = [Local(0, HADAMARD, "h")]
    if k == 1:
        return GateSequence(1, ins, {"strategy": "qft", "k": 1})

    def theta(i: int, j: int) -> float:
        # Angle of the ZZ exponential between qubits i < j.
        return sign * math.pi / 2.0 ** (j - i + 2)

    # Separable amplitudes: theta(i,j) = pi/4 * 2^i 2^-j; the i >= 1 columns
    # carry a minus sign because their attach happens inside the partners'
    # bus windows in the opposite pattern order.
    c = math.sqrt(math.pi) / 4.0 * 2.0 ** (-(k - 2) / 2.0)
    x = [c * 2.0**i * (1.0 if i == 0 else -1.0) for i in range(k - 1)]
    y = [sign * math.pi / (8.0 * c) * 2.0**-j for j in range(k)]

    pre_corr = [sum(theta(i, j) for i in range(j)) for j in range(k)]
    post_corr = [sum(theta(i, j) for j in range(i + 1, k)) for i in range(k - 1)]

    ins.append(Displace(0, complex(x[0])))
    ins += [Displace(j, 1j * y[j]) for j in range(1, k)]
    ins.append(Displace(0, complex(-x[0])))
    for m in range(1, k):
        ins.append(Displace(m, -1j * y[m]))
        ins.append(Local(m, _zrot(pre_corr[m]), "corr"))
        ins.append(Local(m, HADAMARD, "h"))
        if m < k - 1:
            ins.append(Displace(m, complex(x[m])))
    ins += [Displace(m, complex(-x[m])) for m in range(1, k - 1)]
    if not mode.measurement_ready:
        ins += [Local(q, _zrot(post_corr[q]), "corr") for q in range(k - 1)]
    return GateSequence(k, ins, {"strategy": "qft", "k": k,
                                 "mode": "mr" if mode.measurement_ready else "full",
                                 "direction": "fwd" if mode.forward else "inv"})
