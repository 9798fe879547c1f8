"""Dense statevector engine.

States live in a flat complex128 array of 2**n amplitudes with qubit 0 as
the most significant bit of the amplitude index, so |q0 q1 ... q_{n-1}> sits
at index sum(q_i << (n-1-i)).  All gate and measurement operations mutate
the array in place through the kernel backend; randomness always comes from
an explicit numpy Generator so callers own reproducibility.
"""

from dataclasses import dataclass

import numpy as np

from .backend import kernels

MAX_QUBITS = 24

GATE_KINDS = {"H": 1, "X": 1, "Z": 1, "CZ": 2}

_FORCE_TOL = 1e-12


@dataclass(frozen=True)
class Gate:
    """One circuit operation: kind in {H, X, Z, CZ} plus target qubits."""

    kind: str
    targets: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        arity = GATE_KINDS[self.kind]
        if len(self.targets) != arity:
            raise ValueError(
                f"{self.kind} takes {arity} target(s), got {self.targets!r}"
            )
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"duplicate targets in {self.targets!r}")


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph; edges are normalized to (low, high) pairs."""

    vertex_count: int
    edges: frozenset

    @classmethod
    def from_edges(cls, vertex_count, edges):
        if vertex_count < 1:
            raise ValueError("graph needs at least one vertex")
        normalized = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise ValueError(f"edge ({u}, {v}) out of range")
            normalized.add((min(u, v), max(u, v)))
        return cls(vertex_count, frozenset(normalized))

    @classmethod
    def path(cls, vertex_count):
        return cls.from_edges(
            vertex_count, [(i, i + 1) for i in range(vertex_count - 1)]
        )


@dataclass
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))


def zero_state(num_qubits: int) -> StateVector:
    """|0...0> on num_qubits qubits."""
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ValueError(
            f"qubit count must be in [1, {MAX_QUBITS}], got {num_qubits}"
        )
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(num_qubits, amps)


def _check_qubit(state: StateVector, q: int):
    if not 0 <= q < state.num_qubits:
        raise ValueError(f"qubit {q} out of range for {state.num_qubits} qubits")


def apply_h(state: StateVector, q: int) -> StateVector:
    _check_qubit(state, q)
    kernels.apply_h(state.amplitudes, state.num_qubits, q)
    return state


def apply_x(state: StateVector, q: int) -> StateVector:
    _check_qubit(state, q)
    kernels.apply_x(state.amplitudes, state.num_qubits, q)
    return state


def apply_y(state: StateVector, q: int) -> StateVector:
    _check_qubit(state, q)
    kernels.apply_y(state.amplitudes, state.num_qubits, q)
    return state


def apply_z(state: StateVector, q: int) -> StateVector:
    _check_qubit(state, q)
    kernels.apply_z(state.amplitudes, state.num_qubits, q)
    return state


def apply_s(state: StateVector, q: int) -> StateVector:
    _check_qubit(state, q)
    kernels.apply_s(state.amplitudes, state.num_qubits, q)
    return state


def apply_sdg(state: StateVector, q: int) -> StateVector:
    _check_qubit(state, q)
    kernels.apply_sdg(state.amplitudes, state.num_qubits, q)
    return state


def apply_cz(state: StateVector, qa: int, qb: int) -> StateVector:
    _check_qubit(state, qa)
    _check_qubit(state, qb)
    if qa == qb:
        raise ValueError("CZ needs two distinct qubits")
    kernels.apply_cz(state.amplitudes, state.num_qubits, qa, qb)
    return state


_DISPATCH = {"H": apply_h, "X": apply_x, "Z": apply_z, "CZ": apply_cz}


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    return _DISPATCH[gate.kind](state, *gate.targets)


def build_graph_state(graph: Graph) -> StateVector:
    """CZ over every edge applied to |+>^V."""
    state = zero_state(graph.vertex_count)
    for q in range(graph.vertex_count):
        apply_h(state, q)
    for u, v in sorted(graph.edges):
        apply_cz(state, u, v)
    return state


def _pick_outcome(p_outcome0, forced, rng, basis):
    """Choose a measurement outcome; forced outcomes must have support."""
    if forced is not None:
        if forced not in (0, 1):
            raise ValueError(f"forced outcome must be 0 or 1, got {forced!r}")
        prob = p_outcome0 if forced == 0 else 1.0 - p_outcome0
        if prob < _FORCE_TOL:
            raise ValueError(
                f"forced {basis} outcome {forced} has probability {prob:.3e}"
            )
        return forced, prob
    if rng is None:
        raise ValueError("sampled measurement needs an rng")
    outcome = 0 if rng.random() < p_outcome0 else 1
    return outcome, (p_outcome0 if outcome == 0 else 1.0 - p_outcome0)


def measure_x(state: StateVector, q: int, forced=None, rng=None):
    """X-basis measurement of qubit q; outcome 0 means the |+> projector.

    Returns (outcome, state); the state is collapsed in place.
    """
    _check_qubit(state, q)
    p_plus = kernels.prob_plus_x(state.amplitudes, state.num_qubits, q)
    p_plus = min(max(p_plus, 0.0), 1.0)
    outcome, prob = _pick_outcome(p_plus, forced, rng, "X")
    kernels.collapse_x(state.amplitudes, state.num_qubits, q, outcome, prob)
    return outcome, state


def measure_z(state: StateVector, q: int, forced=None, rng=None):
    """Z-basis measurement of qubit q; outcome is the read bit value.

    Returns (outcome, state); the state is collapsed in place.
    """
    _check_qubit(state, q)
    p_one = kernels.prob_one(state.amplitudes, state.num_qubits, q)
    p_one = min(max(p_one, 0.0), 1.0)
    outcome, prob = _pick_outcome(1.0 - p_one, forced, rng, "Z")
    kernels.collapse_z(state.amplitudes, state.num_qubits, q, outcome, prob)
    return outcome, state


def reset(state: StateVector, q: int, rng) -> StateVector:
    """Measure qubit q in Z and flip to |0> when the outcome was 1."""
    _check_qubit(state, q)
    p_one = kernels.prob_one(state.amplitudes, state.num_qubits, q)
    p_one = min(max(p_one, 0.0), 1.0)
    outcome = 1 if rng.random() < p_one else 0
    kernels.collapse_reset(state.amplitudes, state.num_qubits, q, outcome, p_one)
    return state


def reduced_density_matrix(state: StateVector, qubits) -> np.ndarray:
    """Trace out everything but `qubits`; row index orders as given.

    The first listed qubit is the most significant bit of the matrix index.
    """
    qubits = tuple(qubits)
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"duplicate qubit indices in {qubits!r}")
    for q in qubits:
        _check_qubit(state, q)
    n = state.num_qubits
    keep = len(qubits)
    rest = [q for q in range(n) if q not in qubits]
    tensor = state.amplitudes.reshape([2] * n)
    tensor = np.transpose(tensor, list(qubits) + rest)
    mat = tensor.reshape(1 << keep, 1 << (n - keep))
    return mat @ mat.conj().T


def exact_distribution(state: StateVector, bases) -> np.ndarray:
    """Exact outcome distribution for measuring selected qubits.

    `bases` maps qubit -> basis label in {X, Y, Z}; iteration order of the
    mapping fixes the bit order of the outcome index (first qubit is the
    most significant bit).  Unlisted qubits are traced out.  The state is
    not modified.
    """
    qubits = list(bases)
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"duplicate qubit indices in {qubits!r}")
    for q in qubits:
        _check_qubit(state, q)
    work = state.copy()
    for q in qubits:
        basis = bases[q]
        if basis == "X":
            apply_h(work, q)
        elif basis == "Y":
            apply_sdg(work, q)
            apply_h(work, q)
        elif basis != "Z":
            raise ValueError(f"invalid basis label {basis!r}")
    n = state.num_qubits
    probs = np.abs(work.amplitudes.reshape([2] * n)) ** 2
    rest = [q for q in range(n) if q not in qubits]
    probs = np.transpose(probs, qubits + rest).reshape(1 << len(qubits), -1)
    return probs.sum(axis=1)
