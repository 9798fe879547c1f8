"""Monte-Carlo Pauli trajectory noise.

Each trajectory is a pure-state run in which faults are sampled gate by
gate: with probability p1 (p2) a uniformly random non-identity Pauli
pattern lands on the qubits touched by a one-qubit (two-qubit) gate.
Readout errors flip recorded bits asymmetrically, and resets can leave the
wrong state behind.  Averaging trajectory density matrices reproduces the
depolarizing channel.

A fault draw consumes exactly two stream values whenever its probability
is positive and none when it is zero, so the zero model shares the
noiseless code path bit for bit, and sweeps over fault strength reuse the
same underlying randomness (common random numbers).
"""

from dataclasses import dataclass

import numpy as np

from . import sim

FAULTS_1Q = (("X",), ("Y",), ("Z",))

FAULTS_2Q = tuple(
    (a, b)
    for a in ("I", "X", "Y", "Z")
    for b in ("I", "X", "Y", "Z")
    if (a, b) != ("I", "I")
)

_APPLY = {"X": sim.apply_x, "Y": sim.apply_y, "Z": sim.apply_z}


@dataclass(frozen=True)
class NoiseModel:
    """Fault probabilities; all zero means ideal execution."""

    p1: float = 0.0
    p2: float = 0.0
    eps01: float = 0.0
    eps10: float = 0.0
    reset_flip: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2", "eps01", "eps10", "reset_flip"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be a probability, got {value}")

    @property
    def is_zero(self) -> bool:
        return (
            self.p1 == 0.0
            and self.p2 == 0.0
            and self.eps01 == 0.0
            and self.eps10 == 0.0
            and self.reset_flip == 0.0
        )


def sample_gate_fault(model: NoiseModel, arity: int, rng) -> tuple:
    """Pauli pattern to apply after a gate; identity labels mean no fault."""
    if arity == 1:
        prob, table = model.p1, FAULTS_1Q
    elif arity == 2:
        prob, table = model.p2, FAULTS_2Q
    else:
        raise ValueError(f"gate arity must be 1 or 2, got {arity}")
    if prob == 0.0:
        return ("I",) * arity
    fired = rng.random() < prob
    pick = rng.integers(0, len(table))
    if not fired:
        return ("I",) * arity
    return table[pick]


def apply_fault(state, fault, targets):
    """Apply a sampled Pauli pattern to the given qubits."""
    for label, q in zip(fault, targets):
        if label != "I":
            _APPLY[label](state, q)
    return state


def corrupt_readout(bit: int, eps01: float, eps10: float, rng) -> int:
    """Classically flip a recorded bit: 0 reads as 1 w.p. eps01, 1 as 0 w.p. eps10."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    flip_prob = eps01 if bit == 0 else eps10
    if rng.random() < flip_prob:
        return 1 - bit
    return bit


def _complement_pair(eps: float):
    """(1-eps, eps) as floats whose sum is exactly 1.0."""
    if eps <= 0.5:
        stay = 1.0 - eps
        return stay, 1.0 - stay
    flip = float(eps)
    return 1.0 - flip, flip


def build_calibration(model: NoiseModel) -> np.ndarray:
    """Column-stochastic confusion matrix A[read, prepared] for one qubit."""
    a00, a10 = _complement_pair(model.eps01)
    a11, a01 = _complement_pair(model.eps10)
    return np.array([[a00, a01], [a10, a11]])


def estimate_calibration(model: NoiseModel, shots: int, rng) -> np.ndarray:
    """Empirical confusion matrix from `shots` corrupted readouts per prepared bit."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    mat = np.zeros((2, 2))
    for prepared in (0, 1):
        flips = 0
        for _ in range(shots):
            if corrupt_readout(prepared, model.eps01, model.eps10, rng) != prepared:
                flips += 1
        mat[1 - prepared, prepared] = flips / shots
        mat[prepared, prepared] = 1.0 - flips / shots
    return mat
