"""Cyclic teleportation around a regenerating ring (the hamster wheel).

Qubit 0 is the stationary axis; qubits 1..n-1 form a ring of spokes.  The
axis-spoke pair starts in the two-qubit graph state, the current holder is
chained by CZ edges to fresh |+> spokes ahead of it, and each X-basis
measurement of the holder teleports the pair one spoke forward.  When the
chain is exhausted the spokes behind the state are reset and re-entangled
in front of it (lazy regeneration), so the state can keep hopping
indefinitely on a fixed register.

Each hop appends one Hadamard-plus-phase byproduct to the moving qubit; the
accumulated operator collapses to H^m Z^a X^b where a is the XOR of the
odd-numbered outcomes and b the XOR of the even-numbered ones (hops counted
from 1).  The (a, b) pair is the discriminator: dynamic mode undoes the
byproduct with live gates, post-selection mode buckets runs by it.

Only qubits a run can ever touch are simulated: a run of m hops reaches
spoke min(m, n-2)+1 at the furthest, so the register is sized to that
prefix and chains are never built longer than the remaining hop budget.
Building the full ring up front would leave the holder entangled with
spokes that are never measured, which destroys the teleported pair's
purity; chains therefore grow only as far as they will be consumed.
"""

from dataclasses import dataclass, field

import numpy as np

from . import sim
from .noise import NoiseModel, apply_fault, corrupt_readout, sample_gate_fault

CORRECTION_MODES = ("dynamic", "post_selection")


@dataclass(frozen=True)
class WheelConfig:
    """Parameters of one protocol run."""

    num_qubits: int = 20
    hops: int = 0
    correction_mode: str = "dynamic"
    noise: NoiseModel = field(default_factory=NoiseModel)
    seed: int = 0
    propagate_readout_flips: bool = True

    def __post_init__(self):
        if self.num_qubits < 3:
            raise ValueError("the wheel needs at least 3 qubits (axis + 2 spokes)")
        if self.num_qubits > sim.MAX_QUBITS:
            raise ValueError(f"qubit count above {sim.MAX_QUBITS} is unsupported")
        if self.hops < 0:
            raise ValueError("hop count must be non-negative")
        if self.correction_mode not in CORRECTION_MODES:
            raise ValueError(
                f"correction_mode must be one of {CORRECTION_MODES}, "
                f"got {self.correction_mode!r}"
            )


@dataclass
class MeasurementRecord:
    """Recorded hop outcomes plus running byproduct parities.

    c_z accumulates the odd-numbered outcomes, c_x the even-numbered ones
    (hops counted from 1).
    """

    outcomes: list = field(default_factory=list)
    c_z: int = 0
    c_x: int = 0

    def append(self, bit: int):
        self.outcomes.append(bit)
        if len(self.outcomes) % 2 == 1:
            self.c_z ^= bit
        else:
            self.c_x ^= bit


@dataclass(frozen=True)
class ByproductOperator:
    """The accumulated H^m Z^a X^b byproduct, stored as exponent parities."""

    h_parity: int
    z_power: int
    x_power: int

    @property
    def is_identity(self) -> bool:
        return self.h_parity == 0 and self.z_power == 0 and self.x_power == 0


@dataclass
class ProtocolRun:
    """Mutable state of a run in progress."""

    config: WheelConfig
    state: sim.StateVector
    record: MeasurementRecord
    holder: int
    leg_remaining: int
    measured_order: list
    regenerations: int = 0

    def reduced_pair(self) -> np.ndarray:
        """4x4 reduced density matrix of (axis, holder)."""
        return sim.reduced_density_matrix(self.state, (0, self.holder))


def final_holder(hops: int, num_qubits: int) -> int:
    """Ring position holding the teleported qubit after `hops` hops."""
    if hops < 0:
        raise ValueError("hop count must be non-negative")
    if num_qubits < 3:
        raise ValueError("the wheel needs at least 3 qubits")
    return hops % (num_qubits - 1) + 1


def ring_successor(spoke: int, num_qubits: int) -> int:
    """Next spoke around the ring: n-1 wraps back to 1."""
    return spoke % (num_qubits - 1) + 1


def discriminator(record: MeasurementRecord) -> tuple:
    """(z-parity, x-parity) classifying the accumulated byproduct."""
    return (record.c_z, record.c_x)


def byproduct_for(hops: int, disc: tuple) -> ByproductOperator:
    """Byproduct operator implied by a hop count and a discriminator pair."""
    return ByproductOperator(hops % 2, disc[0], disc[1])


def _faulty_gate(state, apply_fn, targets, noise, rng):
    """Apply a gate, then a sampled Pauli fault on its targets."""
    apply_fn(state, *targets)
    if noise.p1 == 0.0 and noise.p2 == 0.0:
        return
    fault = sample_gate_fault(noise, len(targets), rng)
    apply_fault(state, fault, targets)


def _build_chain(state, head, spokes, noise, rng):
    """H each listed spoke, then CZ-link head -> spokes in order."""
    for q in spokes:
        _faulty_gate(state, sim.apply_h, (q,), noise, rng)
    prev = head
    for q in spokes:
        _faulty_gate(state, sim.apply_cz, (prev, q), noise, rng)
        prev = q


def build_initial_state(num_qubits: int) -> sim.StateVector:
    """Ideal starting state: the path graph state on (axis, spoke 1, ..., spoke n-1)."""
    return sim.build_graph_state(sim.Graph.path(num_qubits))


def begin_run(config: WheelConfig, rng=None) -> ProtocolRun:
    """Prepare the starting state and chain for a run of config.hops hops.

    The register holds only the prefix of the ring the run can reach
    (min(hops, n-2) + 2 qubits), and the initial chain stops at the last
    spoke the first leg will occupy.
    """
    leg = min(config.hops, config.num_qubits - 2)
    active = leg + 2
    state = sim.zero_state(active)
    rng = _require_rng(rng, config)
    noise = config.noise
    _faulty_gate(state, sim.apply_h, (0,), noise, rng)
    _build_chain(state, 0, list(range(1, leg + 2)), noise, rng)
    return ProtocolRun(
        config=config,
        state=state,
        record=MeasurementRecord(),
        holder=1,
        leg_remaining=leg,
        measured_order=[],
    )


def _require_rng(rng, config):
    if rng is None:
        return np.random.default_rng(config.seed)
    return rng


def perform_hop(run: ProtocolRun, forced=None, rng=None) -> ProtocolRun:
    """Measure the holder in X, advancing the pair one spoke forward.

    The recorded bit passes through the readout-flip channel unless the
    outcome is forced or propagation is switched off; the true outcome
    always drives the collapse.
    """
    if run.leg_remaining <= 0:
        raise RuntimeError("chain exhausted; regenerate the wheel before hopping")
    config = run.config
    noise = config.noise
    if forced is None and rng is None:
        raise ValueError("a sampled hop needs an rng")
    outcome, _ = sim.measure_x(run.state, run.holder, forced=forced, rng=rng)
    recorded = outcome
    if (
        forced is None
        and config.propagate_readout_flips
        and (noise.eps01 > 0.0 or noise.eps10 > 0.0)
    ):
        recorded = corrupt_readout(outcome, noise.eps01, noise.eps10, rng)
    run.record.append(recorded)
    run.measured_order.append(run.holder)
    run.holder = ring_successor(run.holder, config.num_qubits)
    run.leg_remaining -= 1
    return run


def regenerate_wheel(run: ProtocolRun, rng=None) -> ProtocolRun:
    """Reset consumed spokes and chain them in front of the holder.

    Spokes are reused in the order they were measured; only as many as the
    remaining hop budget needs are reset and re-entangled.  Resets are
    projective with a possible leftover |1> (reset_flip) and count as
    one-qubit gates for fault purposes.
    """
    if run.leg_remaining != 0:
        raise RuntimeError("regeneration is only allowed on an exhausted chain")
    if rng is None:
        raise ValueError("regeneration resets need an rng")
    config = run.config
    noise = config.noise
    budget = config.hops - len(run.record.outcomes)
    count = min(config.num_qubits - 2, budget)
    if count <= 0:
        raise RuntimeError("no hops left to regenerate for")
    reused = run.measured_order[:count]
    for q in reused:
        sim.reset(run.state, q, rng)
        if noise.reset_flip > 0.0 and rng.random() < noise.reset_flip:
            sim.apply_x(run.state, q)
        if noise.p1 > 0.0 or noise.p2 > 0.0:
            fault = sample_gate_fault(noise, 1, rng)
            apply_fault(run.state, fault, (q,))
    _build_chain(run.state, run.holder, reused, noise, rng)
    run.measured_order = []
    run.leg_remaining = count
    run.regenerations += 1
    return run


def _apply_correction(run: ProtocolRun, rng):
    """Undo the accumulated byproduct on the holder with live gates."""
    bp = byproduct_for(len(run.record.outcomes), discriminator(run.record))
    noise = run.config.noise
    if bp.h_parity:
        _faulty_gate(run.state, sim.apply_h, (run.holder,), noise, rng)
    if bp.z_power:
        _faulty_gate(run.state, sim.apply_z, (run.holder,), noise, rng)
    if bp.x_power:
        _faulty_gate(run.state, sim.apply_x, (run.holder,), noise, rng)


def run_protocol(config: WheelConfig, forced=None, rng=None) -> ProtocolRun:
    """Execute a full run: chain building, hops, regenerations, correction.

    `forced` fixes every hop outcome (its length must equal config.hops);
    forced outcomes bypass both the Born-rule draw and readout corruption,
    which makes branch enumeration exact.  In dynamic mode the byproduct
    is undone at the end; in post_selection mode the state is returned
    uncorrected together with its discriminator record.
    """
    if forced is not None:
        forced = list(forced)
        if len(forced) != config.hops:
            raise ValueError(
                f"forced outcomes length {len(forced)} != hops {config.hops}"
            )
    rng = _require_rng(rng, config)
    run = begin_run(config, rng)
    for k in range(config.hops):
        if run.leg_remaining == 0:
            regenerate_wheel(run, rng)
        perform_hop(run, forced=None if forced is None else forced[k], rng=rng)
    if run.holder != final_holder(config.hops, config.num_qubits):
        raise AssertionError("holder drifted off the ring walk")
    if config.correction_mode == "dynamic":
        _apply_correction(run, rng)
    return run
