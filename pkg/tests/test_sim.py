import numpy as np
import pytest

from hamsterwheel import sim
from helpers import (
    HM,
    XM,
    YM,
    ZM,
    apply_matrix,
    partial_trace_oracle,
    random_state_vector,
)

CZ4 = np.diag([1, 1, 1, -1]).astype(complex)
SM = np.diag([1, 1j]).astype(complex)
SDGM = np.diag([1, -1j]).astype(complex)


def make_state(vec):
    n = int(np.log2(vec.size))
    return sim.StateVector(n, np.array(vec, dtype=np.complex128))


def test_zero_state_shape_and_amplitudes():
    state = sim.zero_state(3)
    assert state.num_qubits == 3
    assert state.amplitudes[0] == 1.0
    assert np.count_nonzero(state.amplitudes) == 1
    assert state.norm() == pytest.approx(1.0)


@pytest.mark.parametrize("bad", [0, -1, 25])
def test_zero_state_rejects_bad_sizes(bad):
    with pytest.raises(ValueError):
        sim.zero_state(bad)


def test_gate_validation():
    with pytest.raises(ValueError):
        sim.Gate("T", (0,))
    with pytest.raises(ValueError):
        sim.Gate("H", (0, 1))
    with pytest.raises(ValueError):
        sim.Gate("CZ", (1, 1))
    state = sim.zero_state(2)
    with pytest.raises(ValueError):
        sim.apply_h(state, 2)
    with pytest.raises(ValueError):
        sim.apply_cz(state, 0, 0)


def test_two_qubit_graph_state_amplitudes():
    state = sim.build_graph_state(sim.Graph.path(2))
    expected = np.array([1, 1, 1, -1]) / 2.0
    assert np.allclose(state.amplitudes, expected, atol=1e-15)


def test_three_qubit_path_signs():
    state = sim.build_graph_state(sim.Graph.path(3))
    for idx in range(8):
        x0, x1, x2 = (idx >> 2) & 1, (idx >> 1) & 1, idx & 1
        sign = (-1) ** (x0 * x1 + x1 * x2)
        assert state.amplitudes[idx] == pytest.approx(sign / np.sqrt(8), abs=1e-12)


def test_graph_state_phase_formula_random_graph():
    rng = np.random.default_rng(11)
    edges = [(0, 2), (1, 3), (2, 3), (0, 4), (3, 4)]
    graph = sim.Graph.from_edges(5, edges)
    state = sim.build_graph_state(graph)
    for idx in rng.integers(0, 32, size=12):
        bits = [(int(idx) >> (4 - q)) & 1 for q in range(5)]
        exponent = sum(bits[u] * bits[v] for u, v in edges)
        expected = (-1) ** exponent / np.sqrt(32)
        assert state.amplitudes[idx] == pytest.approx(expected, abs=1e-12)


def test_graph_validation():
    with pytest.raises(ValueError):
        sim.Graph.from_edges(3, [(0, 0)])
    with pytest.raises(ValueError):
        sim.Graph.from_edges(3, [(0, 3)])


@pytest.mark.parametrize(
    "name,mat",
    [("apply_h", HM), ("apply_x", XM), ("apply_y", YM), ("apply_z", ZM),
     ("apply_s", SM), ("apply_sdg", SDGM)],
)
def test_single_qubit_gates_match_matrix_oracle(name, mat):
    rng = np.random.default_rng(5)
    for n in (1, 3, 5):
        for q in range(n):
            vec = random_state_vector(n, rng)
            state = make_state(vec)
            getattr(sim, name)(state, q)
            expected = apply_matrix(vec, mat, [q], n)
            assert np.allclose(state.amplitudes, expected, atol=1e-13)


def test_cz_matches_matrix_oracle_and_is_symmetric():
    rng = np.random.default_rng(6)
    for n in (2, 4, 5):
        for qa in range(n):
            for qb in range(n):
                if qa == qb:
                    continue
                vec = random_state_vector(n, rng)
                state = make_state(vec)
                sim.apply_cz(state, qa, qb)
                expected = apply_matrix(vec, CZ4, [qa, qb], n)
                assert np.allclose(state.amplitudes, expected, atol=1e-13)


def test_apply_gate_dispatch():
    rng = np.random.default_rng(7)
    vec = random_state_vector(3, rng)
    state = make_state(vec)
    sim.apply_gate(state, sim.Gate("CZ", (0, 2)))
    sim.apply_gate(state, sim.Gate("H", (1,)))
    expected = apply_matrix(vec, CZ4, [0, 2], 3)
    expected = apply_matrix(expected, HM, [1], 3)
    assert np.allclose(state.amplitudes, expected, atol=1e-13)


def test_self_inverse_gates_and_norm_preservation():
    rng = np.random.default_rng(8)
    vec = random_state_vector(4, rng)
    state = make_state(vec)
    for op in (lambda s: sim.apply_h(s, 2), lambda s: sim.apply_x(s, 0),
               lambda s: sim.apply_z(s, 3), lambda s: sim.apply_cz(s, 1, 3)):
        op(state)
        assert state.norm() == pytest.approx(1.0, abs=1e-10)
        op(state)
        assert np.allclose(state.amplitudes, vec, atol=1e-10)


def test_measure_x_forced_on_pair_state():
    # Forcing outcome s on the pair state's second qubit leaves qubit 0 in |s>.
    for forced, expected in [
        (0, np.array([1, 1, 0, 0]) / np.sqrt(2)),
        (1, np.array([0, 0, 1, -1]) / np.sqrt(2)),
    ]:
        state = sim.build_graph_state(sim.Graph.path(2))
        outcome, state = sim.measure_x(state, 1, forced=forced)
        assert outcome == forced
        assert np.allclose(state.amplitudes, expected, atol=1e-12)


def test_forced_zero_probability_outcome_errors():
    state = sim.zero_state(2)
    with pytest.raises(ValueError):
        sim.measure_z(state, 0, forced=1)
    state = sim.zero_state(1)
    sim.apply_h(state, 0)
    with pytest.raises(ValueError):
        sim.measure_x(state, 0, forced=1)


def test_measure_requires_rng_when_sampled():
    state = sim.zero_state(1)
    with pytest.raises(ValueError):
        sim.measure_z(state, 0)


def test_measure_z_collapse_and_distribution():
    rng = np.random.default_rng(9)
    vec = random_state_vector(2, rng)
    probs_true = np.abs(vec.reshape(2, 2)) ** 2
    p_one = probs_true[1].sum()
    hits = 0
    samples = 100_000
    sample_rng = np.random.default_rng(10)
    base = make_state(vec)
    for _ in range(samples):
        outcome, collapsed = sim.measure_z(base.copy(), 0, rng=sample_rng)
        hits += outcome
    sigma = np.sqrt(p_one * (1 - p_one) / samples)
    assert abs(hits / samples - p_one) < 3 * sigma
    # collapse leaves the measured qubit definite and the norm at 1
    outcome, collapsed = sim.measure_z(base.copy(), 0, rng=sample_rng)
    w = collapsed.amplitudes.reshape(2, 2)
    assert np.allclose(w[1 - outcome], 0.0)
    assert collapsed.norm() == pytest.approx(1.0, abs=1e-12)


def test_measure_x_statistics_match_exact_distribution():
    rng = np.random.default_rng(12)
    vec = random_state_vector(2, rng)
    state = make_state(vec)
    dist = sim.exact_distribution(state, {1: "X"})
    sample_rng = np.random.default_rng(13)
    samples = 100_000
    ones = 0
    for _ in range(samples):
        outcome, _ = sim.measure_x(state.copy(), 1, rng=sample_rng)
        ones += outcome
    sigma = np.sqrt(dist[1] * (1 - dist[1]) / samples)
    assert abs(ones / samples - dist[1]) < 3 * sigma


def test_reset_forces_zero_regardless_of_outcome():
    rng = np.random.default_rng(14)
    for seed in range(5):
        vec = random_state_vector(3, rng)
        state = make_state(vec)
        sim.reset(state, 1, np.random.default_rng(seed))
        dist = sim.exact_distribution(state, {1: "Z"})
        assert dist[1] == pytest.approx(0.0, abs=1e-12)
        assert state.norm() == pytest.approx(1.0, abs=1e-10)


def test_reduced_density_matrix_matches_oracle():
    rng = np.random.default_rng(15)
    vec = random_state_vector(4, rng)
    state = make_state(vec)
    for keep in [(0, 1), (1, 3), (3, 1), (2,), (0, 2, 3)]:
        got = sim.reduced_density_matrix(state, keep)
        expected = partial_trace_oracle(vec, list(keep), 4)
        assert np.allclose(got, expected, atol=1e-12)
        assert np.trace(got).real == pytest.approx(1.0, abs=1e-12)


def test_reduced_density_matrix_rejects_duplicates():
    state = sim.zero_state(3)
    with pytest.raises(ValueError):
        sim.reduced_density_matrix(state, (1, 1))


def test_exact_distribution_pair_state_settings():
    state = sim.build_graph_state(sim.Graph.path(2))
    xz = sim.exact_distribution(state, {0: "X", 1: "Z"})
    assert np.allclose(xz, [0.5, 0, 0, 0.5], atol=1e-12)
    zz = sim.exact_distribution(state, {0: "Z", 1: "Z"})
    assert np.allclose(zz, [0.25, 0.25, 0.25, 0.25], atol=1e-12)


def test_exact_distribution_y_basis_uses_proper_rotation():
    state = make_state(np.array([1, 1j]) / np.sqrt(2))
    dist = sim.exact_distribution(state, {0: "Y"})
    assert np.allclose(dist, [1.0, 0.0], atol=1e-12)


def test_exact_distribution_validation_and_state_preservation():
    state = sim.build_graph_state(sim.Graph.path(2))
    before = state.amplitudes.copy()
    with pytest.raises(ValueError):
        sim.exact_distribution(state, {0: "Q"})
    dist = sim.exact_distribution(state, {0: "X", 1: "Y"})
    assert dist.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.array_equal(state.amplitudes, before)


def test_norm_stays_unit_through_mixed_operations():
    rng = np.random.default_rng(16)
    state = sim.build_graph_state(sim.Graph.path(5))
    ops = [
        lambda: sim.apply_cz(state, 0, 4),
        lambda: sim.apply_h(state, 2),
        lambda: sim.measure_x(state, 1, rng=rng),
        lambda: sim.apply_z(state, 3),
        lambda: sim.measure_z(state, 4, rng=rng),
        lambda: sim.reset(state, 2, rng),
        lambda: sim.apply_y(state, 0),
    ]
    for op in ops:
        op()
        assert state.norm() == pytest.approx(1.0, abs=1e-10)
