"""Entanglement and fidelity figures of merit, plus bootstrap error bars."""

import math
from dataclasses import dataclass

import numpy as np

from .paulis import H, ID2, X, Z
from .tomography import CountsTable


def two_qubit_graph_state() -> np.ndarray:
    """CZ applied to |+>|+>: amplitudes (1, 1, 1, -1)/2."""
    return np.array([1.0, 1.0, 1.0, -1.0], dtype=complex) / 2.0


def partial_transpose(rho, subsystem: int = 0) -> np.ndarray:
    """Transpose one qubit of a 4x4 two-qubit operator."""
    rho = np.asarray(rho, complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got {rho.shape}")
    if subsystem not in (0, 1):
        raise ValueError("subsystem must be 0 or 1")
    t = rho.reshape(2, 2, 2, 2)
    if subsystem == 0:
        t = t.transpose(2, 1, 0, 3)
    else:
        t = t.transpose(0, 3, 2, 1)
    return t.reshape(4, 4)


def _eigvalsh(mat) -> np.ndarray:
    mat = np.asarray(mat, complex)
    return np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))


def negativity(rho, subsystem: int = 0) -> float:
    """Absolute sum of the negative eigenvalues of the partial transpose."""
    vals = _eigvalsh(partial_transpose(rho, subsystem))
    return float(-vals[vals < 0.0].sum())


def negativity_trace_norm(rho, subsystem: int = 0) -> float:
    """Same quantity via (trace norm - 1)/2 of the partial transpose."""
    vals = _eigvalsh(partial_transpose(rho, subsystem))
    return float(0.5 * (np.abs(vals).sum() - 1.0))


def fidelity_pure(rho, target) -> float:
    """<t|rho|t> for a pure target vector."""
    rho = np.asarray(rho, complex)
    t = np.asarray(target, complex)
    if rho.shape != (t.size, t.size):
        raise ValueError(f"shape mismatch: {rho.shape} vs target {t.shape}")
    norm = np.vdot(t, t).real
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"target vector is not normalized (|t|^2 = {norm})")
    return float(np.vdot(t, rho @ t).real)


ALL_DISCRIMINATORS = ((0, 0), (0, 1), (1, 0), (1, 1))


def variant_targets(hops: int, discriminators=None) -> list:
    """Ideal uncorrected states (I x H^m Z^a X^b)|pair> per discriminator (a, b)."""
    if discriminators is None:
        discriminators = ALL_DISCRIMINATORS
    base = two_qubit_graph_state()
    h_power = np.linalg.matrix_power(H, hops % 2)
    targets = []
    for a, b in discriminators:
        local = h_power @ np.linalg.matrix_power(Z, a) @ np.linalg.matrix_power(X, b)
        targets.append(np.kron(ID2, local) @ base)
    return targets


def mixed_variant_density(variants, weights) -> np.ndarray:
    """Weighted mixture of pure variant states as a density matrix."""
    if len(variants) != len(weights):
        raise ValueError("one weight per variant required")
    w = np.asarray(weights, float)
    if (w < 0).any():
        raise ValueError("weights must be non-negative")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
    dim = len(np.asarray(variants[0]).ravel())
    rho = np.zeros((dim, dim), dtype=complex)
    for vec, weight in zip(variants, w):
        v = np.asarray(vec, complex).ravel()
        rho += weight * np.outer(v, v.conj())
    return rho


@dataclass
class BootstrapResult:
    """Percentile bootstrap summary of one scalar estimator."""

    point_estimate: float
    resamples: np.ndarray
    ci_low: float
    ci_high: float
    epsilon: float


def _resample(counts, rng):
    """Multinomial resample at the original per-setting shot counts."""
    if isinstance(counts, CountsTable):
        fresh = {}
        for setting in counts.settings():
            shots = counts.shots(setting)
            fresh[setting] = rng.multinomial(shots, counts.frequencies(setting))
        return CountsTable(fresh, dict(counts.metadata))
    if isinstance(counts, dict):
        return {key: _resample(table, rng) for key, table in counts.items()}
    raise TypeError(f"cannot resample {type(counts).__name__}")


def bootstrap_ci(counts, estimator, n_resamples: int = 200, rng=None) -> BootstrapResult:
    """Percentile bootstrap of `estimator` over multinomially resampled counts.

    The resamples are sorted ascending; with 1-indexed order statistics the
    interval is [a_ceil(0.025 N), a_floor(0.975 N)] and the half-width
    epsilon is half the interval length.  Each resample draws from its own
    child stream, so the result does not depend on evaluation order.
    """
    if n_resamples < 2:
        raise ValueError("need at least 2 resamples")
    if rng is None:
        raise ValueError("bootstrap needs an rng")
    point = float(estimator(counts))
    streams = rng.spawn(n_resamples)
    values = np.empty(n_resamples)
    for i, stream in enumerate(streams):
        try:
            values[i] = float(estimator(_resample(counts, stream)))
        except Exception as exc:
            raise RuntimeError(f"estimator failed on resample {i}: {exc}") from exc
    values.sort()
    lo_index = max(math.ceil(0.025 * n_resamples), 1)
    hi_index = min(math.floor(0.975 * n_resamples), n_resamples)
    ci_low = float(values[lo_index - 1])
    ci_high = float(values[hi_index - 1])
    return BootstrapResult(
        point_estimate=point,
        resamples=values,
        ci_low=ci_low,
        ci_high=ci_high,
        epsilon=0.5 * (ci_high - ci_low),
    )
