"""Two-qubit state tomography with readout-error mitigation.

Reconstruction pipeline, applied per measurement setting:
counts -> empirical distribution -> calibration-matrix inversion (REM) ->
nearest probability vector (simplex projection) -> linear-inversion state
estimate -> nearest physical density matrix (eigenvalue truncation).

Measurement conventions: settings are ordered basis pairs over {X, Y, Z},
outcome index bit 0/1 corresponds to the +1/-1 eigenvector, and the first
qubit of the pair is the most significant outcome bit.  Basis changes use
the same rotations as the simulator (X: H, Y: S-dagger then H), so sampled
and exact distributions agree by construction.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import noise as noise_mod
from .paulis import H, ID2, PAULI, SDG

BASES = ("X", "Y", "Z")

_ROT = {"X": H, "Y": H @ SDG, "Z": ID2}

_SIGN = {
    # per-outcome eigenvalue signs for (first qubit, second qubit, product)
    "first": np.array([1.0, 1.0, -1.0, -1.0]),
    "second": np.array([1.0, -1.0, 1.0, -1.0]),
    "product": np.array([1.0, -1.0, -1.0, 1.0]),
}


def qst_settings() -> list:
    """The nine ordered basis pairs, lexicographic in (X, Y, Z)."""
    return [(a, b) for a in BASES for b in BASES]


_OUTCOME_LABELS = ("00", "01", "10", "11")
_COUNTS_HEADER = "setting,outcome,count"


@dataclass
class CountsTable:
    """Outcome counts per setting; vectors are length 4, ordered 00,01,10,11."""

    counts: dict
    metadata: dict = field(default_factory=dict)

    def shots(self, setting) -> int:
        return int(self.counts[setting].sum())

    def frequencies(self, setting) -> np.ndarray:
        total = self.shots(setting)
        if total == 0:
            raise ValueError(f"setting {setting} has no shots")
        return self.counts[setting] / total

    def settings(self) -> list:
        return list(self.counts)

    def to_text(self) -> str:
        """Line-oriented form: metadata comments, a header, one row per count."""
        lines = [f"# {key} = {value}" for key, value in self.metadata.items()]
        lines.append(_COUNTS_HEADER)
        for setting in self.settings():
            label = "".join(setting)
            for outcome, count in zip(_OUTCOME_LABELS, self.counts[setting]):
                lines.append(f"{label},{outcome},{int(count)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CountsTable":
        metadata = {}
        counts = {}
        header_seen = False
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line.lstrip("# ").partition("=")
                metadata[key.strip()] = value.strip()
                continue
            if not header_seen:
                if line != _COUNTS_HEADER:
                    raise ValueError(f"line {lineno}: expected {_COUNTS_HEADER!r}")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected 3 fields, got {line!r}")
            label, outcome, count = parts
            if len(label) != 2 or any(b not in BASES for b in label):
                raise ValueError(f"line {lineno}: bad setting {label!r}")
            if outcome not in _OUTCOME_LABELS:
                raise ValueError(f"line {lineno}: bad outcome {outcome!r}")
            setting = (label[0], label[1])
            if setting not in counts:
                counts[setting] = np.zeros(4, dtype=np.int64)
            counts[setting][_OUTCOME_LABELS.index(outcome)] = int(count)
        if not header_seen:
            raise ValueError("no counts header found")
        return cls(counts, metadata)


def setting_distribution(rho: np.ndarray, setting) -> np.ndarray:
    """Exact Born distribution of a 4x4 state under one basis pair."""
    rot = np.kron(_ROT[setting[0]], _ROT[setting[1]])
    probs = np.einsum("ij,jk,ik->i", rot, rho, rot.conj()).real
    return np.clip(probs, 0.0, None)


def distort_distribution(probs, cal0, cal1) -> np.ndarray:
    """Push a distribution through per-qubit confusion matrices."""
    p = np.asarray(probs, float).reshape(2, 2)
    return (np.asarray(cal0) @ p @ np.asarray(cal1).T).reshape(4)


def _readout_calibrations(readout):
    """Per-qubit confusion matrices for an (eps01, eps10) pair, or None."""
    if readout is None:
        return None
    eps01, eps10 = readout
    if eps01 == 0.0 and eps10 == 0.0:
        return None
    cal = noise_mod.build_calibration(noise_mod.NoiseModel(eps01=eps01, eps10=eps10))
    return (cal, cal)


def _sample_setting(rho, setting, shots, rng, cals) -> np.ndarray:
    probs = setting_distribution(rho, setting)
    if cals is not None:
        probs = distort_distribution(probs, *cals)
    total = probs.sum()
    if not math.isfinite(total) or total <= 0.0:
        raise ValueError(f"degenerate distribution for setting {setting}")
    return rng.multinomial(shots, probs / total)


def sample_counts(rho, shots_per_setting, rng, readout=None) -> CountsTable:
    """Multinomial QST counts for every setting, optionally readout-corrupted."""
    if shots_per_setting <= 0:
        raise ValueError("shots_per_setting must be positive")
    cals = _readout_calibrations(readout)
    counts = {}
    for setting in qst_settings():
        counts[setting] = _sample_setting(rho, setting, shots_per_setting, rng, cals)
    return CountsTable(counts)


def _inverse_2x2(mat) -> np.ndarray:
    a = np.asarray(mat, float)
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if abs(det) < 1e-12:
        raise ValueError("calibration matrix is singular; REM impossible")
    return np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]]) / det


def rem_correct(probs, cals) -> np.ndarray:
    """Invert per-qubit confusion matrices on an outcome distribution.

    `cals` lists one 2x2 calibration matrix per measured qubit, most
    significant outcome bit first.  Only the per-qubit inverses are formed,
    never the joint matrix.  The result sums to the input sum but may dip
    below zero; project it before use.
    """
    p = np.asarray(probs, float)
    k = len(cals)
    if p.shape != (1 << k,):
        raise ValueError(f"expected {1 << k} outcomes for {k} qubits, got {p.shape}")
    tensor = p.reshape([2] * k)
    for axis, cal in enumerate(cals):
        tensor = np.moveaxis(
            np.tensordot(_inverse_2x2(cal), tensor, axes=([1], [axis])), 0, axis
        )
    return tensor.reshape(-1)


def michelot_project(values) -> np.ndarray:
    """Euclidean projection onto the probability simplex.

    Active-set iteration: shift the active coordinates by a common amount
    to restore the sum constraint, zero out any that went negative, repeat.
    Inputs already on the simplex are returned unchanged, and outputs land
    exactly on the fast path, so the projection is idempotent bit for bit.
    """
    x = np.array(values, float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("expected a non-empty 1-D vector")
    if (x >= 0.0).all() and math.fsum(x) == 1.0:
        return x
    active = np.ones(x.size, bool)
    while True:
        shift = (x[active].sum() - 1.0) / active.sum()
        x[active] -= shift
        x[~active] = 0.0
        negative = active & (x < 0.0)
        if not negative.any():
            break
        active &= ~negative
    x[x < 0.0] = 0.0
    # Pin the float sum to exactly 1.0 so re-projection is a no-op.
    top = int(np.argmax(x))
    for _ in range(10):
        residual = 1.0 - math.fsum(x)
        if residual == 0.0:
            break
        x[top] += residual
    return x


def linear_inversion_qst(probs_by_setting) -> np.ndarray:
    """Pauli-expectation reconstruction from nine setting distributions.

    Two-body expectations come from their own setting; single-body ones are
    averaged over the three settings that measure the qubit in that basis.
    The result has unit trace by construction but may be unphysical.
    """
    missing = [s for s in qst_settings() if s not in probs_by_setting]
    if missing:
        raise ValueError(f"missing settings: {missing}")
    expectations = {("I", "I"): 1.0}
    for b0 in BASES:
        for b1 in BASES:
            p = np.asarray(probs_by_setting[(b0, b1)], float)
            expectations[(b0, b1)] = float(p @ _SIGN["product"])
    for b in BASES:
        expectations[(b, "I")] = float(
            np.mean(
                [probs_by_setting[(b, other)] @ _SIGN["first"] for other in BASES]
            )
        )
        expectations[("I", b)] = float(
            np.mean(
                [probs_by_setting[(other, b)] @ _SIGN["second"] for other in BASES]
            )
        )
    rho = np.zeros((4, 4), dtype=complex)
    for (p0, p1), value in expectations.items():
        rho += value * np.kron(PAULI[p0], PAULI[p1])
    return rho / 4.0


def smolin_project(rho) -> np.ndarray:
    """Nearest physical density matrix by eigenvalue truncation.

    The input is symmetrized, its spectrum sorted descending, and negative
    weight is redistributed by walking from the smallest eigenvalue up:
    each eigenvalue below the running water line is zeroed and its value
    spread uniformly over the ones still standing.  Trace is preserved;
    a PSD input comes back unchanged.
    """
    rho = np.asarray(rho, complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got {rho.shape}")
    rho = 0.5 * (rho + rho.conj().T)
    vals, vecs = np.linalg.eigh(rho)
    if vals[0] >= 0.0:
        return rho
    lam = vals[::-1].copy()
    vecs = vecs[:, ::-1]
    spill = 0.0
    cut = lam.size
    while cut > 0 and lam[cut - 1] + spill / cut < 0.0:
        spill += lam[cut - 1]
        cut -= 1
    out = np.zeros_like(lam)
    out[:cut] = lam[:cut] + spill / cut
    return (vecs[:, :cut] * out[:cut]) @ vecs[:, :cut].conj().T


def reconstruct(probs_by_setting, cal=None) -> np.ndarray:
    """Full pipeline from per-setting distributions to a physical state."""
    cleaned = {}
    for setting, probs in probs_by_setting.items():
        p = np.asarray(probs, float)
        if cal is not None:
            p = rem_correct(p, cal)
        cleaned[setting] = michelot_project(p)
    return smolin_project(linear_inversion_qst(cleaned))


@dataclass
class TomographyResult:
    rho: np.ndarray
    counts: CountsTable | None


def tomograph(
    rho_source,
    shots_per_setting=1000,
    cal=None,
    readout=None,
    exact=False,
    rng=None,
) -> TomographyResult:
    """Estimate a 4x4 state from QST of `rho_source`.

    `readout` = (eps01, eps10) corrupts outcomes at sampling time; `cal` is
    the calibration matrix pair handed to REM (pass the matching matrices
    to undo the corruption, or None to skip mitigation).  With exact=True
    the Born distributions are used directly and no counts are produced.
    """
    if exact:
        cals = _readout_calibrations(readout)
        probs = {}
        for setting in qst_settings():
            p = setting_distribution(rho_source, setting)
            if cals is not None:
                p = distort_distribution(p, *cals)
            probs[setting] = p
        return TomographyResult(reconstruct(probs, cal=cal), None)
    if rng is None:
        raise ValueError("sampled tomography needs an rng")
    counts = sample_counts(rho_source, shots_per_setting, rng, readout=readout)
    return TomographyResult(reconstruct_counts(counts, cal=cal), counts)


def reconstruct_counts(counts: CountsTable, cal=None) -> np.ndarray:
    """Reconstruction entry point for already-collected counts."""
    probs = {s: counts.frequencies(s) for s in counts.settings()}
    return reconstruct(probs, cal=cal)


@dataclass
class BucketTomography:
    """Per-discriminator reconstructions for post-selected runs."""

    rhos: dict
    weights: dict
    counts: dict | None
    missing: list


def tomograph_buckets(
    sources,
    shots_per_setting=1000,
    cal=None,
    readout=None,
    exact=False,
    rng=None,
) -> BucketTomography:
    """Tomography of each discriminator bucket of a post-selected ensemble.

    `sources` maps discriminator -> (weight, 4x4 state).  In sampled mode
    each setting's shot budget is split across buckets multinomially by
    weight, mirroring runs being binned after the fact; a bucket that ends
    up with zero shots in any setting cannot be reconstructed and is
    reported in `missing` instead of being fabricated.  Averaging weights
    are renormalized over the buckets that survive.
    """
    discs = list(sources)
    if not discs:
        raise ValueError("no buckets to reconstruct")
    weights = np.array([sources[d][0] for d in discs], float)
    if (weights < 0).any() or weights.sum() <= 0:
        raise ValueError("bucket weights must be non-negative and not all zero")
    weights = weights / weights.sum()

    if exact:
        rhos = {}
        for d in discs:
            res = tomograph(sources[d][1], cal=cal, readout=readout, exact=True)
            rhos[d] = res.rho
        kept = {d: w for d, w in zip(discs, weights)}
        return BucketTomography(rhos, kept, None, [])

    if rng is None:
        raise ValueError("sampled tomography needs an rng")
    cals = _readout_calibrations(readout)
    counts = {d: {} for d in discs}
    for setting in qst_settings():
        split = rng.multinomial(shots_per_setting, weights)
        for d, shots in zip(discs, split):
            if shots == 0:
                continue
            counts[d][setting] = _sample_setting(
                sources[d][1], setting, int(shots), rng, cals
            )
    rhos = {}
    missing = []
    tables = {}
    for d in discs:
        if len(counts[d]) < len(qst_settings()):
            missing.append(d)
            continue
        tables[d] = CountsTable(counts[d])
        rhos[d] = reconstruct_counts(tables[d], cal=cal)
    if not rhos:
        raise ValueError("every bucket lost at least one setting; increase shots")
    kept_total = sum(w for d, w in zip(discs, weights) if d in rhos)
    kept = {d: w / kept_total for d, w in zip(discs, weights) if d in rhos}
    return BucketTomography(rhos, kept, tables, missing)
