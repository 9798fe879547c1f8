"""Pure-numpy twin of the compiled kernels.

Same function-by-function contract as `_kernels`: in-place mutation of a
C-contiguous complex128 array of 2**n amplitudes, with qubit 0 holding the
most significant bit of the amplitude index.  Used whenever the compiled
extension is unavailable or explicitly deselected.
"""

import math

import numpy as np

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def _split(v, n, q):
    """View v as (blocks, 2, tail) with axis 1 indexing the bit of qubit q."""
    tail = 1 << (n - 1 - q)
    return v.reshape(-1, 2, tail)


def apply_h(v, n, q):
    w = _split(v, n, q)
    a = w[:, 0, :].copy()
    w[:, 0, :] += w[:, 1, :]
    w[:, 0, :] *= _INV_SQRT2
    w[:, 1, :] *= -1.0
    w[:, 1, :] += a
    w[:, 1, :] *= _INV_SQRT2


def apply_x(v, n, q):
    w = _split(v, n, q)
    a = w[:, 0, :].copy()
    w[:, 0, :] = w[:, 1, :]
    w[:, 1, :] = a


def apply_y(v, n, q):
    w = _split(v, n, q)
    a = w[:, 0, :].copy()
    w[:, 0, :] = w[:, 1, :]
    w[:, 0, :] *= -1.0j
    w[:, 1, :] = a
    w[:, 1, :] *= 1.0j


def apply_z(v, n, q):
    w = _split(v, n, q)
    w[:, 1, :] *= -1.0


def apply_s(v, n, q):
    w = _split(v, n, q)
    w[:, 1, :] *= 1.0j


def apply_sdg(v, n, q):
    w = _split(v, n, q)
    w[:, 1, :] *= -1.0j


def apply_cz(v, n, qa, qb):
    qlo, qhi = (qa, qb) if qa < qb else (qb, qa)
    tail = 1 << (n - 1 - qhi)
    mid = 1 << (qhi - qlo - 1)
    w = v.reshape(-1, 2, mid, 2, tail)
    w[:, 1, :, 1, :] *= -1.0


def prob_one(v, n, q):
    """Probability of reading 1 when measuring qubit q in the Z basis."""
    w = _split(v, n, q)[:, 1, :]
    return float(np.sum(w.real * w.real + w.imag * w.imag))


def prob_plus_x(v, n, q):
    """Probability of outcome 0 (the |+> projector) for an X-basis measurement."""
    w = _split(v, n, q)
    c = w[:, 0, :] + w[:, 1, :]
    return 0.5 * float(np.sum(c.real * c.real + c.imag * c.imag))


def collapse_z(v, n, q, outcome, prob):
    """Project qubit q onto Z outcome `outcome` and renormalize.

    `prob` is the probability of that outcome.
    """
    w = _split(v, n, q)
    scale = 1.0 / math.sqrt(prob)
    w[:, outcome, :] *= scale
    w[:, 1 - outcome, :] = 0.0


def collapse_x(v, n, q, outcome, prob):
    """Project qubit q onto the X outcome (0 -> |+>, 1 -> |->) and renormalize.

    `prob` is the probability of that outcome.
    """
    w = _split(v, n, q)
    scale = 0.5 / math.sqrt(prob)
    if outcome == 0:
        c = (w[:, 0, :] + w[:, 1, :]) * scale
        w[:, 0, :] = c
        w[:, 1, :] = c
    else:
        c = (w[:, 0, :] - w[:, 1, :]) * scale
        w[:, 0, :] = c
        w[:, 1, :] = -c


def collapse_reset(v, n, q, outcome, prob_one_val):
    """Project qubit q onto Z outcome `outcome`, then force it to |0>.

    Equivalent to collapse_z followed by a conditional X, fused into one pass.
    `prob_one_val` is the pre-measurement probability of outcome 1.
    """
    w = _split(v, n, q)
    if outcome == 0:
        w[:, 0, :] *= 1.0 / math.sqrt(1.0 - prob_one_val)
    else:
        w[:, 0, :] = w[:, 1, :]
        w[:, 0, :] *= 1.0 / math.sqrt(prob_one_val)
    w[:, 1, :] = 0.0
