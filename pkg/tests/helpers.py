"""Shared test utilities: independent oracles and small constructions."""

import numpy as np

SQ2 = np.sqrt(2.0)

I2 = np.eye(2, dtype=complex)
HM = np.array([[1, 1], [1, -1]], dtype=complex) / SQ2
XM = np.array([[0, 1], [1, 0]], dtype=complex)
YM = np.array([[0, -1j], [1j, 0]], dtype=complex)
ZM = np.array([[1, 0], [0, -1]], dtype=complex)

PAIR = np.array([1, 1, 1, -1], dtype=complex) / 2.0


def random_state_vector(n, rng):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return (v / np.linalg.norm(v)).astype(np.complex128)


def random_density_matrix(dim, rng, rank=None):
    rank = dim if rank is None else rank
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def haar_unitary(dim, rng):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def apply_matrix(vec, mat, targets, n):
    """Dense matrix application oracle: embed mat on `targets` of an n-qubit vector."""
    tensor = vec.reshape([2] * n)
    k = len(targets)
    tensor = np.moveaxis(tensor, targets, range(k))
    shaped = tensor.reshape(1 << k, -1)
    shaped = mat @ shaped
    tensor = shaped.reshape([2] * k + [2] * (n - k))
    tensor = np.moveaxis(tensor, range(k), targets)
    return tensor.reshape(-1)


def phase_distance(u, v):
    """min over global phase of ||e^{i t} u - v||."""
    u = np.asarray(u, complex).ravel()
    v = np.asarray(v, complex).ravel()
    inner = np.vdot(v, u)
    phase = 1.0 if abs(inner) == 0.0 else inner.conjugate() / abs(inner)
    return float(np.linalg.norm(phase * u - v))


def pair_vector(run):
    """Extract the pure (axis, holder) pair state from a noiseless run.

    Every non-pair qubit ends in a product state (|0>, |+> or |->), all of
    which have a real positive amplitude on |0>, so slicing those qubits at
    bit 0 and renormalizing recovers the pair amplitudes up to global phase.
    """
    state = run.state
    n = state.num_qubits
    amps = state.amplitudes.reshape([2] * n)
    index = [0] * n
    out = np.empty(4, dtype=complex)
    for a in (0, 1):
        for b in (0, 1):
            index[0] = a
            index[run.holder] = b
            out[2 * a + b] = amps[tuple(index)]
    norm = np.linalg.norm(out)
    assert norm > 1e-9, "pair slice has no support; state is not a product"
    return out / norm


def closed_form_target(m, bits):
    """(I x H^m Z^a X^b)|pair> with a/b the odd/even outcome parities."""
    a = 0
    for bit in bits[0::2]:
        a ^= bit
    b = 0
    for bit in bits[1::2]:
        b ^= bit
    local = np.linalg.matrix_power(HM, m % 2)
    local = local @ np.linalg.matrix_power(ZM, a) @ np.linalg.matrix_power(XM, b)
    return np.kron(I2, local) @ PAIR


def simplex_projection_oracle(v):
    """Exact Euclidean projection onto the simplex by support enumeration.

    For every non-empty support S the affine projection is
    x_i = v_i - (sum_S v - 1)/|S|; the true projection is the feasible
    candidate closest to v (KKT conditions make it unique).
    """
    v = np.asarray(v, float)
    d = v.size
    best = None
    best_dist = np.inf
    for mask in range(1, 1 << d):
        support = np.array([(mask >> i) & 1 for i in range(d)], bool)
        shift = (v[support].sum() - 1.0) / support.sum()
        x = np.where(support, v - shift, 0.0)
        if (x[support] < -1e-12).any():
            continue
        dist = float(np.sum((x - v) ** 2))
        if dist < best_dist - 1e-15:
            best_dist = dist
            best = x
    return best


def partial_trace_oracle(vec, keep, n):
    """Independent reduced-density-matrix construction via full outer product."""
    rho = np.outer(vec, vec.conj()).reshape([2] * (2 * n))
    drop = [q for q in range(n) if q not in keep]
    for q in sorted(drop, reverse=True):
        rho = np.trace(rho, axis1=q, axis2=q + rho.ndim // 2)
    k = len(keep)
    order = np.argsort(np.argsort(keep))
    tensor = rho.reshape([2] * (2 * k))
    perm = list(order) + [o + k for o in order]
    tensor = tensor.transpose(perm)
    return tensor.reshape(1 << k, 1 << k)
