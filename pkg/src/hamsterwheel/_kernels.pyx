# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled statevector kernels.

Every function mutates a C-contiguous complex128 array of 2**n amplitudes in
place.  Qubit 0 owns the most significant bit of the amplitude index, so the
bit position of qubit q counted from the least significant end is n-1-q.

The single-qubit loops run over pair index k in [0, 2**(n-1)); the two
amplitude indices of the pair are recovered with shift/mask tricks so the
loop has unit step and compiles to C without GIL interaction.
"""

from libc.math cimport sqrt


cdef inline Py_ssize_t _pair_index(Py_ssize_t k, int shift, Py_ssize_t mask) nogil:
    return ((k >> shift) << (shift + 1)) | (k & mask)


def apply_h(double complex[::1] v, int n, int q):
    cdef int shift = n - 1 - q
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << shift
    cdef Py_ssize_t mask = stride - 1
    cdef Py_ssize_t npairs = (<Py_ssize_t>1) << (n - 1)
    cdef Py_ssize_t k, i0, i1
    cdef double complex a, b
    cdef double inv = 1.0 / sqrt(2.0)
    with nogil:
        for k in range(npairs):
            i0 = _pair_index(k, shift, mask)
            i1 = i0 | stride
            a = v[i0]
            b = v[i1]
            v[i0] = (a + b) * inv
            v[i1] = (a - b) * inv


def apply_x(double complex[::1] v, int n, int q):
    cdef int shift = n - 1 - q
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << shift
    cdef Py_ssize_t mask = stride - 1
    cdef Py_ssize_t npairs = (<Py_ssize_t>1) << (n - 1)
    cdef Py_ssize_t k, i0, i1
    cdef double complex a
    with nogil:
        for k in range(npairs):
            i0 = _pair_index(k, shift, mask)
            i1 = i0 | stride
            a = v[i0]
            v[i0] = v[i1]
            v[i1] = a


def apply_y(double complex[::1] v, int n, int q):
    cdef int shift = n - 1 - q
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << shift
    cdef Py_ssize_t mask = stride - 1
    cdef Py_ssize_t npairs = (<Py_ssize_t>1) << (n - 1)
    cdef Py_ssize_t k, i0, i1
    cdef double complex a, b
    cdef double complex i_unit = 1j
    with nogil:
        for k in range(npairs):
            i0 = _pair_index(k, shift, mask)
            i1 = i0 | stride
            a = v[i0]
            b = v[i1]
            v[i0] = -i_unit * b
            v[i1] = i_unit * a


def apply_z(double complex[::1] v, int n, int q):
    _phase_one(v, n, q, -1.0 + 0.0j)


def apply_s(double complex[::1] v, int n, int q):
    _phase_one(v, n, q, 1.0j)


def apply_sdg(double complex[::1] v, int n, int q):
    _phase_one(v, n, q, -1.0j)


cdef void _phase_one(double complex[::1] v, int n, int q, double complex phase):
    cdef int shift = n - 1 - q
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << shift
    cdef Py_ssize_t mask = stride - 1
    cdef Py_ssize_t npairs = (<Py_ssize_t>1) << (n - 1)
    cdef Py_ssize_t k, i1
    with nogil:
        for k in range(npairs):
            i1 = _pair_index(k, shift, mask) | stride
            v[i1] = v[i1] * phase


def apply_cz(double complex[::1] v, int n, int qa, int qb):
    cdef int sa = n - 1 - qa
    cdef int sb = n - 1 - qb
    cdef int hi = sa if sa > sb else sb
    cdef int lo = sb if sa > sb else sa
    cdef Py_ssize_t lo_bit = (<Py_ssize_t>1) << lo
    cdef Py_ssize_t hi_bit = (<Py_ssize_t>1) << hi
    cdef Py_ssize_t lo_mask = lo_bit - 1
    cdef Py_ssize_t mid_mask = ((<Py_ssize_t>1) << (hi - lo - 1)) - 1
    cdef Py_ssize_t nquads = (<Py_ssize_t>1) << (n - 2)
    cdef Py_ssize_t k, low, mid, high, i
    with nogil:
        for k in range(nquads):
            low = k & lo_mask
            mid = (k >> lo) & mid_mask
            high = k >> (hi - 1)
            i = (high << (hi + 1)) | hi_bit | (mid << (lo + 1)) | lo_bit | low
            v[i] = -v[i]


def prob_one(double complex[::1] v, int n, int q):
    """Probability of reading 1 when measuring qubit q in the Z basis."""
    cdef int shift = n - 1 - q
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << shift
    cdef Py_ssize_t mask = stride - 1
    cdef Py_ssize_t npairs = (<Py_ssize_t>1) << (n - 1)
    cdef Py_ssize_t k, i1
    cdef double total = 0.0
    cdef double complex b
    with nogil:
        for k in range(npairs):
            i1 = _pair_index(k, shift, mask) | stride
            b = v[i1]
            total += b.real * b.real + b.imag * b.imag
    return total


def prob_plus_x(double complex[::1] v, int n, int q):
    """Probability of outcome 0 (the |+> projector) for an X-basis measurement."""
    cdef int shift = n - 1 - q
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << shift
    cdef Py_ssize_t mask = stride - 1
    cdef Py_ssize_t npairs = (<Py_ssize_t>1) << (n - 1)
    cdef Py_ssize_t k, i0
    cdef double total = 0.0
    cdef double complex c
    with nogil:
        for k in range(npairs):
            i0 = _pair_index(k, shift, mask)
            c = v[i0] + v[i0 | stride]
            total += c.real * c.real + c.imag * c.imag
    return 0.5 * total


def collapse_z(double complex[::1] v, int n, int q, int outcome, double prob):
    """Project qubit q onto Z outcome `outcome` and renormalize.

    `prob` is the probability of that outcome.
    """
    cdef int shift = n - 1 - q
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << shift
    cdef Py_ssize_t mask = stride - 1
    cdef Py_ssize_t npairs = (<Py_ssize_t>1) << (n - 1)
    cdef Py_ssize_t k, i0, i1
    cdef double scale = 1.0 / sqrt(prob)
    with nogil:
        for k in range(npairs):
            i0 = _pair_index(k, shift, mask)
            i1 = i0 | stride
            if outcome == 0:
                v[i0] = v[i0] * scale
                v[i1] = 0.0
            else:
                v[i1] = v[i1] * scale
                v[i0] = 0.0


def collapse_x(double complex[::1] v, int n, int q, int outcome, double prob):
    """Project qubit q onto the X outcome (0 -> |+>, 1 -> |->) and renormalize.

    `prob` is the probability of that outcome.
    """
    cdef int shift = n - 1 - q
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << shift
    cdef Py_ssize_t mask = stride - 1
    cdef Py_ssize_t npairs = (<Py_ssize_t>1) << (n - 1)
    cdef Py_ssize_t k, i0, i1
    cdef double complex c
    cdef double scale = 0.5 / sqrt(prob)
    with nogil:
        for k in range(npairs):
            i0 = _pair_index(k, shift, mask)
            i1 = i0 | stride
            if outcome == 0:
                c = (v[i0] + v[i1]) * scale
                v[i0] = c
                v[i1] = c
            else:
                c = (v[i0] - v[i1]) * scale
                v[i0] = c
                v[i1] = -c


def collapse_reset(double complex[::1] v, int n, int q, int outcome, double prob_one_val):
    """Project qubit q onto Z outcome `outcome`, then force it to |0>.

    Equivalent to collapse_z followed by a conditional X, fused into one pass.
    `prob_one_val` is the pre-measurement probability of outcome 1.
    """
    cdef int shift = n - 1 - q
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << shift
    cdef Py_ssize_t mask = stride - 1
    cdef Py_ssize_t npairs = (<Py_ssize_t>1) << (n - 1)
    cdef Py_ssize_t k, i0, i1
    cdef double scale
    if outcome == 0:
        scale = 1.0 / sqrt(1.0 - prob_one_val)
    else:
        scale = 1.0 / sqrt(prob_one_val)
    with nogil:
        for k in range(npairs):
            i0 = _pair_index(k, shift, mask)
            i1 = i0 | stride
            if outcome == 0:
                v[i0] = v[i0] * scale
            else:
                v[i0] = v[i1] * scale
            v[i1] = 0.0
