# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Must stay result-identical to ``_pykernels.py``."""

from libc.stdint cimport uint8_t, uint64_t, int32_t

cdef enum:
    OP_NEW = 0
    OP_GATE = 1
    OP_PERM = 2
    OP_MEAS = 3


cdef inline uint64_t _sample(const double[::1] cdf, double u) noexcept nogil:
    cdef Py_ssize_t j = 0
    cdef Py_ssize_t last = cdf.shape[0] - 1
    while j < last and u >= cdf[j]:
        j += 1
    return <uint64_t>j


def run_trajectories(const signed char[::1] kind, const int32_t[::1] reg_a, const int32_t[::1] reg_b,
                     const uint8_t[:, ::1] table, const int32_t[::1] draw_offset,
                     const double[:, ::1] uniforms, double p2, double verdict_fidelity,
                     const double[::1] raw_cdf, const double[::1] gate_cdf, const double[::1] perm_cdf,
                     uint64_t[::1] out_state, uint8_t[::1] out_ok):
    cdef Py_ssize_t ntraj = uniforms.shape[0]
    cdef Py_ssize_t nops = kind.shape[0]
    cdef Py_ssize_t t, i, off
    cdef uint64_t state, code, joint, outc, truth, reported, sa, sb
    cdef int ok
    with nogil:
        for t in range(ntraj):
            state = 0
            ok = 1
            for i in range(nops):
                off = draw_offset[i]
                sa = 2 * <uint64_t>reg_a[i]
                if kind[i] == OP_NEW:
                    code = _sample(raw_cdf, uniforms[t, off])
                    state = (state & ~(<uint64_t>3 << sa)) | (code << sa)
                elif kind[i] == OP_GATE:
                    sb = 2 * <uint64_t>reg_b[i]
                    joint = ((state >> sa) & 3) | (((state >> sb) & 3) << 2)
                    outc = table[i, joint]
                    if uniforms[t, off] >= p2:
                        outc = outc ^ _sample(gate_cdf, uniforms[t, off + 1])
                    state = state & ~((<uint64_t>3 << sa) | (<uint64_t>3 << sb))
                    state = state | ((outc & 3) << sa) | ((outc >> 2) << sb)
                elif kind[i] == OP_PERM:
                    code = (state >> sa) & 3
                    outc = table[i, code] ^ _sample(perm_cdf, uniforms[t, off])
                    state = (state & ~(<uint64_t>3 << sa)) | (outc << sa)
                else:
                    code = (state >> sa) & 3
                    truth = (<uint64_t>table[i, 0] >> code) & 1
                    if uniforms[t, off] < verdict_fidelity:
                        reported = truth
                    else:
                        reported = 1 - truth
                    if reported == 0:
                        ok = 0
                        break
                    state = state | (<uint64_t>3 << sa)
            if ok:
                out_state[t] = state
            else:
                out_state[t] = 0
            out_ok[t] = ok


cdef inline void _apply(uint64_t[::1] words, Py_ssize_t a, Py_ssize_t b, const uint8_t[::1] perm) noexcept nogil:
    cdef Py_ssize_t wa = a >> 5
    cdef Py_ssize_t wb = b >> 5
    cdef uint64_t sa = 2 * <uint64_t>(a & 31)
    cdef uint64_t sb = 2 * <uint64_t>(b & 31)
    cdef uint64_t ca = (words[wa] >> sa) & 3
    cdef uint64_t cb = (words[wb] >> sb) & 3
    cdef uint64_t outc = perm[ca | (cb << 2)]
    words[wa] = (words[wa] & ~(<uint64_t>3 << sa)) | ((outc & 3) << sa)
    words[wb] = (words[wb] & ~(<uint64_t>3 << sb)) | ((outc >> 2) << sb)


def apply_gate_words(uint64_t[::1] words, Py_ssize_t a, Py_ssize_t b, const uint8_t[::1] perm):
    _apply(words, a, b, perm)


def apply_gates_words(uint64_t[::1] words, const int32_t[::1] a, const int32_t[::1] b,
                      const int32_t[::1] gate_index, const uint8_t[:, ::1] fused):
    cdef Py_ssize_t j
    with nogil:
        for j in range(a.shape[0]):
            _apply(words, a[j], b[j], fused[gate_index[j]])
