"""Pure-Python/numpy kernels. Same signatures and results as ``_kernels.pyx``."""

import numpy as np

OP_NEW, OP_GATE, OP_PERM, OP_MEAS = 0, 1, 2, 3
CODE_A = 3
_THREE = np.uint64(3)


def _sample(cdf, u):
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1).astype(np.uint64)


def run_trajectories(kind, reg_a, reg_b, table, draw_offset, uniforms, p2, verdict_fidelity,
                     raw_cdf, gate_cdf, perm_cdf, out_state, out_ok):
    """Run every trajectory (row of ``uniforms``) through the program.

    Vectorized over trajectories. Failed trajectories end with state 0 and
    ``out_ok == 0``.
    """
    ntraj = uniforms.shape[0]
    state = np.zeros(ntraj, dtype=np.uint64)
    ok = np.ones(ntraj, dtype=bool)
    for i in range(len(kind)):
        k = int(kind[i])
        off = int(draw_offset[i])
        sa = np.uint64(2 * int(reg_a[i]))
        if k == OP_NEW:
            code = _sample(raw_cdf, uniforms[:, off])
            state = (state & ~(_THREE << sa)) | (code << sa)
        elif k == OP_GATE:
            sb = np.uint64(2 * int(reg_b[i]))
            joint = ((state >> sa) & _THREE) | (((state >> sb) & _THREE) << np.uint64(2))
            out = table[i][joint.astype(np.intp)].astype(np.uint64)
            err = uniforms[:, off] >= p2
            if err.any():
                mask = _sample(gate_cdf, uniforms[:, off + 1])
                out = np.where(err, out ^ mask, out)
            clear = ~((_THREE << sa) | (_THREE << sb))
            state = (state & clear) | ((out & _THREE) << sa) | ((out >> np.uint64(2)) << sb)
        elif k == OP_PERM:
            code = (state >> sa) & _THREE
            out = table[i][code.astype(np.intp)].astype(np.uint64) ^ _sample(perm_cdf, uniforms[:, off])
            state = (state & ~(_THREE << sa)) | (out << sa)
        elif k == OP_MEAS:
            code = (state >> sa) & _THREE
            truth = (np.uint64(table[i][0]) >> code) & np.uint64(1)
            correct = uniforms[:, off] < verdict_fidelity
            reported = np.where(correct, truth, np.uint64(1) - truth)
            ok &= reported.astype(bool)
            state = state | (_THREE << sa)
        else:
            raise ValueError(f"unknown op kind {k}")
    state[~ok] = 0
    out_state[:] = state
    out_ok[:] = ok


def apply_gate_words(words, a, b, perm):
    """Apply a 16-entry permutation to pairs ``a`` and ``b`` of a packed register."""
    wa, oa = divmod(a, 32)
    wb, ob = divmod(b, 32)
    xa = int(words[wa])
    ca = (xa >> (2 * oa)) & 3
    cb = (int(words[wb]) >> (2 * ob)) & 3
    out = int(perm[ca | (cb << 2)])
    words[wa] = (xa & ~(3 << (2 * oa))) | ((out & 3) << (2 * oa))
    xb = int(words[wb])
    words[wb] = (xb & ~(3 << (2 * ob))) | ((out >> 2) << (2 * ob))


def apply_gates_words(words, a, b, gate_index, fused):
    """Apply a sequence of gates; ``fused[gate_index[j]]`` on pairs ``a[j], b[j]``."""
    for j in range(len(a)):
        apply_gate_words(words, int(a[j]), int(b[j]), fused[gate_index[j]])
