"""Hot numeric kernels (numba-compiled unless PCMB_BACKEND=numpy).

Everything here is plain-array code shared by the public decoder APIs and
the Monte Carlo harness.  The kernels tally real multiplications with the
package cost model (complex*complex = 4, complex*real = 2, real*real = 1)
and return the totals; the Python layer deposits them into the active
counter scope.

Counting conventions, applied identically to every scheme:

* per-channel precomputation (SVD, QR of the effective matrix, diagonal
  reciprocals, the effective-matrix build for joint decoding) is excluded
  -- it is amortized over the quasi-static block;
* the per-observation unitary rotation Q^H (.) and the sphere search are
  counted;
* multiplying by a unit phase (+-1, +-i) is a data move, not a
  multiplication;
* a bit-metric's cost is the cost of its constrained sphere search.
"""

import numpy as np

from ._accel import jit

# ---------------------------------------------------------------------------
# small linear algebra helpers
# ---------------------------------------------------------------------------


@jit
def qr_phase_fixed(a):
    """QR with the diagonal of R made real and non-negative."""
    q, r = np.linalg.qr(a)
    n = r.shape[0]
    for i in range(n):
        d = r[i, i]
        m = abs(d)
        if m > 0.0:
            ph = d / m
        else:
            ph = 1.0 + 0.0j
        cph = np.conj(ph)
        for j in range(n):
            q[j, i] = q[j, i] * ph
            r[i, j] = r[i, j] * cph
        r[i, i] = complex(abs(r[i, i]), 0.0)
    return q, r


@jit
def assemble_into(z, gmat, gscalar, x):
    """Fill z with the codeword for symbol matrix x (columns = threads)."""
    d = gmat.shape[0]
    for v in range(d):
        for u in range(d):
            acc = 0.0 + 0.0j
            for j in range(d):
                acc += gmat[u, j] * x[j, v]
            col = (u + v) % d
            if u + v >= d:
                acc = acc * gscalar
            z[u, col] = acc


# ---------------------------------------------------------------------------
# sphere decoder cores
# ---------------------------------------------------------------------------


@jit
def real_sd_core(y, r, cand, csize, xbest):
    """Schnorr-Euchner search over a real upper-triangular system.

    cand[k, :csize[k]] holds the allowed levels at depth k in ascending
    order; enumeration zig-zags around the unconstrained estimate.  The
    deepest layer (k = 0) is resolved by nearest-level rounding instead of
    enumeration, which keeps the result exactly ML because nothing lies
    below it.  Returns (metric, mults, leaves, visited); xbest receives
    the winning candidate indices per depth.
    """
    n = y.shape[0]
    cmax = cand.shape[1]
    order = np.empty((n, cmax), dtype=np.int64)
    keys = np.empty(cmax, dtype=np.float64)
    pos = np.zeros(n, dtype=np.int64)
    rhs = np.empty(n, dtype=np.float64)
    dist_above = np.zeros(n, dtype=np.float64)
    xcur = np.zeros(n, dtype=np.int64)
    inv_diag = np.empty(n, dtype=np.float64)
    for k in range(n):
        inv_diag[k] = 1.0 / r[k, k]
    best = np.inf
    mults = 0
    leaves = 0
    visited = 0

    k = n - 1
    need_setup = True
    while True:
        if need_setup:
            acc = y[k]
            for j in range(k + 1, n):
                acc -= r[k, j] * cand[j, xcur[j]]
                mults += 1
            rhs[k] = acc
            est = acc * inv_diag[k]
            mults += 1
            m = csize[k]
            if k == 0:
                # last layer: round to the nearest allowed level
                bi = 0
                bk = abs(cand[0, 0] - est)
                for i in range(1, m):
                    ki = abs(cand[0, i] - est)
                    if ki < bk:
                        bk = ki
                        bi = i
                leaves += 1
                visited += 1
                e = acc - r[0, 0] * cand[0, bi]
                d = dist_above[0] + e * e
                mults += 2
                if d < best:
                    best = d
                    xcur[0] = bi
                    for j in range(n):
                        xbest[j] = xcur[j]
                k += 1
                if k >= n:
                    break
                need_setup = False
                continue
            for i in range(m):
                keys[i] = abs(cand[k, i] - est)
            for i in range(m):
                key = keys[i]
                p = i
                while p > 0 and keys[order[k, p - 1]] > key:
                    order[k, p] = order[k, p - 1]
                    p -= 1
                order[k, p] = i
            pos[k] = 0
            need_setup = False
            continue

        advanced = False
        while pos[k] < csize[k]:
            idx = order[k, pos[k]]
            pos[k] += 1
            visited += 1
            e = rhs[k] - r[k, k] * cand[k, idx]
            d = dist_above[k] + e * e
            mults += 2
            if d < best:
                xcur[k] = idx
                dist_above[k - 1] = d
                k -= 1
                need_setup = True
                advanced = True
                break
            else:
                pos[k] = csize[k]  # ordered: nothing later can fit
        if not advanced:
            k += 1
            if k >= n:
                break
    return best, mults, leaves, visited


@jit
def complex_sd_core(y, r, cand_idx, csize, leaf_full, points, levels,
                    code_of_pos, nax, inv_step, xbest):
    """Schnorr-Euchner search over a complex triangular system.

    cand_idx[k, :csize[k]] lists the allowed point labels at depth k.
    The diagonal of r must be real positive (phase-fixed QR).  When
    leaf_full is 1 the deepest layer is resolved with a per-axis slicer
    on the square QAM grid; otherwise the allowed list is scanned.
    Returns (metric, mults, leaves, visited); xbest receives labels.
    """
    n = y.shape[0]
    cmax = cand_idx.shape[1]
    L = levels.shape[0]
    order = np.empty((n, cmax), dtype=np.int64)
    dt = np.empty((n, cmax), dtype=np.float64)
    pos = np.zeros(n, dtype=np.int64)
    rhs = np.empty(n, dtype=np.complex128)
    dist_above = np.zeros(n, dtype=np.float64)
    xcur = np.zeros(n, dtype=np.int64)
    inv_diag = np.empty(n, dtype=np.float64)
    rkk2 = np.empty(n, dtype=np.float64)
    mults = 0
    for k in range(n):
        dkk = r[k, k].real
        inv_diag[k] = 1.0 / dkk
        rkk2[k] = dkk * dkk
        mults += 1
    leaves = 0
    visited = 0
    best = np.inf

    k = n - 1
    need_setup = True
    while True:
        if need_setup:
            acc = y[k]
            for j in range(k + 1, n):
                acc -= r[k, j] * points[xcur[j]]
                mults += 4
            rhs[k] = acc
            est = acc * inv_diag[k]
            mults += 2
            m = csize[k]
            if k == 0:
                leaves += 1
                visited += 1
                if leaf_full == 1:
                    pr = (est.real - levels[0]) * inv_step
                    pi = (est.imag - levels[0]) * inv_step
                    mults += 2
                    ir = int(np.rint(pr))
                    ii = int(np.rint(pi))
                    if ir < 0:
                        ir = 0
                    elif ir > L - 1:
                        ir = L - 1
                    if ii < 0:
                        ii = 0
                    elif ii > L - 1:
                        ii = L - 1
                    lab = (code_of_pos[ir] << nax) | code_of_pos[ii]
                    dre = points[lab].real - est.real
                    dim_ = points[lab].imag - est.imag
                    dmin = dre * dre + dim_ * dim_
                    mults += 2
                else:
                    dmin = np.inf
                    lab = cand_idx[0, 0]
                    for i in range(m):
                        p = points[cand_idx[0, i]]
                        dre = p.real - est.real
                        dim_ = p.imag - est.imag
                        dd = dre * dre + dim_ * dim_
                        mults += 2
                        if dd < dmin:
                            dmin = dd
                            lab = cand_idx[0, i]
                d = dist_above[0] + rkk2[0] * dmin
                mults += 1
                if d < best:
                    best = d
                    xcur[0] = lab
                    for j in range(n):
                        xbest[j] = xcur[j]
                k += 1
                if k >= n:
                    break
                need_setup = False
                continue
            for i in range(m):
                p = points[cand_idx[k, i]]
                dre = p.real - est.real
                dim_ = p.imag - est.imag
                dt[k, i] = dre * dre + dim_ * dim_
                mults += 2
            for i in range(m):
                key = dt[k, i]
                p2 = i
                while p2 > 0 and dt[k, order[k, p2 - 1]] > key:
                    order[k, p2] = order[k, p2 - 1]
                    p2 -= 1
                order[k, p2] = i
            pos[k] = 0
            need_setup = False
            continue

        advanced = False
        while pos[k] < csize[k]:
            i = order[k, pos[k]]
            pos[k] += 1
            visited += 1
            d = dist_above[k] + rkk2[k] * dt[k, i]
            mults += 1
            if d < best:
                xcur[k] = cand_idx[k, i]
                dist_above[k - 1] = d
                k -= 1
                need_setup = True
                advanced = True
                break
            else:
                pos[k] = csize[k]
        if not advanced:
            k += 1
            if k >= n:
                break
    return best, mults, leaves, visited


# ---------------------------------------------------------------------------
# uncoded Monte Carlo trial loops
# ---------------------------------------------------------------------------


@jit
def pcmb_trials(hs, syms, noises, n0, gmat, points, levels, code_of_pos,
                nax, pop):
    """Per-thread decoding of beamformed perfect-code trials.

    hs: (B, D, D) channels; syms: (B, D, D) labels, syms[t, u, v] is
    coordinate u of thread v; noises: (B, D, D) unit-variance complex.
    Returns (bit_errors, mults, leaves, visited).
    """
    B = hs.shape[0]
    D = gmat.shape[0]
    L = levels.shape[0]
    sq = np.sqrt(n0)
    gscalar = 1j

    x = np.empty((D, D), dtype=np.complex128)
    z = np.empty((D, D), dtype=np.complex128)
    yb = np.empty(D, dtype=np.complex128)
    yt = np.empty(D, dtype=np.complex128)
    yr = np.empty(D, dtype=np.float64)
    cand = np.empty((D, L), dtype=np.float64)
    csize = np.full(D, L, dtype=np.int64)
    xre = np.empty(D, dtype=np.int64)
    xim = np.empty(D, dtype=np.int64)
    for c in range(D):
        for i in range(L):
            cand[c, i] = levels[i]

    bit_errors = 0
    mults = 0
    leaves = 0
    visited = 0
    for t in range(B):
        u_, s, vh_ = np.linalg.svd(hs[t])
        lam_g = np.empty((D, D), dtype=np.complex128)
        for i in range(D):
            for j in range(D):
                lam_g[i, j] = s[i] * gmat[i, j]
        q, r = qr_phase_fixed(lam_g)
        rr = np.empty((D, D), dtype=np.float64)
        for i in range(D):
            for j in range(D):
                rr[i, j] = r[i, j].real

        for u in range(D):
            for v in range(D):
                x[u, v] = points[syms[t, u, v]]
        assemble_into(z, gmat, gscalar, x)
        for v in range(D):
            # gather the thread observation and undo the wrap phases
            for u in range(D):
                col = (u + v) % D
                val = s[u] * z[u, col] + sq * noises[t, u, col]
                if u + v >= D:
                    val = val * (-1j)  # undo the wrap phase, conj(i) = -i
                yb[u] = val
            # rotate: yt = Q^H yb
            for i in range(D):
                acc = 0.0 + 0.0j
                for u in range(D):
                    acc += np.conj(q[u, i]) * yb[u]
                    mults += 4
                yt[i] = acc
            # real part
            for i in range(D):
                yr[i] = yt[i].real
            m_re, mm, lv, vs = real_sd_core(yr, rr, cand, csize, xre)
            mults += mm
            leaves += lv
            visited += vs
            # imaginary part
            for i in range(D):
                yr[i] = yt[i].imag
            m_im, mm, lv, vs = real_sd_core(yr, rr, cand, csize, xim)
            mults += mm
            leaves += lv
            visited += vs
            for u in range(D):
                lab = (code_of_pos[xre[u]] << nax) | code_of_pos[xim[u]]
                bit_errors += pop[lab ^ syms[t, u, v]]
    return bit_errors, mults, leaves, visited


@jit
def pc_trials(hs, syms, noises, n0, gmat, points, levels, code_of_pos,
              nax, pop):
    """Joint ML decoding of raw (non-beamformed) perfect-code trials.

    The codeword map is linear in the symbol matrix, so Y = H Z + N is
    vectorized into a D^2-dimensional complex system whose columns are
    the responses to unit symbol matrices; decoding is one sphere search
    over all D^2 coordinates.
    """
    B = hs.shape[0]
    D = gmat.shape[0]
    n = D * D
    M = points.shape[0]
    L = levels.shape[0]
    sq = np.sqrt(n0)
    gscalar = 1j
    step = levels[1] - levels[0]
    inv_step = 1.0 / step

    a = np.empty((n, n), dtype=np.complex128)
    x = np.empty((D, D), dtype=np.complex128)
    z = np.empty((D, D), dtype=np.complex128)
    yv = np.empty(n, dtype=np.complex128)
    yt = np.empty(n, dtype=np.complex128)
    cand_idx = np.empty((n, M), dtype=np.int64)
    csize = np.full(n, M, dtype=np.int64)
    xbest = np.empty(n, dtype=np.int64)
    for c in range(n):
        for i in range(M):
            cand_idx[c, i] = i

    bit_errors = 0
    mults = 0
    leaves = 0
    visited = 0
    for t in range(B):
        h = hs[t]
        # effective matrix: column (v*D + u) is vec(H M{e_u e_v^T}), vec col-major
        for v in range(D):
            for u in range(D):
                for i in range(D):
                    for j in range(D):
                        z[i, j] = 0.0 + 0.0j
                for w in range(D):
                    col = (w + v) % D
                    val = gmat[w, u]
                    if w + v >= D:
                        val = val * gscalar
                    z[w, col] = val
                for cc in range(D):
                    for rr_ in range(D):
                        acc = 0.0 + 0.0j
                        for kk in range(D):
                            acc += h[rr_, kk] * z[kk, cc]
                        a[cc * D + rr_, v * D + u] = acc
        q, r = qr_phase_fixed(a)

        for u in range(D):
            for v in range(D):
                x[u, v] = points[syms[t, u, v]]
        assemble_into(z, gmat, gscalar, x)
        for cc in range(D):
            for rr_ in range(D):
                acc = 0.0 + 0.0j
                for kk in range(D):
                    acc += h[rr_, kk] * z[kk, cc]
                yv[cc * D + rr_] = acc + sq * noises[t, rr_, cc]
        for i in range(n):
            acc = 0.0 + 0.0j
            for j in range(n):
                acc += np.conj(q[j, i]) * yv[j]
                mults += 4
            yt[i] = acc
        m_, mm, lv, vs = complex_sd_core(yt, r, cand_idx, csize, 1, points,
                                         levels, code_of_pos, nax, inv_step,
                                         xbest)
        mults += mm
        leaves += lv
        visited += vs
        for v in range(D):
            for u in range(D):
                bit_errors += pop[xbest[v * D + u] ^ syms[t, u, v]]
    return bit_errors, mults, leaves, visited


@jit
def fpmb_trials(hs, syms, noises, n0, theta, points, levels, code_of_pos,
                nax, pop):
    """Fully precoded multiple beamforming: y = diag(s) Theta x + n.

    One trial is one channel use carrying a D-dimensional vector symbol;
    decoding is a complex sphere search (R is complex in general).
    """
    B = hs.shape[0]
    D = theta.shape[0]
    M = points.shape[0]
    L = levels.shape[0]
    sq = np.sqrt(n0)
    step = levels[1] - levels[0]
    inv_step = 1.0 / step

    eff = np.empty((D, D), dtype=np.complex128)
    y = np.empty(D, dtype=np.complex128)
    yt = np.empty(D, dtype=np.complex128)
    cand_idx = np.empty((D, M), dtype=np.int64)
    csize = np.full(D, M, dtype=np.int64)
    xbest = np.empty(D, dtype=np.int64)
    for c in range(D):
        for i in range(M):
            cand_idx[c, i] = i

    bit_errors = 0
    mults = 0
    leaves = 0
    visited = 0
    for t in range(B):
        u_, s, vh_ = np.linalg.svd(hs[t])
        for i in range(D):
            for j in range(D):
                eff[i, j] = s[i] * theta[i, j]
        q, r = qr_phase_fixed(eff)
        for i in range(D):
            acc = 0.0 + 0.0j
            for j in range(D):
                acc += eff[i, j] * points[syms[t, j]]
            y[i] = acc + sq * noises[t, i]
        for i in range(D):
            acc = 0.0 + 0.0j
            for j in range(D):
                acc += np.conj(q[j, i]) * y[j]
                mults += 4
            yt[i] = acc
        m_, mm, lv, vs = complex_sd_core(yt, r, cand_idx, csize, 1, points,
                                         levels, code_of_pos, nax, inv_step,
                                         xbest)
        mults += mm
        leaves += lv
        visited += vs
        for j in range(D):
            bit_errors += pop[xbest[j] ^ syms[t, j]]
    return bit_errors, mults, leaves, visited


@jit
def mb_trials(hs, syms, noises, n0, points, levels, code_of_pos, nax, pop):
    """Uncoded multiple beamforming: independent per-stream slicing."""
    B = hs.shape[0]
    D = syms.shape[1]
    L = levels.shape[0]
    sq = np.sqrt(n0)
    step = levels[1] - levels[0]
    inv_step = 1.0 / step

    bit_errors = 0
    mults = 0
    for t in range(B):
        u_, s, vh_ = np.linalg.svd(hs[t])
        for j in range(D):
            y = s[j] * points[syms[t, j]] + sq * noises[t, j]
            est = y * (1.0 / s[j])
            mults += 2
            pr = (est.real - levels[0]) * inv_step
            pi = (est.imag - levels[0]) * inv_step
            mults += 2
            ir = int(np.rint(pr))
            ii = int(np.rint(pi))
            if ir < 0:
                ir = 0
            elif ir > L - 1:
                ir = L - 1
            if ii < 0:
                ii = 0
            elif ii > L - 1:
                ii = L - 1
            lab = (code_of_pos[ir] << nax) | code_of_pos[ii]
            bit_errors += pop[lab ^ syms[t, j]]
    return bit_errors, mults, 0, 0


# ---------------------------------------------------------------------------
# convolutional code / Viterbi
# ---------------------------------------------------------------------------


@jit
def mother_encode(bits, next_state, out_bits, mother):
    """Rate-1/2 feedforward encoding (bits already include the zero tail)."""
    s = 0
    for t in range(bits.shape[0]):
        b = bits[t]
        mother[2 * t] = out_bits[s, b, 0]
        mother[2 * t + 1] = out_bits[s, b, 1]
        s = next_state[s, b]


@jit
def viterbi_core(m0, m1, next_state, out_bits, n_steps, decoded):
    """Soft-input Viterbi over the rate-1/2 mother trellis.

    m0/m1 give the metric of mother bit t being 0/1 (punctured positions
    carry zeros).  The path starts and ends in state 0 (zero tail).
    """
    S = next_state.shape[0]
    INF = 1e300
    pm = np.full(S, INF)
    pm[0] = 0.0
    npm = np.empty(S, dtype=np.float64)
    bp = np.zeros((n_steps, S), dtype=np.int64)
    for t in range(n_steps):
        for i in range(S):
            npm[i] = INF
        for s in range(S):
            base = pm[s]
            if base >= INF:
                continue
            for b in range(2):
                ns = next_state[s, b]
                o0 = out_bits[s, b, 0]
                o1 = out_bits[s, b, 1]
                g = (m1[2 * t] if o0 == 1 else m0[2 * t]) \
                    + (m1[2 * t + 1] if o1 == 1 else m0[2 * t + 1])
                c = base + g
                if c < npm[ns]:
                    npm[ns] = c
                    bp[t, ns] = s * 2 + b
        for i in range(S):
            pm[i] = npm[i]
    s = 0
    for t in range(n_steps - 1, -1, -1):
        pk = bp[t, s]
        decoded[t] = pk & 1
        s = pk >> 1
    return pm[0]


# ---------------------------------------------------------------------------
# coded (BICMB) frame loops
# ---------------------------------------------------------------------------


@jit
def bicmb_pc_frames(infos, perms, hs, noises, n0, gmat, next_state, out_bits,
                    kept_idx, points, levels, code_of_pos, nax, subs):
    """Bit-interleaved coded beamformed perfect-code frames.

    One frame = one channel realization.  infos: (F, n_info) information
    bits; perms: (F, C) interleaver maps (interleaved position i carries
    coded bit perms[i]); noises: (F, n_cw, D, D).  subs[jj, b] lists the
    PAM levels whose axis label has bit jj equal to b.

    Returns (info_bit_errors, metric_mults, n_metrics, viterbi_frames).
    """
    F = infos.shape[0]
    n_info = infos.shape[1]
    C = perms.shape[1]
    D = gmat.shape[0]
    n_cw = noises.shape[1]
    L = levels.shape[0]
    Lh = subs.shape[2]
    nbits = 2 * nax
    n_steps = n_info + 6
    sq = np.sqrt(n0)
    gscalar = 1j

    tail_bits = np.empty(n_steps, dtype=np.int64)
    mother = np.empty(2 * n_steps, dtype=np.int64)
    coded = np.empty(C, dtype=np.int64)
    inter = np.empty(C, dtype=np.int64)
    x = np.empty((D, D), dtype=np.complex128)
    z = np.empty((D, D), dtype=np.complex128)
    yb = np.empty(D, dtype=np.complex128)
    yt_re = np.empty((n_cw, D, D), dtype=np.float64)
    yt_im = np.empty((n_cw, D, D), dtype=np.float64)
    cand = np.empty((D, L), dtype=np.float64)
    csize = np.empty(D, dtype=np.int64)
    xidx = np.empty(D, dtype=np.int64)
    g0 = np.empty(C, dtype=np.float64)
    g1 = np.empty(C, dtype=np.float64)
    m0 = np.zeros(2 * n_steps, dtype=np.float64)
    m1 = np.zeros(2 * n_steps, dtype=np.float64)
    decoded = np.empty(n_steps, dtype=np.int64)
    labels = np.empty(n_cw * D * D, dtype=np.int64)
    yv = np.empty(D, dtype=np.float64)

    bit_errors = 0
    metric_mults = 0
    n_metrics = 0
    for f in range(F):
        # encode, puncture, interleave
        for t in range(n_info):
            tail_bits[t] = infos[f, t]
        for t in range(n_info, n_steps):
            tail_bits[t] = 0
        mother_encode(tail_bits, next_state, out_bits, mother)
        for ci in range(C):
            coded[ci] = mother[kept_idx[ci]]
        for i in range(C):
            inter[i] = coded[perms[f, i]]
        # map bits to symbol labels (MSB first)
        n_sym = C // nbits
        for si in range(n_sym):
            lab = 0
            for bpos in range(nbits):
                lab = (lab << 1) | inter[si * nbits + bpos]
            labels[si] = lab

        # channel precomputation for the frame
        u_, s, vh_ = np.linalg.svd(hs[f])
        lam_g = np.empty((D, D), dtype=np.complex128)
        for i in range(D):
            for j in range(D):
                lam_g[i, j] = s[i] * gmat[i, j]
        q, r = qr_phase_fixed(lam_g)
        rr = np.empty((D, D), dtype=np.float64)
        for i in range(D):
            for j in range(D):
                rr[i, j] = r[i, j].real

        # transmit + rotate every thread observation of the frame
        for k in range(n_cw):
            for v in range(D):
                for u in range(D):
                    x[u, v] = points[labels[k * D * D + v * D + u]]
            assemble_into(z, gmat, gscalar, x)
            for v in range(D):
                for u in range(D):
                    col = (u + v) % D
                    val = s[u] * z[u, col] + sq * noises[f, k, u, col]
                    if u + v >= D:
                        val = val * (-1j)
                    yb[u] = val
                for i in range(D):
                    acc = 0.0 + 0.0j
                    for u in range(D):
                        acc += np.conj(q[u, i]) * yb[u]
                    yt_re[k, v, i] = acc.real
                    yt_im[k, v, i] = acc.imag

        # bit metrics: only the axis holding the coded bit is searched
        for qpos in range(C):
            si = qpos // nbits
            j = qpos % nbits
            k = si // (D * D)
            rpos = si % (D * D)
            v_thr = rpos // D
            u_crd = rpos % D
            on_real = j < nax
            jj = j if on_real else j - nax
            for i in range(D):
                yv[i] = yt_re[k, v_thr, i] if on_real else yt_im[k, v_thr, i]
            for b in range(2):
                for c in range(D):
                    if c == u_crd:
                        csize[c] = Lh
                        for i in range(Lh):
                            cand[c, i] = subs[jj, b, i]
                    else:
                        csize[c] = L
                        for i in range(L):
                            cand[c, i] = levels[i]
                met, mm, lv, vs = real_sd_core(yv, rr, cand, csize, xidx)
                metric_mults += mm
                n_metrics += 1
                if b == 0:
                    g0[qpos] = met
                else:
                    g1[qpos] = met

        # de-interleave, de-puncture, decode
        for t in range(2 * n_steps):
            m0[t] = 0.0
            m1[t] = 0.0
        for i in range(C):
            m0[kept_idx[perms[f, i]]] = g0[i]
            m1[kept_idx[perms[f, i]]] = g1[i]
        viterbi_core(m0, m1, next_state, out_bits, n_steps, decoded)
        for t in range(n_info):
            if decoded[t] != infos[f, t]:
                bit_errors += 1
    return bit_errors, metric_mults, n_metrics, F


@jit
def bicmb_fp_frames(infos, perms, hs, noises, n0, theta, next_state, out_bits,
                    kept_idx, points, levels, code_of_pos, nax,
                    subset_labels):
    """Bit-interleaved coded fully-precoded beamforming frames.

    Same frame structure as the perfect-code variant but symbols are sent
    D at a time through y = diag(s) Theta x + n and each bit metric is a
    constrained complex sphere search (R is complex in general).
    subset_labels[j, b] lists the point labels whose bit j equals b.
    """
    F = infos.shape[0]
    n_info = infos.shape[1]
    C = perms.shape[1]
    D = theta.shape[0]
    n_use = noises.shape[1]
    M = points.shape[0]
    L = levels.shape[0]
    Mh = subset_labels.shape[2]
    nbits = 2 * nax
    n_steps = n_info + 6
    sq = np.sqrt(n0)
    step = levels[1] - levels[0]
    inv_step = 1.0 / step

    tail_bits = np.empty(n_steps, dtype=np.int64)
    mother = np.empty(2 * n_steps, dtype=np.int64)
    coded = np.empty(C, dtype=np.int64)
    inter = np.empty(C, dtype=np.int64)
    eff = np.empty((D, D), dtype=np.complex128)
    y = np.empty(D, dtype=np.complex128)
    yt = np.empty((n_use, D), dtype=np.complex128)
    cand_idx = np.empty((D, M), dtype=np.int64)
    csize = np.empty(D, dtype=np.int64)
    xidx = np.empty(D, dtype=np.int64)
    g0 = np.empty(C, dtype=np.float64)
    g1 = np.empty(C, dtype=np.float64)
    m0 = np.zeros(2 * n_steps, dtype=np.float64)
    m1 = np.zeros(2 * n_steps, dtype=np.float64)
    decoded = np.empty(n_steps, dtype=np.int64)
    labels = np.empty(n_use * D, dtype=np.int64)

    bit_errors = 0
    metric_mults = 0
    n_metrics = 0
    for f in range(F):
        for t in range(n_info):
            tail_bits[t] = infos[f, t]
        for t in range(n_info, n_steps):
            tail_bits[t] = 0
        mother_encode(tail_bits, next_state, out_bits, mother)
        for ci in range(C):
            coded[ci] = mother[kept_idx[ci]]
        for i in range(C):
            inter[i] = coded[perms[f, i]]
        n_sym = C // nbits
        for si in range(n_sym):
            lab = 0
            for bpos in range(nbits):
                lab = (lab << 1) | inter[si * nbits + bpos]
            labels[si] = lab

        u_, s, vh_ = np.linalg.svd(hs[f])
        for i in range(D):
            for j in range(D):
                eff[i, j] = s[i] * theta[i, j]
        q, r = qr_phase_fixed(eff)

        for k in range(n_use):
            for i in range(D):
                acc = 0.0 + 0.0j
                for j in range(D):
                    acc += eff[i, j] * points[labels[k * D + j]]
                y[i] = acc + sq * noises[f, k, i]
            for i in range(D):
                acc = 0.0 + 0.0j
                for j in range(D):
                    acc += np.conj(q[j, i]) * y[j]
                yt[k, i] = acc

        for qpos in range(C):
            si = qpos // nbits
            j = qpos % nbits
            k = si // D
            n_crd = si % D
            for b in range(2):
                for c in range(D):
                    if c == n_crd:
                        csize[c] = Mh
                        for i in range(Mh):
                            cand_idx[c, i] = subset_labels[j, b, i]
                    else:
                        csize[c] = M
                        for i in range(M):
                            cand_idx[c, i] = i
                leaf_full = 0 if n_crd == 0 else 1
                met, mm, lv, vs = complex_sd_core(
                    yt[k], r, cand_idx, csize, leaf_full, points, levels,
                    code_of_pos, nax, inv_step, xidx)
                metric_mults += mm
                n_metrics += 1
                if b == 0:
                    g0[qpos] = met
                else:
                    g1[qpos] = met

        for t in range(2 * n_steps):
            m0[t] = 0.0
            m1[t] = 0.0
        for i in range(C):
            m0[kept_idx[perms[f, i]]] = g0[i]
            m1[kept_idx[perms[f, i]]] = g1[i]
        viterbi_core(m0, m1, next_state, out_bits, n_steps, decoded)
        for t in range(n_info):
            if decoded[t] != infos[f, t]:
                bit_errors += 1
    return bit_errors, metric_mults, n_metrics, F
