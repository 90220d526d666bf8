"""Bit-interleaved coded modulation chain over the beamformed perfect code.

The transmit chain is: convolutional encoding (constraint-length-7
rate-1/2 mother code, octal generators 133/171, zero-tailed, punctured to
2/3 or 4/5), a seeded random bit interleaver spanning one frame, Gray
mapping, and perfect-code assembly.  The receiver computes per-bit
metrics

    Gamma(location, b) = min over candidates with that bit fixed
                         of the squared distance to the observation

and feeds them, de-interleaved, to a soft-input Viterbi decoder that
picks the codeword with the smallest metric sum.

Because the per-thread R matrix is real in dimensions 2 and 4 and square
QAM is separable, a bit metric only needs a search over the axis that
carries the bit (the other axis contributes the same constant to both
hypotheses of the bit and cancels in the Viterbi comparison).  The
production :func:`bit_metric` uses that split; the unsplit and exhaustive
variants are kept as oracles.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels, modulation
from .errors import InvalidInputError, UnsupportedError
from .modulation import Constellation
from .pcmb_decoder import PcmbPrecomputation, ThreadObservation

CONSTRAINT_LENGTH = 7
N_STATES = 64
GENERATORS = (0o133, 0o171)
TAIL_BITS = CONSTRAINT_LENGTH - 1

# mother-bit keep masks per puncturing period (Yasuda-style patterns)
_PUNCTURE = {
    (1, 2): (1, 1),
    (2, 3): (1, 1, 1, 0),
    (4, 5): (1, 1, 1, 0, 1, 0, 1, 0),
}


@dataclass(frozen=True)
class ConvCode:
    """Punctured convolutional code description."""

    rate_num: int
    rate_den: int
    generators: tuple = GENERATORS
    constraint_length: int = CONSTRAINT_LENGTH

    @property
    def keep_mask(self):
        return _PUNCTURE[(self.rate_num, self.rate_den)]

    @property
    def rate(self):
        return self.rate_num / self.rate_den


def conv_code(rate: str) -> ConvCode:
    """Build a code from a rate string: '1/2', '2/3' or '4/5'."""
    try:
        num_s, den_s = rate.split("/")
        key = (int(num_s), int(den_s))
    except ValueError as exc:
        raise InvalidInputError(f"malformed rate {rate!r}") from exc
    if key not in _PUNCTURE:
        raise UnsupportedError(f"unsupported code rate {rate}; pick 1/2, 2/3 or 4/5")
    return ConvCode(rate_num=key[0], rate_den=key[1])


def trellis_tables():
    """next_state[s, b] and out_bits[s, b, :] for the mother code."""
    next_state = np.zeros((N_STATES, 2), dtype=np.int64)
    out_bits = np.zeros((N_STATES, 2, 2), dtype=np.int64)
    for s in range(N_STATES):
        for b in (0, 1):
            full = (b << 6) | s
            for gi, gen in enumerate(GENERATORS):
                out_bits[s, b, gi] = bin(full & gen).count("1") & 1
            next_state[s, b] = (b << 5) | (s >> 1)
    return next_state, out_bits


_NEXT_STATE, _OUT_BITS = trellis_tables()


def kept_positions(code: ConvCode, n_steps) -> np.ndarray:
    """Mother-stream indices that survive puncturing for n_steps inputs."""
    if n_steps % code.rate_num:
        raise InvalidInputError(
            f"step count {n_steps} must be a multiple of {code.rate_num}")
    mask = np.tile(np.asarray(code.keep_mask, dtype=np.int64),
                   n_steps // code.rate_num)
    return np.nonzero(mask)[0].astype(np.int64)


def conv_encode(info_bits, code: ConvCode) -> np.ndarray:
    """Zero-tailed, punctured encoding of an information bit sequence."""
    info_bits = np.asarray(info_bits, dtype=np.int64).ravel()
    if info_bits.size < 1:
        raise InvalidInputError("empty message")
    n_steps = info_bits.size + TAIL_BITS
    if n_steps % code.rate_num:
        raise InvalidInputError(
            f"message+tail length {n_steps} must be a multiple of "
            f"{code.rate_num} for rate {code.rate_num}/{code.rate_den}")
    tailed = np.concatenate([info_bits, np.zeros(TAIL_BITS, dtype=np.int64)])
    mother = np.empty(2 * n_steps, dtype=np.int64)
    _kernels.mother_encode(tailed, _NEXT_STATE, _OUT_BITS, mother)
    return mother[kept_positions(code, n_steps)]


def interleave(bits, seed) -> np.ndarray:
    """Seeded uniform permutation of one transmission block."""
    bits = np.asarray(bits)
    perm = interleaver_permutation(bits.size, seed)
    return bits[perm]


def deinterleave(bits, seed) -> np.ndarray:
    """Inverse of :func:`interleave` for the same seed and length."""
    bits = np.asarray(bits)
    perm = interleaver_permutation(bits.size, seed)
    out = np.empty_like(bits)
    out[perm] = bits
    return out


def interleaver_permutation(n, seed) -> np.ndarray:
    return np.random.default_rng(seed).permutation(n).astype(np.int64)


# ---------------------------------------------------------------------------
# bit locations and metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BitLocation:
    """Position of one coded bit in the codeword stream.

    k: codeword index; m: thread (column of the symbol matrix) whose
    observation carries the bit, 1-based; n: coordinate inside that
    thread's vector symbol, 1-based; j: bit position in the symbol label,
    0-based from the most significant bit.
    """

    k: int
    m: int
    n: int
    j: int


def bit_location(stream_pos, d, nbits) -> BitLocation:
    """Map an (interleaved) stream position to its codeword location."""
    sym = stream_pos // nbits
    j = stream_pos % nbits
    k = sym // (d * d)
    rpos = sym % (d * d)
    return BitLocation(k=k, m=rpos // d + 1, n=rpos % d + 1, j=j)


@dataclass(frozen=True)
class BitMetricTable:
    """Per coded bit: metric of hypothesis 0 and hypothesis 1."""

    gamma0: np.ndarray
    gamma1: np.ndarray


def _check_location(loc, d, nbits):
    if not (1 <= loc.m <= d and 1 <= loc.n <= d and 0 <= loc.j < nbits):
        raise InvalidInputError(f"bit location {loc} out of range")


def bit_metric(obs: ThreadObservation, pre: PcmbPrecomputation,
               loc: BitLocation, b, constellation: Constellation) -> float:
    """Production bit metric: search only the axis carrying the bit.

    Requires the real-R split; falls back to the unsplit complex search
    otherwise.  The discarded axis adds the same constant to both bit
    hypotheses, so Viterbi decisions are unchanged.
    """
    d = pre.r.shape[0]
    _check_location(loc, d, constellation.nbits)
    if not (pre.r_is_real and constellation.axis_separable):
        return bit_metric_unsplit(obs, pre, loc, b, constellation)
    nax = constellation.nax
    on_real = loc.j < nax
    jj = loc.j if on_real else loc.j - nax
    y = obs.y_tilde.real if on_real else obs.y_tilde.imag
    subs = modulation.axis_level_subsets(constellation)
    levels = constellation.levels
    L = levels.size
    cand = np.empty((d, L), dtype=np.float64)
    csize = np.empty(d, dtype=np.int64)
    for c in range(d):
        if c == loc.n - 1:
            csize[c] = L // 2
            cand[c, :L // 2] = subs[jj, b]
        else:
            csize[c] = L
            cand[c] = levels
    xbest = np.empty(d, dtype=np.int64)
    metric, _, _, _ = _kernels.real_sd_core(np.ascontiguousarray(y),
                                            pre.r_real, cand, csize, xbest)
    return float(metric)


def bit_metric_unsplit(obs: ThreadObservation, pre: PcmbPrecomputation,
                       loc: BitLocation, b,
                       constellation: Constellation) -> float:
    """Per-thread metric over the full complex candidate set."""
    d = pre.r.shape[0]
    _check_location(loc, d, constellation.nbits)
    m = constellation.m
    lab_subs = modulation.label_subsets(constellation)
    cand_idx = np.empty((d, m), dtype=np.int64)
    csize = np.empty(d, dtype=np.int64)
    for c in range(d):
        if c == loc.n - 1:
            csize[c] = m // 2
            cand_idx[c, :m // 2] = lab_subs[loc.j, b]
        else:
            csize[c] = m
            cand_idx[c] = np.arange(m)
    xbest = np.empty(d, dtype=np.int64)
    levels = constellation.levels
    inv_step = 1.0 / (levels[1] - levels[0])
    leaf_full = 0 if loc.n - 1 == 0 else 1
    metric, _, _, _ = _kernels.complex_sd_core(
        obs.y_tilde, pre.r, cand_idx, csize, leaf_full, constellation.points,
        levels, constellation.code_of_pos, constellation.nax, inv_step, xbest)
    return float(metric)


def bit_metric_exhaustive(obs: ThreadObservation, pre: PcmbPrecomputation,
                          loc: BitLocation, b,
                          constellation: Constellation) -> float:
    """Oracle: enumerate the thread's candidate set against y_breve.

    Works on the unrotated observation through the physical map
    Phi_m diag(lam) G, so it is independent of the QR/rotation path it
    validates.
    """
    d = pre.r.shape[0]
    _check_location(loc, d, constellation.nbits)
    a = (pre.phases[loc.m - 1][:, None]) * (pre.q @ pre.r)
    members = constellation.subset(loc.j, b)
    best = np.inf
    idx = np.empty(d, dtype=np.int64)
    m = constellation.m
    counts = [m // 2 if c == loc.n - 1 else m for c in range(d)]
    total = int(np.prod(counts))
    for flat in range(total):
        f = flat
        for c in range(d - 1, -1, -1):
            idx[c] = f % counts[c]
            f //= counts[c]
        x = np.empty(d, dtype=np.complex128)
        for c in range(d):
            lab = members[idx[c]] if c == loc.n - 1 else idx[c]
            x[c] = constellation.points[lab]
        metric = float(np.sum(np.abs(obs.y_breve - a @ x) ** 2))
        if metric < best:
            best = metric
    return best


def axis_ml_metric(obs: ThreadObservation, pre: PcmbPrecomputation, axis,
                   constellation: Constellation) -> float:
    """Unconstrained single-axis ML metric ('re' or 'im').

    This is the constant by which the unsplit per-thread metric exceeds
    the split metric of the other axis.
    """
    y = obs.y_tilde.real if axis == "re" else obs.y_tilde.imag
    d = pre.r.shape[0]
    levels = constellation.levels
    cand = np.tile(levels, (d, 1))
    csize = np.full(d, levels.size, dtype=np.int64)
    xbest = np.empty(d, dtype=np.int64)
    metric, _, _, _ = _kernels.real_sd_core(np.ascontiguousarray(y),
                                            pre.r_real, cand, csize, xbest)
    return float(metric)


# ---------------------------------------------------------------------------
# Viterbi decoding
# ---------------------------------------------------------------------------


def viterbi_decode(table: BitMetricTable, code: ConvCode) -> np.ndarray:
    """Minimum-metric-sum codeword search over the punctured trellis.

    The table rows are in coded (de-interleaved) stream order; punctured
    mother positions are restored with neutral metrics.  Returns the
    information bits (tail removed).
    """
    g0 = np.asarray(table.gamma0, dtype=np.float64).ravel()
    g1 = np.asarray(table.gamma1, dtype=np.float64).ravel()
    if g0.size != g1.size:
        raise InvalidInputError("metric arrays differ in length")
    c = g0.size
    if (c * code.rate_num) % code.rate_den:
        raise InvalidInputError(
            f"metric count {c} does not fit rate {code.rate_num}/{code.rate_den}")
    n_steps = c * code.rate_num // code.rate_den
    if n_steps <= TAIL_BITS:
        raise InvalidInputError("metric table shorter than the code tail")
    kept = kept_positions(code, n_steps)
    m0 = np.zeros(2 * n_steps, dtype=np.float64)
    m1 = np.zeros(2 * n_steps, dtype=np.float64)
    m0[kept] = g0
    m1[kept] = g1
    decoded = np.empty(n_steps, dtype=np.int64)
    _kernels.viterbi_core(m0, m1, _NEXT_STATE, _OUT_BITS, n_steps, decoded)
    return decoded[:n_steps - TAIL_BITS]


# ---------------------------------------------------------------------------
# end-to-end frame
# ---------------------------------------------------------------------------


def frame_geometry(d, m, code: ConvCode, target_codewords=None):
    """(n_codewords, info_bits) for an integral frame.

    The default frame spans 2 * log2(M) * D^2 codewords, adjusted upward
    minimally so the coded capacity matches the punctured code and the
    tail fits.
    """
    nbits = int(round(np.log2(m)))
    if target_codewords is None:
        target_codewords = 2 * nbits * d * d
    n_cw = max(1, target_codewords)
    while True:
        capacity = n_cw * d * d * nbits
        steps = capacity * code.rate_num
        if steps % code.rate_den == 0:
            n_steps = steps // code.rate_den
            if n_steps > TAIL_BITS and n_steps % code.rate_num == 0:
                return n_cw, n_steps - TAIL_BITS
        n_cw += 1


@dataclass(frozen=True)
class LinkResult:
    decoded: np.ndarray
    bit_errors: int
    n_info_bits: int

    @property
    def ber(self):
        return self.bit_errors / self.n_info_bits


def bicmb_pc_link(message, channel, code, conv: ConvCode, snr_db, seed,
                  constellation: Constellation) -> LinkResult:
    """One coded frame end to end over a fixed channel realization.

    message length must match the frame geometry for (d, M, rate); use
    :func:`frame_geometry` to size it.  The seed drives the interleaver
    and the noise, so a fixed (channel, seed) pair reproduces exactly.
    """
    from . import channel as chan
    from . import pcmb_decoder
    from .pstbc import assemble

    message = np.asarray(message, dtype=np.int64).ravel()
    d = code.d
    nbits = constellation.nbits
    coded = conv_encode(message, conv)
    c = coded.size
    if c % (d * d * nbits):
        raise InvalidInputError(
            "coded length does not fill a whole number of codewords")
    n_cw = c // (d * d * nbits)
    rng = np.random.default_rng(seed)
    perm = interleaver_permutation(c, rng.integers(2**63))
    inter = coded[perm]

    labels = np.empty(n_cw * d * d, dtype=np.int64)
    for si in range(labels.size):
        lab = 0
        for bpos in range(nbits):
            lab = (lab << 1) | int(inter[si * nbits + bpos])
        labels[si] = lab

    lam = channel.singular_values
    pre = pcmb_decoder.precompute(lam, code)
    noise_model = chan.NoiseModel.from_db(snr_db, d)

    g0 = np.empty(c)
    g1 = np.empty(c)
    for k in range(n_cw):
        x = np.empty((d, d), dtype=np.complex128)
        for v in range(d):
            for u in range(d):
                x[u, v] = constellation.points[labels[k * d * d + v * d + u]]
        z = assemble(x, code).z
        y = chan.received_pcmb(lam, z, noise_model, rng)
        obs = pcmb_decoder.extract_threads(y, code, pre)
        for qoff in range(d * d * nbits):
            qpos = k * d * d * nbits + qoff
            loc = bit_location(qpos, d, nbits)
            o = obs[loc.m - 1]
            g0[qpos] = bit_metric(o, pre, loc, 0, constellation)
            g1[qpos] = bit_metric(o, pre, loc, 1, constellation)

    g0_coded = np.empty(c)
    g1_coded = np.empty(c)
    g0_coded[perm] = g0
    g1_coded[perm] = g1
    decoded = viterbi_decode(BitMetricTable(g0_coded, g1_coded), conv)
    errors = int(np.sum(decoded != message))
    return LinkResult(decoded=decoded, bit_errors=errors,
                      n_info_bits=message.size)
