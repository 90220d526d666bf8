"""Square M-QAM constellations with per-axis Gray labels.

A square constellation is the product of two sqrt(M)-PAM alphabets, one
per axis, each carrying half the label bits: the first log2(sqrt(M)) bits
select the real level, the rest select the imaginary level.  Levels are
Gray-labeled with a binary-reflected code so neighbours along an axis
differ in exactly one bit; the all-zeros label sits at the most positive
corner.  Points are normalized to unit average energy.

A symbol's label is stored as an integer (most significant bit = bit 0 of
the label), so the point array is simply indexed by label value; that
ordering is also the canonical tie-break order used by the decoders.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, UnsupportedError

SUPPORTED_SIZES = (4, 16, 64, 256)


def _brgc(i):
    return i ^ (i >> 1)


@dataclass(frozen=True)
class Constellation:
    m: int
    nbits: int                 # log2(m)
    nax: int                   # bits per axis = nbits // 2
    points: np.ndarray         # (m,) complex, indexed by packed label
    levels: np.ndarray         # (sqrt(m),) ascending PAM levels
    code_of_pos: np.ndarray    # Gray code of the level at ascending position p
    pos_of_code: np.ndarray    # inverse of code_of_pos
    axis_separable: bool = True

    @property
    def labels(self):
        """Bit labels in canonical (packed integer) order."""
        return [tuple((i >> (self.nbits - 1 - k)) & 1 for k in range(self.nbits))
                for i in range(self.m)]

    def label_of_point_index(self, idx):
        return self.labels[idx]

    def subset(self, j, b):
        """Indices of points whose label has value b in bit position j."""
        loc = BitSubset(j=j, b=b)
        return loc.member_indices(self)


@dataclass(frozen=True)
class BitSubset:
    """One half of the alphabet: labels with bit ``j`` equal to ``b``."""

    j: int
    b: int

    def member_indices(self, constellation):
        m, nbits = constellation.m, constellation.nbits
        if not (0 <= self.j < nbits):
            raise InvalidInputError(f"bit position {self.j} out of range")
        if self.b not in (0, 1):
            raise InvalidInputError("bit value must be 0 or 1")
        shift = nbits - 1 - self.j
        idx = np.arange(m)
        return idx[((idx >> shift) & 1) == self.b]


def pam_levels(m):
    """Per-axis PAM levels (ascending) and their Gray labels.

    The two-axis product has unit average energy, so a single axis
    carries energy 1/2.
    """
    if m not in SUPPORTED_SIZES:
        raise UnsupportedError(f"unsupported modulation size {m}; square QAM only")
    L = int(round(np.sqrt(m)))
    raw = np.arange(-(L - 1), L, 2, dtype=np.float64)  # -(L-1), ..., L-1
    scale = 1.0 / np.sqrt(2.0 * np.mean(raw**2))
    levels = raw * scale
    codes = np.array([_brgc(L - 1 - p) for p in range(L)], dtype=np.int64)
    return levels, codes


def square_qam(m) -> Constellation:
    """Build the canonical unit-energy square M-QAM constellation."""
    levels, codes = pam_levels(m)
    L = levels.size
    nbits = int(round(np.log2(m)))
    nax = nbits // 2
    pos_of_code = np.empty(L, dtype=np.int64)
    pos_of_code[codes] = np.arange(L)
    points = np.empty(m, dtype=np.complex128)
    for re_code in range(L):
        for im_code in range(L):
            label = (re_code << nax) | im_code
            points[label] = levels[pos_of_code[re_code]] + 1j * levels[pos_of_code[im_code]]
    return Constellation(m=m, nbits=nbits, nax=nax, points=points,
                         levels=levels, code_of_pos=codes, pos_of_code=pos_of_code)


def axis_level_subsets(constellation) -> np.ndarray:
    """subs[jj, b]: ascending PAM levels whose axis label bit jj equals b.

    jj counts from the most significant bit of the axis label, matching
    the within-axis position of a full-label bit.
    """
    L = constellation.levels.size
    nax = constellation.nax
    subs = np.empty((nax, 2, L // 2), dtype=np.float64)
    for jj in range(nax):
        shift = nax - 1 - jj
        for b in (0, 1):
            sel = [p for p in range(L)
                   if (constellation.code_of_pos[p] >> shift) & 1 == b]
            subs[jj, b] = constellation.levels[sel]
    return subs


def label_subsets(constellation) -> np.ndarray:
    """sub[j, b]: point labels whose full label bit j equals b (ascending)."""
    m, nbits = constellation.m, constellation.nbits
    out = np.empty((nbits, 2, m // 2), dtype=np.int64)
    for j in range(nbits):
        shift = nbits - 1 - j
        for b in (0, 1):
            out[j, b] = np.array([lab for lab in range(m)
                                  if (lab >> shift) & 1 == b], dtype=np.int64)
    return out


def map_bits(bits, constellation) -> complex:
    """Map a bit label (length log2 M) to its constellation point."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size != constellation.nbits:
        raise InvalidInputError(
            f"expected {constellation.nbits} bits, got {bits.size}")
    if np.any((bits != 0) & (bits != 1)):
        raise InvalidInputError("bits must be 0 or 1")
    label = 0
    for b in bits:
        label = (label << 1) | int(b)
    return complex(constellation.points[label])


def demap(symbol, constellation):
    """Nearest-point hard decision; returns the bit label."""
    idx = int(np.argmin(np.abs(constellation.points - symbol)))
    return constellation.labels[idx]
