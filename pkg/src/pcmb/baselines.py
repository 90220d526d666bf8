"""Comparator systems: raw perfect coding and precoded beamforming.

* PC: the perfect code sent straight over H (no beamforming), decoded by
  exact joint ML.  The codeword map is linear in the symbol matrix, so
  Y = H Z + N vectorizes into a D^2-dimensional complex system solved
  with one sphere search.
* FPMB: full constellation precoding of the beamformed streams,
  y = diag(lam) Theta x + n with a unitary precoder Theta, decoded by a
  complex sphere search (R is complex in general, which is exactly the
  structural contrast with the perfect-code path).
* Uncoded MB: plain per-stream slicing, the no-precoding degenerate case.

The default precoder is the generation matrix of the matching dimension:
unitary and fully mixing, so comparisons against the perfect-code path
are structurally fair.  Any unitary matrix can be supplied from a text
file instead (one row per line, entries as "re,im" pairs).
"""

from dataclasses import dataclass

import numpy as np

from . import numerics, spheredec
from .errors import InvalidInputError, UnsupportedError
from .modulation import Constellation
from .pstbc import PerfectCode, assemble, generation_matrix

PRECODER_UNITARITY_TOL = 1e-10
#: joint search spaces considered desk scale for the raw-code decoder
PC_FEASIBLE = {2: (4, 16, 64, 256), 4: (4,)}


@dataclass(frozen=True)
class FpmbConfig:
    theta: np.ndarray   # unitary precoder
    s: int              # number of streams

    def __post_init__(self):
        t = np.asarray(self.theta)
        if t.shape != (self.s, self.s):
            raise InvalidInputError(f"precoder must be {self.s}x{self.s}")
        if np.abs(t.conj().T @ t - np.eye(self.s)).max() > PRECODER_UNITARITY_TOL:
            raise InvalidInputError("precoder is not unitary")


def default_precoder(d) -> FpmbConfig:
    """Generation matrix of dimension d as the stand-in precoder."""
    return FpmbConfig(theta=generation_matrix(d).g_matrix, s=d)


def load_precoder(path) -> FpmbConfig:
    """Read a unitary precoder from text: one row per line, 're,im' entries."""
    rows = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            entries = []
            for tok in line.split():
                re_s, im_s = tok.split(",")
                entries.append(complex(float(re_s), float(im_s)))
            rows.append(entries)
    theta = np.array(rows, dtype=np.complex128)
    if theta.ndim != 2 or theta.shape[0] != theta.shape[1]:
        raise InvalidInputError(f"precoder file {path} is not a square matrix")
    return FpmbConfig(theta=theta, s=theta.shape[0])


def save_precoder(path, theta):
    """Write a precoder in the text format accepted by load_precoder."""
    theta = np.asarray(theta, dtype=np.complex128)
    with open(path, "w") as f:
        for row in theta:
            f.write(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row) + "\n")


# ---------------------------------------------------------------------------
# PC: raw perfect code with joint ML
# ---------------------------------------------------------------------------


def pc_effective_matrix(h, code: PerfectCode) -> np.ndarray:
    """Matrix A with vec(H M{X}) = A vec(X), both vectorized column-major."""
    h = np.asarray(h, dtype=np.complex128)
    d = code.d
    n = d * d
    a = np.empty((n, n), dtype=np.complex128)
    for v in range(d):
        for u in range(d):
            x = np.zeros((d, d), dtype=np.complex128)
            x[u, v] = 1.0
            hz = h @ assemble(x, code).z
            a[:, v * d + u] = hz.T.ravel()   # column-major vec
    return a


def decode_pc(y, h, code: PerfectCode,
              constellation: Constellation) -> np.ndarray:
    """Exact joint ML for Y = H Z + N via the vectorized sphere search."""
    d = code.d
    if constellation.m not in PC_FEASIBLE.get(d, ()):
        raise UnsupportedError(
            f"joint decoding of the {d}x{d} code with M={constellation.m} is "
            f"beyond desk scale; feasible sizes: {PC_FEASIBLE.get(d, ())}")
    y = np.asarray(y, dtype=np.complex128)
    if y.shape != (d, d):
        raise InvalidInputError(f"received block must be {d}x{d}")
    a = pc_effective_matrix(h, code)
    factors = numerics.qr(a)
    yt = factors.q.conj().T @ y.T.ravel()
    res = spheredec.complex_sd(yt, factors.r, constellation)
    xhat = np.empty((d, d), dtype=np.complex128)
    for v in range(d):
        for u in range(d):
            xhat[u, v] = res.point[v * d + u]
    return xhat


# ---------------------------------------------------------------------------
# FPMB / uncoded MB
# ---------------------------------------------------------------------------


def fpmb_encode(x_vector, config: FpmbConfig) -> np.ndarray:
    """Precode one vector symbol: returns Theta x."""
    x_vector = np.asarray(x_vector, dtype=np.complex128).ravel()
    if x_vector.size != config.s:
        raise InvalidInputError(f"expected {config.s} streams")
    return config.theta @ x_vector


def fpmb_decode(y, lam, config: FpmbConfig,
                constellation: Constellation) -> np.ndarray:
    """ML decoding of y = diag(lam) Theta x + n via complex sphere search."""
    y = np.asarray(y, dtype=np.complex128).ravel()
    lam = np.asarray(lam, dtype=np.float64).ravel()
    if y.size != config.s or lam.size != config.s:
        raise InvalidInputError("dimension mismatch")
    factors = numerics.qr(lam[:, None] * config.theta)
    yt = factors.q.conj().T @ y
    res = spheredec.complex_sd(yt, factors.r, constellation)
    return res.point


def decode_mb(y, lam, constellation: Constellation) -> np.ndarray:
    """Uncoded multiple beamforming: per-stream nearest-point slicing."""
    y = np.asarray(y, dtype=np.complex128).ravel()
    lam = np.asarray(lam, dtype=np.float64).ravel()
    est = y / lam
    idx = np.argmin(np.abs(constellation.points[None, :] - est[:, None]), axis=1)
    return constellation.points[idx]
