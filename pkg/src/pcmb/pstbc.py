"""Perfect space-time block codes for dimensions 2 and 4.

A codeword spreads D vector symbols ("threads") over a D x D block:

    Z = sum_v diag(G @ x_v) E^(v-1)

where G is the unitary generation matrix and E is the companion shift
with ones on the superdiagonal and the unit scalar g (= i here) in the
bottom-left corner.  Thread v therefore occupies the cyclic diagonal
starting at column v, and the entries it picks up on wrapping are exactly
the phases collected in the diagonal matrix returned by
:func:`phase_matrix`.

Dimension 2 is the Golden code, built from the golden ratio; dimension 4
is built from the four roots of t^4 - t^3 - 4 t^2 + 4 t + 1 (twice the
cosines of 2 pi k / 15 for k in {1, 2, 4, 8}).  Dimensions 3 and 6 use
hexagonal alphabets and are not supported.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, UnsupportedError

SUPPORTED_DIMENSIONS = (2, 4)


@dataclass(frozen=True)
class PerfectCode:
    d: int
    g_matrix: np.ndarray   # D x D unitary generation matrix
    g_scalar: complex      # unit scalar in the corner of E (= 1j for d in {2, 4})
    e_matrix: np.ndarray   # companion shift


@dataclass(frozen=True)
class SymbolMatrix:
    """D x D matrix whose column v holds the v-th input vector symbol."""

    x: np.ndarray


@dataclass(frozen=True)
class Codeword:
    z: np.ndarray


def _shift_matrix(d, g):
    e = np.zeros((d, d), dtype=np.complex128)
    for k in range(d - 1):
        e[k, k + 1] = 1.0
    e[d - 1, 0] = g
    return e


def dim4_angles():
    """The four algebraic numbers parameterizing the dimension-4 code."""
    return 2.0 * np.cos(np.array([4.0, 2.0, 16.0, 8.0]) * np.pi / 15.0)


def generation_matrix(d) -> PerfectCode:
    """Construct the perfect code of dimension d (2 or 4)."""
    if d not in SUPPORTED_DIMENSIONS:
        raise UnsupportedError(
            f"dimension {d} not supported (only 2 and 4 ship; 3 and 6 use "
            "hexagonal alphabets and live outside this package)")
    g_scalar = 1j
    if d == 2:
        alpha = (1.0 + np.sqrt(5.0)) / 2.0
        beta = (1.0 - np.sqrt(5.0)) / 2.0
        g = np.array([[1.0 + 1j * beta, alpha - 1j],
                      [1.0 + 1j * alpha, beta - 1j]]) / np.sqrt(5.0)
    else:
        th = dim4_angles()
        g = np.empty((4, 4), dtype=np.complex128)
        for u in range(4):
            t = th[u]
            g[u, 0] = 1.0 + 1j * (-3.0 + t**2)
            g[u, 1] = t + 1j * (-3.0 * t + t**3)
            g[u, 2] = (-3.0 * t + t**3) + 1j * (-1.0 + 4.0 * t - t**3)
            g[u, 3] = (-1.0 - 3.0 * t + t**2 + t**3) + 1j
        g /= np.sqrt(15.0)
    return PerfectCode(d=d, g_matrix=g, g_scalar=g_scalar,
                       e_matrix=_shift_matrix(d, g_scalar))


def thread_positions(d, v):
    """1-based (row, col) positions occupied by thread v, ordered by row."""
    if not 1 <= v <= d:
        raise InvalidInputError(f"thread index {v} out of range 1..{d}")
    return [(u, ((u + v - 2) % d) + 1) for u in range(1, d + 1)]


def phase_matrix(code: PerfectCode, v) -> np.ndarray:
    """Diagonal unitary collecting the wrap phases of thread v.

    Entry k is 1 while the thread has not wrapped past the last column
    (k <= D+1-v, 1-based) and the corner scalar g afterwards.
    """
    d = code.d
    if not 1 <= v <= d:
        raise InvalidInputError(f"thread index {v} out of range 1..{d}")
    phi = np.ones(d, dtype=np.complex128)
    for k in range(1, d + 1):
        if k >= d + 2 - v:
            phi[k - 1] = code.g_scalar
    return np.diag(phi)


def assemble(x, code: PerfectCode) -> Codeword:
    """Build the codeword Z = sum_v diag(G x_v) E^(v-1)."""
    xm = x.x if isinstance(x, SymbolMatrix) else np.asarray(x, dtype=np.complex128)
    d = code.d
    if xm.shape != (d, d):
        raise InvalidInputError(f"symbol matrix must be {d}x{d}, got {xm.shape}")
    z = np.zeros((d, d), dtype=np.complex128)
    for v in range(d):                       # thread index, 0-based
        w = code.g_matrix @ xm[:, v]
        for u in range(d):
            col = (u + v) % d
            wrapped = (u + v) >= d
            z[u, col] = w[u] * (code.g_scalar if wrapped else 1.0)
    return Codeword(z=z)
