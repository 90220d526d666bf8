"""Integer-least-squares search engines.

Three entry points, all exact ML over their candidate sets:

* :func:`real_sd` -- Schnorr-Euchner search over a real triangular system
  with per-coordinate level lists and nearest-level rounding at the
  deepest layer;
* :func:`complex_sd` -- the complex-valued counterpart over constellation
  points with a slicer at the deepest layer;
* :func:`brute_force_ml` -- exhaustive search, the testing oracle for the
  other two (guarded to desk scale).

Ties are broken toward the earliest candidate in canonical constellation
order, so results are deterministic.  Searches report the number of leaf
candidates they evaluated in ``SearchResult.visited``; real-multiplication
tallies flow into any active :func:`pcmb.numerics.counted_context` scope.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels, numerics
from .errors import InvalidInputError
from .modulation import Constellation

BRUTE_FORCE_GUARD = 10**6


@dataclass(frozen=True)
class RealLattice:
    """Real upper-triangular system plus the allowed level set."""

    r: np.ndarray        # (n, n) upper triangular, positive diagonal
    levels: np.ndarray   # ascending PAM levels, shared by all coordinates


@dataclass(frozen=True)
class SearchResult:
    point: np.ndarray    # decoded level values (real) or points (complex)
    indices: np.ndarray  # candidate indices (real: level index; complex: label)
    metric: float        # squared Euclidean distance of the minimizer
    visited: int         # leaf candidates evaluated


def real_sd(y, lattice: RealLattice) -> SearchResult:
    """Exact argmin of ||y - R x||^2 over per-coordinate PAM levels."""
    y = np.asarray(y, dtype=np.float64).ravel()
    r = np.asarray(lattice.r, dtype=np.float64)
    levels = np.asarray(lattice.levels, dtype=np.float64).ravel()
    n = y.size
    if r.shape != (n, n):
        raise InvalidInputError(f"R must be {n}x{n}, got {r.shape}")
    if levels.size == 0:
        raise InvalidInputError("empty level set")
    cand = np.tile(levels, (n, 1))
    csize = np.full(n, levels.size, dtype=np.int64)
    xbest = np.empty(n, dtype=np.int64)
    metric, mults, leaves, _ = _kernels.real_sd_core(y, r, cand, csize, xbest)
    numerics.add_real_mults(mults)
    return SearchResult(point=levels[xbest], indices=xbest.copy(),
                        metric=float(metric), visited=int(leaves))


def complex_sd(y, r, constellation: Constellation) -> SearchResult:
    """Exact argmin of ||y - R x||^2 over constellation^n, R complex."""
    y = np.asarray(y, dtype=np.complex128).ravel()
    r = np.asarray(r, dtype=np.complex128)
    n = y.size
    if r.shape != (n, n):
        raise InvalidInputError(f"R must be {n}x{n}, got {r.shape}")
    m = constellation.m
    cand_idx = np.tile(np.arange(m, dtype=np.int64), (n, 1))
    csize = np.full(n, m, dtype=np.int64)
    xbest = np.empty(n, dtype=np.int64)
    levels = constellation.levels
    inv_step = 1.0 / (levels[1] - levels[0])
    metric, mults, leaves, _ = _kernels.complex_sd_core(
        y, r, cand_idx, csize, 1, constellation.points, levels,
        constellation.code_of_pos, constellation.nax, inv_step, xbest)
    numerics.add_real_mults(mults)
    return SearchResult(point=constellation.points[xbest],
                        indices=xbest.copy(), metric=float(metric),
                        visited=int(leaves))


def brute_force_ml(y, effective_matrix, constellation: Constellation,
                   dim) -> SearchResult:
    """Exhaustive ML over constellation^dim; the oracle for every decoder.

    Enumerates candidates in canonical label order, so ties resolve to
    the first minimizer.  Refuses search spaces beyond 10^6 points.
    """
    m = constellation.m
    if m**dim > BRUTE_FORCE_GUARD:
        raise InvalidInputError(
            f"brute force space {m}**{dim} exceeds the desk-scale guard")
    y = np.asarray(y, dtype=np.complex128).ravel()
    a = np.asarray(effective_matrix, dtype=np.complex128)
    if a.shape != (y.size, dim):
        raise InvalidInputError(
            f"effective matrix must be {y.size}x{dim}, got {a.shape}")
    total = m**dim
    weights = m ** np.arange(dim - 1, -1, -1, dtype=np.int64)
    best_metric = np.inf
    best_flat = 0
    chunk = 1 << 16
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = (flat[None, :] // weights[:, None]) % m     # (dim, B)
        x = constellation.points[digits]
        metrics = np.sum(np.abs(y[:, None] - a @ x) ** 2, axis=0)
        i = int(np.argmin(metrics))
        if metrics[i] < best_metric:
            best_metric = float(metrics[i])
            best_flat = int(flat[i])
    best = ((best_flat // weights) % m).astype(np.int64)
    return SearchResult(point=constellation.points[best], indices=best,
                        metric=best_metric, visited=int(total))
