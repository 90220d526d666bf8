"""Per-thread decoding of beamformed perfect codes.

With full channel knowledge the received block Y = diag(lam) Z + N
separates into D independent thread observations

    y_breve_v = Phi_v diag(lam) G x_v + n_v,

one per vector symbol.  A single QR factorization of diag(lam) G (with
the real-diagonal convention) turns each of them into a triangular system
ytilde_v = R x_v + n, and for dimensions 2 and 4 the resulting R is
real-valued, so the real and imaginary halves decouple into two real
sphere searches over the PAM axes.  Whether R is real is decided
numerically at precompute time rather than assumed, which turns the
structural property into a runtime assertion.

The closed-form construction of R from the singular values doubles as an
independent validation path: the Gram matrix of diag(lam) G has closed
polynomial entries (weighted by the squared singular values), and its
Cholesky factor must coincide with the numerical QR.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import numerics, spheredec
from .errors import DegenerateChannelError, InvalidInputError, UnsupportedError
from .modulation import Constellation
from .pstbc import PerfectCode, dim4_angles, phase_matrix

#: |Im(R)| threshold below which the real/imaginary split is enabled.
REAL_R_TOL = 1e-10


@dataclass(frozen=True)
class ThreadObservation:
    v: int                               # thread index, 1-based
    y_breve: np.ndarray                  # entries of Y on the thread positions
    y_tilde: Optional[np.ndarray] = None  # Q^H Phi_v^H y_breve


@dataclass(frozen=True)
class PcmbPrecomputation:
    q: np.ndarray          # unitary factor of diag(lam) G
    r: np.ndarray          # upper triangular, real non-negative diagonal
    phases: np.ndarray     # (D, D) row v-1 = diagonal of Phi_v
    r_is_real: bool
    r_real: Optional[np.ndarray]  # float view of R when r_is_real


def precompute(lam, code: PerfectCode) -> PcmbPrecomputation:
    """QR of diag(lam) G plus the per-thread phase diagonals."""
    lam = np.asarray(lam, dtype=np.float64).ravel()
    d = code.d
    if lam.size != d:
        raise InvalidInputError(f"need {d} singular values, got {lam.size}")
    if np.any(lam <= 0):
        raise DegenerateChannelError("zero singular value: channel is rank deficient")
    factors = numerics.qr(lam[:, None] * code.g_matrix)
    im_max = float(np.abs(factors.r.imag).max())
    r_is_real = im_max <= REAL_R_TOL
    phases = np.stack([np.diag(phase_matrix(code, v)) for v in range(1, d + 1)])
    return PcmbPrecomputation(
        q=factors.q, r=factors.r, phases=phases, r_is_real=r_is_real,
        r_real=factors.r.real.copy() if r_is_real else None)


def extract_threads(y, code: PerfectCode, pre: PcmbPrecomputation = None):
    """Split Y into its D thread observations (ordered by row index).

    When the precomputation is supplied, the rotated vector
    ytilde = Q^H Phi_v^H y_breve is filled in as well.
    """
    y = np.asarray(y, dtype=np.complex128)
    d = code.d
    if y.shape != (d, d):
        raise InvalidInputError(f"received block must be {d}x{d}, got {y.shape}")
    out = []
    for v in range(d):
        yb = np.array([y[u, (u + v) % d] for u in range(d)])
        yt = None
        if pre is not None:
            yt = pre.q.conj().T @ (np.conj(pre.phases[v]) * yb)
        out.append(ThreadObservation(v=v + 1, y_breve=yb, y_tilde=yt))
    return out


def rotate_observation(obs: ThreadObservation,
                       pre: PcmbPrecomputation) -> ThreadObservation:
    """Fill in ytilde = Q^H Phi_v^H y_breve for an unrotated observation."""
    yt = pre.q.conj().T @ (np.conj(pre.phases[obs.v - 1]) * obs.y_breve)
    return ThreadObservation(v=obs.v, y_breve=obs.y_breve, y_tilde=yt)


def decode_thread(obs: ThreadObservation, pre: PcmbPrecomputation,
                  constellation: Constellation) -> np.ndarray:
    """ML decision for one thread's vector symbol.

    Uses two independent real sphere searches over the PAM axes when R is
    real, otherwise one complex search; both are exact, so the output
    equals the per-thread ML rule either way.
    """
    if obs.y_tilde is None:
        obs = rotate_observation(obs, pre)
    yt = obs.y_tilde
    if pre.r_is_real:
        lattice = spheredec.RealLattice(r=pre.r_real, levels=constellation.levels)
        res_re = spheredec.real_sd(yt.real, lattice)
        res_im = spheredec.real_sd(yt.imag, lattice)
        return res_re.point + 1j * res_im.point
    res = spheredec.complex_sd(yt, pre.r, constellation)
    return res.point


def decode_pcmb(y, lam, code: PerfectCode,
                constellation: Constellation) -> np.ndarray:
    """Decode a full received block; column v of the result is x_hat_v."""
    pre = precompute(lam, code)
    obs = extract_threads(y, code, pre)
    d = code.d
    xhat = np.empty((d, d), dtype=np.complex128)
    for o in obs:
        xhat[:, o.v - 1] = decode_thread(o, pre, constellation)
    return xhat


# ---------------------------------------------------------------------------
# closed-form R validation path
# ---------------------------------------------------------------------------

# Component polynomials of the columns of diag(lam) G for dimension 4
# (real and imaginary parts, evaluated at the four algebraic angles).
_D4_RE = (lambda t: np.ones_like(t),
          lambda t: t,
          lambda t: -3.0 * t + t**3,
          lambda t: -1.0 - 3.0 * t + t**2 + t**3)
_D4_IM = (lambda t: -3.0 + t**2,
          lambda t: -3.0 * t + t**3,
          lambda t: -1.0 + 4.0 * t - t**3,
          lambda t: np.ones_like(t))

# Closed-form numerators of the column inner products <f_a, f_b>; each
# term is real, which is why R is real-valued in dimension 4.
_D4_CROSS = {(0, 1): lambda t: -1.0 + 5.0 * t - t**3,
             (0, 2): lambda t: 4.0 - 10.0 * t - t**2 + 3.0 * t**3,
             (0, 3): lambda t: -4.0 - 3.0 * t + 2.0 * t**2 + t**3,
             (1, 2): lambda t: -3.0 - 8.0 * t + 2.0 * t**2 + 2.0 * t**3,
             (1, 3): lambda t: -1.0 - 8.0 * t + t**2 + 3.0 * t**3,
             (2, 3): lambda t: -1.0 + 5.0 * t - t**3}


def closed_form_gram(lam, code: PerfectCode, weighted=True) -> np.ndarray:
    """Closed-form Gram matrix of diag(lam) G (real by construction).

    ``weighted`` applies the squared singular values term-by-term inside
    the numerator sums, which is what the column inner products require;
    the unweighted variant evaluates the bare sums (they all collapse to
    zero off the diagonal) and exists so validation can report which
    reading agrees with the numerical factorization.
    """
    lam = np.asarray(lam, dtype=np.float64).ravel()
    d = code.d
    w = lam**2 if weighted else np.ones_like(lam)
    a = np.zeros((d, d))
    if d == 2:
        alpha = (1.0 + np.sqrt(5.0)) / 2.0
        beta = (1.0 - np.sqrt(5.0)) / 2.0
        a[0, 0] = (w[0] * (1 + beta**2) + w[1] * (1 + alpha**2)) / 5.0
        a[1, 1] = (w[0] * (alpha**2 + 1) + w[1] * (beta**2 + 1)) / 5.0
        a[0, 1] = a[1, 0] = (alpha - beta) * (w[0] - w[1]) / 5.0
        return a
    if d == 4:
        th = dim4_angles()
        for c in range(4):
            a[c, c] = float(np.sum(w * (_D4_RE[c](th)**2 + _D4_IM[c](th)**2)) / 15.0)
        for (i, j), poly in _D4_CROSS.items():
            a[i, j] = a[j, i] = float(np.sum(w * poly(th)) / 15.0)
        return a
    raise UnsupportedError(f"closed forms exist only for dimensions 2 and 4, not {d}")


def closed_form_r(lam, code: PerfectCode) -> np.ndarray:
    """Upper-triangular R from the closed-form Gram matrix.

    This is the Cholesky recursion on real scalars, i.e. Gram-Schmidt
    written out: the diagonal entries are the orthogonalized column norms
    and the off-diagonals are the projection coefficients.  It never
    touches the matrix itself, only the closed-form inner products, and
    must agree with the numerical QR to rounding error.
    """
    lam = np.asarray(lam, dtype=np.float64).ravel()
    if np.any(lam <= 0):
        raise DegenerateChannelError("singular values must be positive")
    a = closed_form_gram(lam, code, weighted=True)
    return cholesky_upper(a)


def closed_form_r_unweighted(lam, code: PerfectCode) -> np.ndarray:
    """Literal reading without the squared-singular-value weights."""
    a = closed_form_gram(lam, code, weighted=False)
    return cholesky_upper(a)


def closed_form_entry_literal(lam, code: PerfectCode, i, j) -> float:
    """The bare ratio <f_j, f_i> / ||f_i|| without projection corrections.

    Exact for the first row; validation uses it to show the deeper rows
    need the Gram-Schmidt corrections.
    """
    a = closed_form_gram(lam, code, weighted=True)
    return float(a[i, j] / np.sqrt(a[i, i]))


def cholesky_upper(a) -> np.ndarray:
    """Upper-triangular Cholesky factor (R with R^T R = a)."""
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    r = np.zeros_like(a)
    for i in range(n):
        s = a[i, i] - np.sum(r[:i, i] ** 2)
        if s <= 0:
            raise DegenerateChannelError("Gram matrix is not positive definite")
        r[i, i] = np.sqrt(s)
        for j in range(i + 1, n):
            r[i, j] = (a[i, j] - np.sum(r[:i, i] * r[:i, j])) / r[i, i]
    return r
