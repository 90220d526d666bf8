"""Small-dimension complex linear algebra and multiplication counting.

All matrices in this package are tiny (at most 8x8, typically 2x2 or 4x4
and their squares), so the decompositions here simply wrap LAPACK via
numpy and add the conventions the decoders rely on:

* ``svd`` returns singular values in strictly non-increasing order.
* ``qr`` returns an R whose diagonal is real and non-negative; the phase
  freedom is absorbed into Q.  This makes the factorization unique for
  full-rank inputs, which is what lets "R is real-valued" be checked as a
  plain numerical statement.

The counting half of the module implements the real-multiplication cost
model used by the complexity experiments: one complex*complex product
costs 4 real multiplications, complex*real costs 2, real*real costs 1.
Counter scopes are thread-local; compiled kernels tally internally with
the same model and deposit their totals via :func:`add_real_mults`.
"""

import threading
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateChannelError, InvalidInputError, UsageError

#: Frobenius tolerance for unitarity of computed factors.
UNITARITY_TOL = 1e-10
#: Relative tolerance for reconstruction A ~ QR, H ~ U diag(s) V^H.
RECONSTRUCTION_RTOL = 1e-9
#: Relative rank threshold below which qr() refuses the input.
RANK_RTOL = 1e-12


@dataclass(frozen=True)
class SvdFactors:
    """Unitary U, singular values (descending), unitary V with H = U diag(sigma) V^H."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class QrFactors:
    """Unitary Q and upper-triangular R with real non-negative diagonal."""

    q: np.ndarray
    r: np.ndarray


def _as_complex_matrix(a, name):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2:
        raise InvalidInputError(f"{name} must be a 2-D matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a.view(np.float64))):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return a


def svd(h) -> SvdFactors:
    """Full SVD with singular values sorted in decreasing order."""
    h = _as_complex_matrix(h, "h")
    u, s, vh = np.linalg.svd(h)
    # LAPACK already returns descending order; keep it as a hard guarantee.
    assert np.all(np.diff(s) <= 0)
    return SvdFactors(u=u, sigma=s, v=vh.conj().T)


def qr(a) -> QrFactors:
    """QR factorization with the real non-negative diagonal convention.

    Raises DegenerateChannelError when the smallest singular value falls
    below RANK_RTOL times the matrix norm.
    """
    a = _as_complex_matrix(a, "a")
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"qr expects a square matrix, got {a.shape}")
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[-1] <= RANK_RTOL * np.linalg.norm(a):
        raise DegenerateChannelError("matrix is numerically rank deficient")
    q, r = np.linalg.qr(a)
    q, r = fix_qr_phases(q, r)
    return QrFactors(q=q, r=r)


def fix_qr_phases(q, r):
    """Absorb the diagonal phases of R into Q so diag(R) is real, >= 0."""
    d = np.diag(r).copy()
    mags = np.abs(d)
    phases = np.where(mags > 0, d / np.where(mags > 0, mags, 1.0), 1.0)
    q = q * phases[None, :]
    r = r * np.conj(phases)[:, None]
    # kill the rounding dust on the imaginary part of the diagonal
    n = r.shape[0]
    r[np.arange(n), np.arange(n)] = np.abs(np.diag(r))
    return q, r


# ---------------------------------------------------------------------------
# Real-multiplication counting
# ---------------------------------------------------------------------------

COST_COMPLEX_COMPLEX = 4
COST_COMPLEX_REAL = 2
COST_REAL_REAL = 1


@dataclass
class OpCounter:
    """Tally of real multiplications inside one ``counted_context`` scope."""

    label: str
    real_mults: int = 0
    _children: dict = field(default_factory=dict, repr=False)

    def add(self, n):
        if n < 0:
            raise UsageError("counter can only move forward")
        self.real_mults += int(n)


_tls = threading.local()


def _scope_stack():
    if not hasattr(_tls, "stack"):
        _tls.stack = []
    return _tls.stack


@contextmanager
def counted_context(label):
    """Open a counting scope; all counted arithmetic inside increments it.

    Scopes nest (an inner scope's multiplications also count toward the
    outer one), but re-using an active label is a usage error.
    """
    stack = _scope_stack()
    if any(c.label == label for c in stack):
        raise UsageError(f"counter scope {label!r} is already active")
    counter = OpCounter(label)
    stack.append(counter)
    try:
        yield counter
    finally:
        stack.pop()


def active_counter():
    """Innermost active counter of this thread, or None."""
    stack = _scope_stack()
    return stack[-1] if stack else None


def add_real_mults(n):
    """Credit n real multiplications to every active scope (kernel totals)."""
    for counter in _scope_stack():
        counter.add(n)


def cmul(a, b):
    """Counted complex*complex product (4 real multiplications)."""
    add_real_mults(COST_COMPLEX_COMPLEX)
    return a * b


def crmul(a, x):
    """Counted complex*real product (2 real multiplications)."""
    add_real_mults(COST_COMPLEX_REAL)
    return a * x


def rmul(x, y):
    """Counted real*real product (1 real multiplication)."""
    add_real_mults(COST_REAL_REAL)
    return x * y


def counted_matvec(a, x):
    """Counted complex matrix-vector product (4 per entry pair)."""
    a = np.asarray(a)
    x = np.asarray(x)
    out = np.zeros(a.shape[0], dtype=np.complex128)
    for i in range(a.shape[0]):
        acc = 0.0 + 0.0j
        for j in range(a.shape[1]):
            acc += cmul(a[i, j], x[j])
        out[i] = acc
    return out
