"""Quasi-static flat Rayleigh channels and SNR-calibrated noise.

The channel H has i.i.d. circularly-symmetric complex Gaussian entries
with unit variance.  Transmission power is calibrated so that a codeword
carries D units of energy per channel use (unit-energy symbols, D per
column), which makes the receive SNR equal to the configured value when
the per-entry noise variance is N0 = D / SNR.

Every sampling function takes an explicit numpy Generator; the Monte
Carlo harness derives independent substreams per trial so results do not
depend on the degree of parallelism.
"""

from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import InvalidInputError


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray
    svd: numerics.SvdFactors

    @property
    def singular_values(self):
        return self.svd.sigma


@dataclass(frozen=True)
class NoiseModel:
    """Per-entry complex noise variance n0 = d / snr (linear SNR)."""

    snr: float
    d: int

    @property
    def n0(self):
        return self.d / self.snr

    @staticmethod
    def from_db(snr_db, d):
        return NoiseModel(snr=10.0 ** (snr_db / 10.0), d=d)


def sample_channel(nt, nr, rng) -> ChannelRealization:
    """Draw H with i.i.d. CN(0, 1) entries and cache its SVD."""
    if nt < 1 or nr < 1:
        raise InvalidInputError("antenna counts must be >= 1")
    h = (rng.standard_normal((nr, nt)) + 1j * rng.standard_normal((nr, nt))) / np.sqrt(2.0)
    return ChannelRealization(h=h, svd=numerics.svd(h))


def complex_awgn(shape, n0, rng):
    """Complex Gaussian noise with per-entry variance n0."""
    return np.sqrt(n0 / 2.0) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def received_pcmb(lam, z, noise_model: NoiseModel, rng):
    """Beamformed reception Y = diag(lam) Z + N."""
    z = np.asarray(z, dtype=np.complex128)
    lam = np.asarray(lam, dtype=np.float64)
    if lam.size != z.shape[0]:
        raise InvalidInputError("singular value vector does not match codeword height")
    return lam[:, None] * z + complex_awgn(z.shape, noise_model.n0, rng)


def received_pc(h, z, noise_model: NoiseModel, rng):
    """Raw reception Y = H Z + N (no beamforming)."""
    h = np.asarray(h, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    if h.shape[1] != z.shape[0]:
        raise InvalidInputError("channel and codeword dimensions disagree")
    return h @ z + complex_awgn((h.shape[0], z.shape[1]), noise_model.n0, rng)
