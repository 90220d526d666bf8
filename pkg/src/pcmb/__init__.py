"""Link-level simulator for space-time coded multiple beamforming.

Implements the Golden-code / perfect-code family over SVD beamforming
(GCMB, PCMB) with per-thread real-split sphere decoding, the raw-code and
precoded baselines (PC, FPMB, uncoded MB), and the bit-interleaved coded
variants (BICMB-PC, BICMB-FP) with soft Viterbi decoding, plus a Monte
Carlo harness for reproducible BER and decoding-complexity sweeps.
"""

from ._accel import BACKEND, NUMBA_ENABLED

__version__ = "0.1.0"
__all__ = ["BACKEND", "NUMBA_ENABLED", "__version__"]
