import numpy as np
import pytest

from pcmb import baselines, modulation, numerics, pstbc, spheredec
from pcmb.errors import InvalidInputError, UnsupportedError
from conftest import random_descending_singulars


def test_effective_matrix_vectorizes_codeword(code2, rng):
    h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    a = baselines.pc_effective_matrix(h, code2)
    for _ in range(20):
        x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        lhs = (h @ pstbc.assemble(x, code2).z).T.ravel()
        assert np.abs(lhs - a @ x.T.ravel()).max() <= 1e-12


def test_decode_pc_noiseless(code2, qam16, rng):
    for _ in range(50):
        h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        labels = rng.integers(0, 16, size=(2, 2))
        x = qam16.points[labels]
        y = h @ pstbc.assemble(x, code2).z
        xhat = baselines.decode_pc(y, h, code2, qam16)
        assert np.abs(xhat - x).max() <= 1e-9


def test_decode_pc_equals_bruteforce(code2, qam4, rng):
    for _ in range(300):
        h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        labels = rng.integers(0, 4, size=(2, 2))
        x = qam4.points[labels]
        y = (h @ pstbc.assemble(x, code2).z
             + 0.7 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))))
        xhat = baselines.decode_pc(y, h, code2, qam4)
        a = baselines.pc_effective_matrix(h, code2)
        oracle = spheredec.brute_force_ml(y.T.ravel(), a, qam4, 4)
        m_hat = float(np.sum(np.abs(y.T.ravel() - a @ xhat.T.ravel()) ** 2))
        assert m_hat == pytest.approx(oracle.metric, abs=1e-9)


def test_decode_pc_refuses_infeasible(code4, qam16):
    with pytest.raises(UnsupportedError):
        baselines.decode_pc(np.zeros((4, 4)), np.eye(4), code4, qam16)


def test_default_precoder_unitary():
    for d in (2, 4):
        cfg = baselines.default_precoder(d)
        assert np.abs(cfg.theta.conj().T @ cfg.theta - np.eye(d)).max() <= 1e-10


def test_precoder_file_roundtrip(tmp_path, code4):
    path = tmp_path / "theta.txt"
    baselines.save_precoder(path, code4.g_matrix)
    cfg = baselines.load_precoder(path)
    assert np.abs(cfg.theta - code4.g_matrix).max() <= 1e-15


def test_precoder_file_rejects_nonunitary(tmp_path):
    path = tmp_path / "bad.txt"
    baselines.save_precoder(path, np.array([[1.0, 0.0], [0.0, 2.0]], dtype=complex))
    with pytest.raises(InvalidInputError):
        baselines.load_precoder(path)


def test_fpmb_encode_applies_precoder(code2, rng):
    cfg = baselines.default_precoder(2)
    x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    assert np.allclose(baselines.fpmb_encode(x, cfg), cfg.theta @ x)


def test_fpmb_noiseless_exact_any_unitary(qam16, rng):
    for _ in range(50):
        q = numerics.qr(rng.standard_normal((2, 2))
                        + 1j * rng.standard_normal((2, 2))).q
        cfg = baselines.FpmbConfig(theta=q, s=2)
        lam = random_descending_singulars(rng, 2)
        labels = rng.integers(0, 16, size=2)
        x = qam16.points[labels]
        y = lam * baselines.fpmb_encode(x, cfg)
        xhat = baselines.fpmb_decode(y, lam, cfg, qam16)
        assert np.abs(xhat - x).max() <= 1e-9


def test_fpmb_identity_precoder_is_per_stream_slicing(qam4, rng):
    cfg = baselines.FpmbConfig(theta=np.eye(2, dtype=complex), s=2)
    for _ in range(200):
        lam = random_descending_singulars(rng, 2)
        y = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        got = baselines.fpmb_decode(y, lam, cfg, qam4)
        expect = baselines.decode_mb(y, lam, qam4)
        assert np.allclose(got, expect)


def test_fpmb_equals_bruteforce(qam4, rng):
    cfg = baselines.default_precoder(2)
    for _ in range(500):
        lam = random_descending_singulars(rng, 2)
        labels = rng.integers(0, 4, size=2)
        x = qam4.points[labels]
        y = (lam * (cfg.theta @ x)
             + 0.5 * (rng.standard_normal(2) + 1j * rng.standard_normal(2)))
        xhat = baselines.fpmb_decode(y, lam, cfg, qam4)
        a = lam[:, None] * cfg.theta
        oracle = spheredec.brute_force_ml(y, a, qam4, 2)
        m_hat = float(np.sum(np.abs(y - a @ xhat) ** 2))
        assert m_hat == pytest.approx(oracle.metric, abs=1e-9)


def test_nonunitary_precoder_rejected():
    with pytest.raises(InvalidInputError):
        baselines.FpmbConfig(theta=np.array([[1.0, 0.0], [0.0, 1.5]]), s=2)
