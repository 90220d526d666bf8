import numpy as np
import pytest

from pcmb import channel, modulation, pstbc


def test_channel_entry_statistics():
    rng = np.random.default_rng(0)
    n = 100_000 // 4
    hs = np.array([channel.sample_channel(2, 2, rng).h for _ in range(n)])
    var = np.mean(np.abs(hs) ** 2)
    assert abs(var - 1.0) <= 0.02
    assert abs(np.mean(hs.real)) <= 0.02 and abs(np.mean(hs.imag)) <= 0.02


def test_singular_values_descending():
    rng = np.random.default_rng(1)
    for _ in range(200):
        ch = channel.sample_channel(4, 4, rng)
        assert np.all(np.diff(ch.singular_values) <= 0)


def test_seeded_determinism():
    h1 = channel.sample_channel(4, 4, np.random.default_rng(42)).h
    h2 = channel.sample_channel(4, 4, np.random.default_rng(42)).h
    assert np.array_equal(h1, h2)


def test_noise_model_variance_relation():
    nm = channel.NoiseModel.from_db(10.0, 4)
    assert nm.n0 == pytest.approx(4 / 10.0)
    assert channel.NoiseModel(snr=2.0, d=2).n0 == 1.0


def test_received_pcmb_noiseless_limit():
    rng = np.random.default_rng(2)
    lam = np.array([1.5, 0.7])
    z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    y = channel.received_pcmb(lam, z, channel.NoiseModel(snr=1e30, d=2), rng)
    assert np.abs(y - lam[:, None] * z).max() <= 1e-12


def test_received_pcmb_identity_case():
    rng = np.random.default_rng(3)
    nm = channel.NoiseModel(snr=4.0, d=2)
    y = channel.received_pcmb(np.ones(2), np.eye(2), nm, rng)
    n = y - np.eye(2)
    assert np.all(np.isfinite(n))


def test_received_pcmb_pure_noise_variance():
    rng = np.random.default_rng(4)
    nm = channel.NoiseModel(snr=2.0, d=2)  # n0 = 1
    samples = []
    for _ in range(2000):
        y = channel.received_pcmb(np.ones(2), np.zeros((2, 2)), nm, rng)
        samples.append(y)
    var = np.mean(np.abs(np.array(samples)) ** 2)
    assert abs(var - nm.n0) <= 0.02 * nm.n0


def test_received_pc_noiseless():
    rng = np.random.default_rng(5)
    h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    y = channel.received_pc(h, z, channel.NoiseModel(snr=1e30, d=2), rng)
    assert np.abs(y - h @ z).max() <= 1e-12


def test_received_pc_energy():
    rng = np.random.default_rng(6)
    z = np.eye(2, dtype=complex) * np.sqrt(2)  # ||Z||^2 = 4
    acc = 0.0
    n = 20000
    for _ in range(n):
        h = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2)
        acc += np.linalg.norm(h @ z) ** 2
    # E||HZ||^2 = N_r ||Z||^2
    assert acc / n == pytest.approx(2 * 4, rel=0.02)


@pytest.mark.parametrize("d", [2, 4])
def test_norm_decomposition_identity(d):
    # ||diag(lam) Z||^2 = sum_u lam_u^2 sum_v |g_u^T x_v|^2
    rng = np.random.default_rng(7)
    code = pstbc.generation_matrix(d)
    for _ in range(100):
        lam = np.sort(np.abs(rng.standard_normal(d)) + 0.05)[::-1]
        x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        z = pstbc.assemble(x, code).z
        lhs = np.linalg.norm(lam[:, None] * z) ** 2
        rhs = sum(lam[u] ** 2 * sum(abs(code.g_matrix[u] @ x[:, v]) ** 2
                                    for v in range(d))
                  for u in range(d))
        assert lhs == pytest.approx(rhs, rel=1e-9)
