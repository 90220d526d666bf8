import numpy as np
import pytest

from pcmb import modulation, numerics, pcmb_decoder, pstbc, spheredec
from pcmb.errors import DegenerateChannelError, InvalidInputError
from conftest import random_descending_singulars


def _joint_oracle(y, lam, code, constellation):
    d = code.d
    a = np.empty((d * d, d * d), dtype=np.complex128)
    for v in range(d):
        for u in range(d):
            e = np.zeros((d, d), dtype=np.complex128)
            e[u, v] = 1.0
            a[:, v * d + u] = (lam[:, None] * pstbc.assemble(e, code).z).T.ravel()
    return spheredec.brute_force_ml(y.T.ravel(), a, constellation, d * d), a


def test_extract_threads_2x2_layout(code2, rng):
    y = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    obs = pcmb_decoder.extract_threads(y, code2)
    assert np.allclose(obs[0].y_breve, [y[0, 0], y[1, 1]])
    assert np.allclose(obs[1].y_breve, [y[0, 1], y[1, 0]])


def test_extract_threads_zero(code4):
    obs = pcmb_decoder.extract_threads(np.zeros((4, 4)), code4)
    for o in obs:
        assert np.abs(o.y_breve).max() == 0


@pytest.mark.parametrize("d", [2, 4])
def test_extract_noiseless_roundtrip(d, rng):
    code = pstbc.generation_matrix(d)
    for _ in range(50):
        lam = random_descending_singulars(rng, d)
        x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        y = lam[:, None] * pstbc.assemble(x, code).z
        pre = pcmb_decoder.precompute(lam, code)
        for o in pcmb_decoder.extract_threads(y, code, pre):
            expect = pre.phases[o.v - 1] * (lam * (code.g_matrix @ x[:, o.v - 1]))
            assert np.abs(o.y_breve - expect).max() <= 1e-10
            # rotation is an isometry
            assert np.linalg.norm(o.y_tilde) == pytest.approx(
                np.linalg.norm(o.y_breve), rel=1e-10)
            # and triangularizes the thread model exactly
            assert np.abs(o.y_tilde - pre.r @ x[:, o.v - 1]).max() <= 1e-9


def test_extract_dimension_mismatch(code2):
    with pytest.raises(InvalidInputError):
        pcmb_decoder.extract_threads(np.zeros((4, 4)), code2)


@pytest.mark.parametrize("d", [2, 4])
def test_precompute_real_r(d, rng):
    code = pstbc.generation_matrix(d)
    for _ in range(500):
        lam = random_descending_singulars(rng, d)
        pre = pcmb_decoder.precompute(lam, code)
        assert pre.r_is_real
        assert np.abs(pre.r.imag).max() <= 1e-10


def test_precompute_equal_singulars_diagonal(code2):
    pre = pcmb_decoder.precompute(np.array([1.3, 1.3]), code2)
    assert abs(pre.r[0, 1]) <= 1e-10


def test_precompute_rejects_zero_singular(code2):
    with pytest.raises(DegenerateChannelError):
        pcmb_decoder.precompute(np.array([1.0, 0.0]), code2)


@pytest.mark.parametrize("d", [2, 4])
def test_closed_form_r_matches_qr(d, rng):
    code = pstbc.generation_matrix(d)
    for _ in range(500):
        lam = random_descending_singulars(rng, d, floor=1e-3)
        rc = pcmb_decoder.closed_form_r(lam, code)
        rq = numerics.qr(lam[:, None] * code.g_matrix).r
        assert np.abs(rc - rq.real).max() <= 1e-9


def test_closed_form_entries_2x2(code2):
    # spec'd spot values for lam = (2, 1)
    lam = np.array([2.0, 1.0])
    alpha, beta = (1 + np.sqrt(5)) / 2, (1 - np.sqrt(5)) / 2
    f1_norm = np.sqrt((4 * (1 + beta**2) + 1 * (1 + alpha**2)) / 5)
    rc = pcmb_decoder.closed_form_r(lam, code2)
    assert rc[0, 0] == pytest.approx(f1_norm, rel=1e-12)
    assert rc[0, 1] == pytest.approx(np.sqrt(5) * 3 / (5 * f1_norm), rel=1e-12)


def test_closed_form_unweighted_reading_degenerates(code4, rng):
    # without the squared-singular-value weights every printed numerator
    # sum is identically zero, so the unweighted reading cannot match QR
    lam = random_descending_singulars(rng, 4)
    ru = pcmb_decoder.closed_form_r_unweighted(lam, code4)
    off = ru[np.triu_indices(4, 1)]
    assert np.abs(off).max() <= 1e-12
    rq = numerics.qr(lam[:, None] * code4.g_matrix).r.real
    assert np.abs(ru - rq).max() > 1e-3


def test_closed_form_literal_row1_exact_rows2plus_not(code4, rng):
    # the bare ratio <f_j,f_i>/||f_i|| is the true entry only on row 1
    for _ in range(20):
        lam = random_descending_singulars(rng, 4)
        rq = numerics.qr(lam[:, None] * code4.g_matrix).r.real
        for j in range(1, 4):
            lit = pcmb_decoder.closed_form_entry_literal(lam, code4, 0, j)
            assert lit == pytest.approx(rq[0, j], abs=1e-9)
    devs = []
    for _ in range(50):
        lam = random_descending_singulars(rng, 4)
        rq = numerics.qr(lam[:, None] * code4.g_matrix).r.real
        lit = pcmb_decoder.closed_form_entry_literal(lam, code4, 1, 2)
        devs.append(abs(lit - rq[1, 2]))
    assert max(devs) > 1e-3


@pytest.mark.parametrize("d", [2, 4])
def test_decode_noiseless_exact(d, rng, qam4):
    code = pstbc.generation_matrix(d)
    for _ in range(50):
        lam = random_descending_singulars(rng, d)
        labels = rng.integers(0, 4, size=(d, d))
        x = qam4.points[labels]
        y = lam[:, None] * pstbc.assemble(x, code).z
        xhat = pcmb_decoder.decode_pcmb(y, lam, code, qam4)
        assert np.abs(xhat - x).max() <= 1e-9


def test_thread_decode_equals_bruteforce_per_thread(code2, qam4, rng):
    # per-thread decision equals exhaustive ML over the 16 thread candidates
    for _ in range(2000):
        lam = random_descending_singulars(rng, 2)
        pre = pcmb_decoder.precompute(lam, code2)
        labels = rng.integers(0, 4, size=(2, 2))
        x = qam4.points[labels]
        y = (lam[:, None] * pstbc.assemble(x, code2).z
             + 0.5 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))))
        obs = pcmb_decoder.extract_threads(y, code2, pre)
        for o in obs:
            got = pcmb_decoder.decode_thread(o, pre, qam4)
            oracle = spheredec.brute_force_ml(o.y_tilde, pre.r, qam4, 2)
            m_got = float(np.sum(np.abs(o.y_tilde - pre.r @ got) ** 2))
            assert m_got == pytest.approx(oracle.metric, abs=1e-9)


def test_split_equals_unsplit_complex_search(code2, qam16, rng):
    # when R is real the re/im split answer equals the one-shot complex search
    for _ in range(500):
        lam = random_descending_singulars(rng, 2)
        pre = pcmb_decoder.precompute(lam, code2)
        labels = rng.integers(0, 16, size=(2, 2))
        x = qam16.points[labels]
        y = (lam[:, None] * pstbc.assemble(x, code2).z
             + 0.4 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))))
        obs = pcmb_decoder.extract_threads(y, code2, pre)
        for o in obs:
            split = pcmb_decoder.decode_thread(o, pre, qam16)
            res = spheredec.complex_sd(o.y_tilde, pre.r, qam16)
            m_split = float(np.sum(np.abs(o.y_tilde - pre.r @ split) ** 2))
            assert m_split == pytest.approx(res.metric, abs=1e-9)


def test_decode_pcmb_equals_joint_ml(code2, qam4, rng):
    # composing per-thread decisions equals the joint 256-candidate ML
    for _ in range(300):
        lam = random_descending_singulars(rng, 2)
        labels = rng.integers(0, 4, size=(2, 2))
        x = qam4.points[labels]
        y = (lam[:, None] * pstbc.assemble(x, code2).z
             + 0.5 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))))
        xhat = pcmb_decoder.decode_pcmb(y, lam, code2, qam4)
        oracle, _ = _joint_oracle(y, lam, code2, qam4)
        m_hat = float(np.sum(np.abs(y - lam[:, None] * pstbc.assemble(xhat, code2).z) ** 2))
        assert m_hat == pytest.approx(oracle.metric, abs=1e-9)


def test_worst_case_leaf_bound(code2, qam16, rng):
    # real-split decoding visits at most sqrt(M) leaves per axis search
    levels = qam16.levels
    lat_cap = levels.size  # sqrt(M)
    for _ in range(200):
        lam = random_descending_singulars(rng, 2)
        pre = pcmb_decoder.precompute(lam, code2)
        y = 3 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
        lattice = spheredec.RealLattice(r=pre.r_real, levels=levels)
        res = spheredec.real_sd(y.real, lattice)
        assert res.visited <= lat_cap
