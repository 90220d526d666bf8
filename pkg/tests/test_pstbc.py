import numpy as np
import pytest

from pcmb import modulation, pstbc
from pcmb.errors import InvalidInputError, UnsupportedError


def test_golden_entry():
    code = pstbc.generation_matrix(2)
    expect = (1 + 1j * (1 - np.sqrt(5)) / 2) / np.sqrt(5)
    assert code.g_matrix[0, 0] == pytest.approx(expect)


@pytest.mark.parametrize("d", [2, 4])
def test_generation_unitary(d):
    g = pstbc.generation_matrix(d).g_matrix
    assert np.abs(g.conj().T @ g - np.eye(d)).max() <= 1e-10


def test_dim4_quartic_roots():
    th = pstbc.dim4_angles()
    assert np.abs(th**4 - th**3 - 4 * th**2 + 4 * th + 1).max() <= 1e-12


@pytest.mark.parametrize("d", [2, 4])
def test_first_row_nonzero(d):
    g = pstbc.generation_matrix(d).g_matrix
    assert np.abs(g[0]).min() > 0


def test_unsupported_dimensions():
    for d in (3, 6):
        with pytest.raises(UnsupportedError):
            pstbc.generation_matrix(d)


def test_shift_matrix_layout(code4):
    e = code4.e_matrix
    assert np.allclose(np.diag(e, 1), np.ones(3))
    assert e[3, 0] == 1j
    assert np.count_nonzero(e) == 4


def test_assemble_zero(code2):
    z = pstbc.assemble(np.zeros((2, 2)), code2).z
    assert np.abs(z).max() == 0


def test_assemble_matches_shift_matrix_definition(code2, code4, rng):
    # direct evaluation of sum_v diag(G x_v) E^(v-1)
    for code in (code2, code4):
        d = code.d
        x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        expect = np.zeros((d, d), dtype=complex)
        ev = np.eye(d, dtype=complex)
        for v in range(d):
            expect += np.diag(code.g_matrix @ x[:, v]) @ ev
            ev = ev @ code.e_matrix
        assert np.abs(pstbc.assemble(x, code).z - expect).max() <= 1e-12


def test_assemble_2x2_layout(code2, rng):
    # with the second thread zeroed the codeword is diagonal
    x = np.zeros((2, 2), dtype=complex)
    x[:, 0] = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    z = pstbc.assemble(x, code2).z
    g = code2.g_matrix
    assert z[0, 0] == pytest.approx(g[0] @ x[:, 0])
    assert z[1, 1] == pytest.approx(g[1] @ x[:, 0])
    assert z[0, 1] == 0 and z[1, 0] == 0
    # second thread only: off-diagonal with the wrap phase bottom-left
    x2 = np.zeros((2, 2), dtype=complex)
    x2[:, 1] = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    z2 = pstbc.assemble(x2, code2).z
    assert z2[0, 1] == pytest.approx(g[0] @ x2[:, 1])
    assert z2[1, 0] == pytest.approx(1j * (g[1] @ x2[:, 1]))


@pytest.mark.parametrize("d", [2, 4])
def test_assemble_norm_preserving(d, rng):
    code = pstbc.generation_matrix(d)
    for _ in range(50):
        x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        z = pstbc.assemble(x, code).z
        assert np.linalg.norm(z) ** 2 == pytest.approx(
            np.linalg.norm(x) ** 2, rel=1e-10)


def test_assemble_dimension_mismatch(code4):
    with pytest.raises(InvalidInputError):
        pstbc.assemble(np.zeros((2, 2)), code4)


def test_thread_positions_2x2():
    assert pstbc.thread_positions(2, 1) == [(1, 1), (2, 2)]
    assert pstbc.thread_positions(2, 2) == [(1, 2), (2, 1)]


def test_thread_positions_partition_4x4():
    seen = set()
    for v in range(1, 5):
        seen |= set(pstbc.thread_positions(4, v))
    assert seen == {(u, c) for u in range(1, 5) for c in range(1, 5)}


def test_thread_positions_range():
    with pytest.raises(InvalidInputError):
        pstbc.thread_positions(2, 3)


def test_phase_matrices(code2, code4):
    assert np.allclose(np.diag(pstbc.phase_matrix(code2, 1)), [1, 1])
    assert np.allclose(np.diag(pstbc.phase_matrix(code2, 2)), [1, 1j])
    assert np.allclose(np.diag(pstbc.phase_matrix(code4, 3)), [1, 1, 1j, 1j])
    with pytest.raises(InvalidInputError):
        pstbc.phase_matrix(code2, 0)


@pytest.mark.parametrize("d", [2, 4])
def test_thread_extraction_identity(d, rng):
    # entries of the codeword on thread positions equal Phi_v (G x_v)
    code = pstbc.generation_matrix(d)
    for _ in range(100):
        x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        z = pstbc.assemble(x, code).z
        for v in range(1, d + 1):
            got = np.array([z[u - 1, c - 1] for u, c in pstbc.thread_positions(d, v)])
            expect = np.diag(pstbc.phase_matrix(code, v)) * (code.g_matrix @ x[:, v - 1])
            assert np.abs(got - expect).max() <= 1e-12


@pytest.mark.parametrize("d", [2, 4])
def test_energy_uniform_across_entries(d, qam16):
    rng = np.random.default_rng(7)
    code = pstbc.generation_matrix(d)
    n = 100_000 // (d * d)
    acc = np.zeros((d, d))
    for _ in range(n):
        labels = rng.integers(0, 16, size=(d, d))
        acc += np.abs(pstbc.assemble(qam16.points[labels], code).z) ** 2
    acc /= n
    assert np.abs(acc - 1.0).max() <= 0.02
