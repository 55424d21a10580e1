import numpy as np
import pytest

from todaframes.errors import GaussDecompositionFailed
from todaframes.linalg import (
    BlockStructure,
    HermitianMetric,
    block,
    block_degree,
    block_project,
    gauss_decompose,
    hermitian_form,
    numerical_rank,
)


def _form_oracle(a, h, b):
    # entrywise sesquilinear sum, independent of the matmul route
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    h = np.asarray(h, dtype=complex)
    out = np.zeros((a.shape[1], b.shape[1]), dtype=complex)
    for p in range(a.shape[1]):
        for q in range(b.shape[1]):
            acc = 0j
            for i in range(a.shape[0]):
                for j in range(b.shape[0]):
                    acc += np.conj(a[i, p]) * h[i, j] * b[j, q]
            out[p, q] = acc
    return out


class TestBlockStructure:
    def test_offsets(self):
        bs = BlockStructure((2, 1, 3))
        assert bs.n == 6
        assert bs.offsets == (0, 2, 3)
        assert bs.slice(2) == slice(3, 6)

    def test_rejects_empty_and_nonpositive(self):
        with pytest.raises(ValueError):
            BlockStructure(())
        with pytest.raises(ValueError):
            BlockStructure((2, 0))


class TestHermitianMetric:
    def test_identity(self):
        h = HermitianMetric.identity(3)
        assert h.n == 3
        assert np.allclose(h.matrix, np.eye(3))

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            HermitianMetric([[1, 1j], [1j, 1]])

    def test_rejects_indefinite(self):
        with pytest.raises(ValueError):
            HermitianMetric([[1, 0], [0, -1]])

    def test_cholesky_factor_recovers_metric(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        h = HermitianMetric(a @ a.conj().T + 4 * np.eye(4))
        g0 = h.cholesky_factor()
        assert np.allclose(g0.conj().T @ g0, h.matrix, atol=1e-12)


class TestHermitianForm:
    def test_orthogonal_pair(self):
        # conj(1)*1 + conj(i)*(-i) = 1 - 1 = 0
        a = np.array([[1.0], [1j]])
        b = np.array([[1.0], [-1j]])
        out = hermitian_form(a, HermitianMetric.identity(2), b)
        assert out.shape == (1, 1)
        assert abs(out[0, 0]) < 1e-15

    def test_gram_of_identity(self):
        out = hermitian_form(np.eye(2), np.eye(2), np.eye(2))
        assert np.allclose(out, np.eye(2))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            hermitian_form(np.ones((3, 1)), np.eye(2), np.ones((2, 1)))

    def test_matches_entrywise_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            a = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
            b = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
            m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            h = m @ m.conj().T + 5 * np.eye(4)
            got = hermitian_form(a, HermitianMetric(h), b)
            assert np.allclose(got, _form_oracle(a, h, b), atol=1e-10)

    def test_conjugate_symmetry(self):
        rng = np.random.default_rng(12)
        a = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
        b = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
        h = HermitianMetric.identity(3)
        assert np.allclose(hermitian_form(a, h, b), hermitian_form(b, h, a).conj().T)


class TestNumericalRank:
    def test_identity(self):
        assert numerical_rank(np.eye(3)) == 3

    def test_rank_one(self):
        assert numerical_rank(np.array([[1.0, 2.0], [2.0, 4.0]])) == 1

    def test_orthonormal_columns(self):
        rng = np.random.default_rng(3)
        q, _ = np.linalg.qr(rng.normal(size=(5, 3)) + 1j * rng.normal(size=(5, 3)))
        assert numerical_rank(q) == 3

    def test_zero_matrix(self):
        assert numerical_rank(np.zeros((4, 2))) == 0

    def test_bad_tolerance(self):
        with pytest.raises(ValueError):
            numerical_rank(np.eye(2), tol_rel=0.0)

    def test_unitary_invariance(self):
        rng = np.random.default_rng(19)
        for _ in range(20):
            m, n = rng.integers(2, 7, size=2)
            r = int(rng.integers(0, min(m, n) + 1))
            x = (rng.normal(size=(m, r)) + 1j * rng.normal(size=(m, r))) @ (
                rng.normal(size=(r, n)) + 1j * rng.normal(size=(r, n))
            ) if r else np.zeros((m, n), dtype=complex)
            u, _ = np.linalg.qr(rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)))
            v, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
            assert numerical_rank(u @ x @ v) == numerical_rank(x)


def _random_gauss_input(rng, bs, cond_cap=1e6):
    # resample until the matrix is well conditioned and all pivots behave
    n = bs.n
    while True:
        g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        if np.linalg.cond(g) > 100.0:
            continue
        ok = True
        for m in np.cumsum(bs.sizes)[:-1]:
            if np.linalg.cond(g[:m, :m]) > cond_cap:
                ok = False
                break
        if ok:
            return g


class TestGaussDecompose:
    def test_identity(self):
        bs = BlockStructure((1, 1))
        f = gauss_decompose(np.eye(2), bs)
        assert np.allclose(f.n_minus, np.eye(2))
        assert np.allclose(f.eta, np.eye(2))
        assert np.allclose(f.n_plus, np.eye(2))

    def test_two_by_two_frozen(self):
        bs = BlockStructure((1, 1))
        f = gauss_decompose(np.array([[2.0, 1.0], [1.0, 1.0]]), bs)
        assert np.allclose(f.n_minus, [[1.0, 0.0], [0.5, 1.0]])
        assert np.allclose(f.eta, [[2.0, 0.0], [0.0, 0.5]])
        assert np.allclose(f.n_plus, [[1.0, -0.5], [0.0, 1.0]])

    def test_singular_leading_block(self):
        bs = BlockStructure((1, 1))
        with pytest.raises(GaussDecompositionFailed) as err:
            gauss_decompose(np.array([[0.0, 1.0], [1.0, 0.0]]), bs)
        assert err.value.block == 0

    def test_failure_reports_inner_block(self):
        # leading 1x1 minor fine, second pivot (Schur complement) singular
        g = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 1.0]])
        with pytest.raises(GaussDecompositionFailed) as err:
            gauss_decompose(g, BlockStructure((1, 1, 1)))
        assert err.value.block == 1

    def test_round_trip_and_structure(self):
        rng = np.random.default_rng(23)
        for sizes in [(1, 1), (2, 2), (1, 2, 1)]:
            bs = BlockStructure(sizes)
            for _ in range(25):
                g = _random_gauss_input(rng, bs)
                f = gauss_decompose(g, bs)
                assert np.linalg.norm(f.recompose() - g) < 1e-10 * np.linalg.norm(g)
                # unit triangular structure of the outer factors
                for a in range(bs.count):
                    assert np.allclose(block(f.n_minus, bs, a, a), np.eye(bs.sizes[a]))
                    assert np.allclose(block(f.n_plus, bs, a, a), np.eye(bs.sizes[a]))
                    for b in range(a + 1, bs.count):
                        assert np.max(np.abs(block(f.n_minus, bs, a, b))) < 1e-12
                        assert np.max(np.abs(block(f.n_plus, bs, b, a))) < 1e-12
                        assert np.max(np.abs(block(f.eta, bs, a, b))) < 1e-12
                        assert np.max(np.abs(block(f.eta, bs, b, a))) < 1e-12

    def test_uniqueness(self):
        # decomposing a recomposed factorization returns the same factors
        rng = np.random.default_rng(29)
        bs = BlockStructure((2, 1))
        g = _random_gauss_input(rng, bs)
        f1 = gauss_decompose(g, bs)
        f2 = gauss_decompose(f1.recompose(), bs)
        assert np.allclose(f1.n_minus, f2.n_minus, atol=1e-10)
        assert np.allclose(f1.eta, f2.eta, atol=1e-10)
        assert np.allclose(f1.n_plus, f2.n_plus, atol=1e-10)


class TestBlockProject:
    def test_subdiagonal_projection(self):
        bs = BlockStructure((1, 1))
        out = block_project(np.array([[1.0, 2.0], [3.0, 4.0]]), bs, -2, [2])
        assert np.allclose(out, [[0.0, 0.0], [3.0, 0.0]])

    def test_diagonal_projection(self):
        bs = BlockStructure((1, 2))
        x = np.arange(9, dtype=float).reshape(3, 3)
        out = block_project(x, bs, 0, [2])
        expected = np.zeros((3, 3))
        expected[0, 0] = x[0, 0]
        expected[1:, 1:] = x[1:, 1:]
        assert np.allclose(out, expected)

    def test_absent_degree_is_zero(self):
        bs = BlockStructure((1, 1))
        out = block_project(np.ones((2, 2)), bs, 1, [2])
        assert np.max(np.abs(out)) == 0.0

    def test_partition_of_unity(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            count = int(rng.integers(1, 4))
            sizes = tuple(int(s) for s in rng.integers(1, 3, size=count))
            labels = [int(s) for s in rng.integers(0, 4, size=count - 1)]
            bs = BlockStructure(sizes)
            x = rng.normal(size=(bs.n, bs.n)) + 1j * rng.normal(size=(bs.n, bs.n))
            degrees = {block_degree(labels, a, b) for a in range(count) for b in range(count)}
            acc = np.zeros_like(x)
            for d in degrees:
                acc += block_project(x, bs, d, labels)
            assert np.allclose(acc, x)

    def test_degree_antisymmetry(self):
        labels = [2, 1, 3]
        for a in range(4):
            for b in range(4):
                assert block_degree(labels, a, b) == -block_degree(labels, b, a)
