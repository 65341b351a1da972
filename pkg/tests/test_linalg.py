"""Core numerical kernels: diagonalization, Gram rotations, complements."""

from __future__ import annotations

import numpy as np
import pytest

from rcnetid import (
    GramMismatch,
    NotPositiveDefinite,
    NotRCRealizable,
    commuting_pattern,
    gram_rotation,
    orthonormal_complement,
    random_orthogonal,
    real_diagonalize,
    spd_sqrt,
)

from conftest import REF_A_HAT


class TestRealDiagonalize:
    def test_reference_instance_distinct_real(self):
        diag = real_diagonalize(REF_A_HAT)
        assert diag.n == 4
        assert len(diag.blocks) == 4
        assert all(len(b) == 1 for b in diag.blocks)
        assert diag.distinct
        np.testing.assert_allclose(diag.eigenvalues, [-4.0, -3.0, -1.0, 0.0], atol=1e-9)

    def test_reconstruction_and_inverse(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = rng.integers(2, 7)
            S = rng.normal(size=(n, n))
            S = S + S.T  # symmetric: guaranteed real spectrum
            diag = real_diagonalize(S)
            scale = np.abs(S).max()
            recon = diag.V @ np.diag(diag.eigenvalues) @ diag.W
            assert np.abs(recon - S).max() <= 1e-8 * scale
            assert np.abs(diag.W @ diag.V - np.eye(n)).max() <= 1e-8

    def test_identity_single_block(self):
        diag = real_diagonalize(np.eye(2))
        np.testing.assert_allclose(diag.eigenvalues, [1.0, 1.0])
        assert diag.blocks == ((0, 1),)
        np.testing.assert_allclose(diag.V, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(diag.W, np.eye(2), atol=1e-12)

    def test_complex_pair_rejected(self):
        with pytest.raises(NotRCRealizable, match="complex"):
            real_diagonalize(np.array([[0.0, 1.0], [-1.0, 0.0]]))

    def test_defective_rejected(self):
        with pytest.raises(NotRCRealizable):
            real_diagonalize(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_sorted_ascending_and_sign_convention(self):
        diag = real_diagonalize(REF_A_HAT)
        assert (np.diff(diag.eigenvalues) >= 0).all()
        for j in range(diag.n):
            col = diag.V[:, j]
            nz = np.nonzero(np.abs(col) > 1e-9 * np.abs(col).max())[0]
            assert col[nz[0]] > 0
            assert abs(np.linalg.norm(col) - 1.0) < 1e-12

    def test_deterministic(self):
        d1 = real_diagonalize(REF_A_HAT)
        d2 = real_diagonalize(REF_A_HAT)
        assert np.array_equal(d1.V, d2.V)
        assert np.array_equal(d1.eigenvalues, d2.eigenvalues)

    def test_block_clustering(self):
        A = np.diag([2.0, 2.0 + 1e-12, 5.0])
        diag = real_diagonalize(A, tol_eig=1e-7)
        assert diag.blocks == ((0, 1), (2,))

    def test_rejects_nonsquare_and_nonfinite(self):
        with pytest.raises(ValueError):
            real_diagonalize(np.zeros((2, 3)))
        with pytest.raises(ValueError):
            real_diagonalize(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class TestCommutingPattern:
    def test_distinct_gives_diagonal_mask(self):
        diag = real_diagonalize(np.diag([1.0, 2.0, 3.0]))
        mask = commuting_pattern(diag)
        assert np.array_equal(mask, np.eye(3, dtype=bool))

    def test_repeated_gives_block(self):
        diag = real_diagonalize(np.diag([2.0, 2.0, 5.0]))
        mask = commuting_pattern(diag)
        expected = np.zeros((3, 3), dtype=bool)
        expected[:2, :2] = True
        expected[2, 2] = True
        assert np.array_equal(mask, expected)

    def test_reference_instance_diagonal(self):
        mask = commuting_pattern(real_diagonalize(REF_A_HAT))
        assert np.array_equal(mask, np.eye(4, dtype=bool))
        assert mask.sum() == 4  # four free entries


class TestGramRotation:
    def test_equal_inputs(self):
        rng = np.random.default_rng(0)
        B = rng.normal(size=(4, 2))
        Q = gram_rotation(B, B)
        assert np.abs(Q.T @ Q - np.eye(4)).max() <= 1e-10
        assert np.abs(Q @ B - B).max() <= 1e-9

    def test_unit_vector_rotation(self):
        e1 = np.eye(3)[:, [0]]
        e2 = np.eye(3)[:, [1]]
        Q = gram_rotation(e2, e1)
        assert np.abs(Q.T @ Q - np.eye(3)).max() <= 1e-10
        assert np.abs(Q @ e1 - e2).max() <= 1e-10

    def test_roundtrip_oracle(self):
        # generate-and-verify: hide Q0, require the recovered Q to act like it
        rng = np.random.default_rng(42)
        for trial in range(30):
            n = rng.integers(2, 6)
            m = rng.integers(1, n + 1)
            B = rng.normal(size=(n, m))
            Q0 = np.linalg.qr(rng.normal(size=(n, n)))[0]
            A = Q0 @ B
            Q = gram_rotation(A, B)
            assert np.abs(Q @ B - A).max() <= 1e-8, f"trial {trial}"
            assert np.abs(Q.T @ Q - np.eye(n)).max() <= 1e-10

    def test_mismatch_raises(self):
        rng = np.random.default_rng(1)
        B = rng.normal(size=(3, 2))
        with pytest.raises(GramMismatch):
            gram_rotation(2.0 * B, B)

    def test_rank_deficient_source(self):
        B = np.array([[1.0, 2.0], [0.0, 0.0], [0.0, 0.0]])
        Q0 = np.linalg.qr(np.random.default_rng(5).normal(size=(3, 3)))[0]
        Q = gram_rotation(Q0 @ B, B)
        assert np.abs(Q @ B - Q0 @ B).max() <= 1e-8


class TestOrthonormalComplement:
    def test_full_rank_square(self):
        comp, r = orthonormal_complement(np.eye(3))
        assert r == 3
        assert comp.shape == (3, 0)

    def test_single_vector(self):
        comp, r = orthonormal_complement(np.eye(3)[:, [0]])
        assert r == 1
        assert comp.shape == (3, 2)
        assert np.abs(comp.T @ np.eye(3)[:, 0]).max() <= 1e-12

    def test_rank_deficient_known_factors(self):
        rng = np.random.default_rng(9)
        L = rng.normal(size=(5, 2))
        R = rng.normal(size=(2, 3))
        M = L @ R  # 5x3, rank 2 by construction
        comp, r = orthonormal_complement(M)
        assert r == 2
        assert comp.shape == (5, 3)
        assert np.abs(M.T @ comp).max() <= 1e-10
        assert np.abs(comp.T @ comp - np.eye(3)).max() <= 1e-12

    def test_empty_input(self):
        comp, r = orthonormal_complement(np.zeros((4, 0)))
        assert r == 0
        assert np.array_equal(comp, np.eye(4))


class TestSpdSqrt:
    def test_identity(self):
        np.testing.assert_allclose(spd_sqrt(np.eye(3)), np.eye(3), atol=1e-12)

    def test_diagonal(self):
        np.testing.assert_allclose(
            spd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-12
        )

    def test_square_roundtrip(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            n = rng.integers(2, 6)
            X = rng.normal(size=(n, n))
            M = X @ X.T + n * np.eye(n)
            P = spd_sqrt(M)
            assert np.abs(P - P.T).max() <= 1e-12
            assert np.abs(P @ P - M).max() <= 1e-9 * np.abs(M).max()

    def test_eigenvalue_idempotence(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(4, 4))
        P = spd_sqrt(X @ X.T + 4 * np.eye(4))
        P2 = spd_sqrt(P @ P)
        assert np.abs(np.linalg.eigvalsh(P2) - np.linalg.eigvalsh(P)).max() <= 1e-9

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            spd_sqrt(np.diag([1.0, -1.0]))

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            spd_sqrt(np.array([[1.0, 0.5], [0.0, 1.0]]))


class TestRandomOrthogonal:
    def test_o1_elements(self):
        assert random_orthogonal(1, 0, "plus").U.item() == pytest.approx(1.0)
        assert random_orthogonal(1, 0, "minus").U.item() == pytest.approx(-1.0)

    def test_k_zero_empty(self):
        sample = random_orthogonal(0, 0, "plus")
        assert sample.U.shape == (0, 0)

    def test_orthonormal_and_det(self):
        for seed in range(20):
            for flag, det in [("plus", 1.0), ("minus", -1.0)]:
                s = random_orthogonal(3, seed, flag)
                assert np.abs(s.U.T @ s.U - np.eye(3)).max() <= 1e-12
                assert np.linalg.det(s.U) == pytest.approx(det, abs=1e-10)
                assert np.abs(s.skew_seed + s.skew_seed.T).max() == 0.0

    def test_both_components_reached(self):
        dets = [
            np.linalg.det(random_orthogonal(4, i, "plus" if i % 2 else "minus").U)
            for i in range(100)
        ]
        assert any(d > 0.5 for d in dets) and any(d < -0.5 for d in dets)

    def test_seed_determinism(self):
        a = random_orthogonal(5, 123, "plus").U
        b = random_orthogonal(5, 123, "plus").U
        assert np.array_equal(a, b)

    def test_sigma_bounds_skew(self):
        s = random_orthogonal(6, 7, "plus", sigma=0.25)
        assert np.abs(s.skew_seed).max() <= 0.25

    def test_bad_args(self):
        with pytest.raises(ValueError):
            random_orthogonal(-1, 0)
        with pytest.raises(ValueError):
            random_orthogonal(2, 0, "sideways")
        with pytest.raises(ValueError):
            random_orthogonal(0, 0, "minus")
