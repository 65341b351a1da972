"""Double-description enumeration against a brute-force vertex oracle."""

from __future__ import annotations

import itertools

import numpy as np

from rcnetid.cones import extreme_rays, prune_conic_redundant


def vertex_oracle(E: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Vertices of {x >= 0, E x = 0, sum(x) = 1} by exhaustive basis enumeration.

    Independent of the double-description path: every vertex of the slice is
    a basic feasible solution of the stacked equality system, so trying all
    column subsets of basis size finds them all.
    """
    E = np.asarray(E, dtype=float)
    ne, d = E.shape
    Et = np.vstack([E, np.ones(d)])
    bt = np.zeros(ne + 1)
    bt[-1] = 1.0
    rank = np.linalg.matrix_rank(Et, tol=tol)
    verts: list[np.ndarray] = []
    for cols in itertools.combinations(range(d), rank):
        M = Et[:, cols]
        if np.linalg.matrix_rank(M, tol=tol) < rank:
            continue
        sol, *_ = np.linalg.lstsq(M, bt, rcond=None)
        if np.abs(M @ sol - bt).max() > tol:
            continue
        if (sol < -tol).any():
            continue
        x = np.zeros(d)
        x[list(cols)] = np.clip(sol, 0.0, None)
        if not any(np.abs(x - v).max() <= 1e-7 for v in verts):
            verts.append(x)
    return np.array(verts).reshape(len(verts), d)


def as_slice_points(rays: np.ndarray) -> np.ndarray:
    """Normalize rays onto the sum(x) = 1 slice and sort for comparison."""
    pts = np.array([r / r.sum() for r in rays])
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def test_orthant_rays_are_axes():
    rays = extreme_rays(np.zeros((0, 3)))
    assert rays.shape == (3, 3)
    np.testing.assert_allclose(rays, np.eye(3), atol=0)


def test_sum_zero_cone_is_trivial():
    rays = extreme_rays(np.array([[1.0, 1.0]]))
    assert rays.shape[0] == 0


def test_equality_pair():
    # x1 = x2, x3 free: rays (1,1,0)/max and e3
    rays = extreme_rays(np.array([[1.0, -1.0, 0.0]]))
    assert rays.shape[0] == 2
    expected = {(0.0, 0.0, 1.0), (1.0, 1.0, 0.0)}
    got = {tuple(np.round(r, 9)) for r in rays}
    assert got == expected


def test_matches_oracle_on_random_systems():
    rng = np.random.default_rng(2024)
    checked = 0
    for trial in range(60):
        d = int(rng.integers(3, 7))
        ne = int(rng.integers(1, d))
        E = rng.normal(size=(ne, d))
        # plant a positive vector in the null space so the cone is nontrivial
        x_pos = rng.uniform(0.5, 2.0, d)
        E = E - np.outer(E @ x_pos, x_pos) / (x_pos @ x_pos)
        rays = extreme_rays(E)
        verts = vertex_oracle(E)
        assert rays.shape[0] == verts.shape[0], f"trial {trial}"
        if rays.shape[0]:
            got = as_slice_points(rays)
            want = as_slice_points(verts)
            assert np.abs(got - want).max() <= 1e-7, f"trial {trial}"
            checked += 1
    assert checked >= 40


def test_rays_satisfy_system_and_nonnegativity():
    rng = np.random.default_rng(5)
    for _ in range(20):
        d = int(rng.integers(3, 8))
        E = rng.normal(size=(int(rng.integers(1, d)), d))
        x_pos = rng.uniform(0.5, 2.0, d)
        E = E - np.outer(E @ x_pos, x_pos) / (x_pos @ x_pos)
        for r in extreme_rays(E):
            assert (r >= 0).all()
            assert np.abs(E @ r).max() <= 1e-8 * max(1.0, np.abs(E).max())
            assert np.abs(r).max() == 1.0


def test_deterministic_output():
    rng = np.random.default_rng(8)
    E = rng.normal(size=(2, 5))
    x_pos = rng.uniform(0.5, 2.0, 5)
    E = E - np.outer(E @ x_pos, x_pos) / (x_pos @ x_pos)
    r1 = extreme_rays(E)
    r2 = extreme_rays(E)
    assert np.array_equal(r1, r2)


def test_prune_removes_interior_ray():
    rays = np.array(
        [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.5, 0.5, 0.0],  # conic combination of the first two
        ]
    )
    kept = prune_conic_redundant(rays)
    assert kept.shape[0] == 2
    assert not any(np.allclose(r, [0.5, 0.5, 0.0]) for r in kept)


def test_badly_scaled_columns():
    # Ray with coordinates spanning 8 orders of magnitude must survive.
    true_ray = np.array([1e8, 1.0, 3e-1, 2e6])
    rng = np.random.default_rng(3)
    E = rng.normal(size=(3, 4))
    E = E - np.outer(E @ true_ray, true_ray) / (true_ray @ true_ray)
    rays = extreme_rays(E)
    assert rays.shape[0] == 1
    r = rays[0] / rays[0].max()
    assert np.abs(r - true_ray / true_ray.max()).max() <= 1e-6
