"""Shared fixtures: the bundled 4-node reference instance and scramble helpers.

The reference instance is the worked 4-node example shipped with the
project. Its published companion values (generator list and realization
matrices) are internally inconsistent with the printed system matrices —
see the acceptance suite for the encoded-as-published checks and
tests for the behavior verified by independent oracles.
"""

from __future__ import annotations

import numpy as np
import pytest

from rcnetid import StateSpaceModel

# Identified pair of the reference instance.
REF_A_HAT = np.array(
    [
        [-10.0, -4.0, -23.0, 5.0],
        [1.0, -1.0, 3.0, -1.0],
        [3.0, 1.0, 7.0, -2.0],
        [1.0, -1.0, 3.0, -4.0],
    ]
)
REF_C_HAT = np.array(
    [
        [1.0, 0.0, 3.0, -1.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, -1.0, 1.0, 0.0],
    ]
)
REF_C = np.eye(4)[:3]

# Published companion values (kept verbatim as data fixtures).
REF_S_PUBLISHED = np.array(
    [
        [-4.0, 1.0, 1.0, 2.0],
        [1.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, -2.0, 1.0],
        [2.0, 0.0, 1.0, -3.0],
    ]
)
REF_S1_PUBLISHED = REF_S_PUBLISHED.copy()
REF_S2_PUBLISHED = np.array(
    [
        [-4.0, 1.0, 1.0, -2.0],
        [1.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, -2.0, -1.0],
        [-2.0, 0.0, -1.0, -3.0],
    ]
)
REF_V1_PUBLISHED = np.array([1.98, 11.334, 7.5, 3.186, 1.0, 1.0, 1.0, 0.0])


@pytest.fixture
def ref_model() -> StateSpaceModel:
    return StateSpaceModel(
        A_hat=REF_A_HAT, C_hat=REF_C_HAT, C_target=REF_C, name="reference-4node"
    )


def scramble_model(
    S: np.ndarray,
    C: np.ndarray,
    B: np.ndarray | None = None,
    seed: int = 0,
    cond_limit: float = 1e3,
) -> tuple[StateSpaceModel, np.ndarray]:
    """Hide a known symmetric realization (G = I) behind a random similarity.

    Returns (model, T_tilde); the ground-truth recovery transformation is
    T_tilde^-1.
    """
    rng = np.random.default_rng(seed)
    n = S.shape[0]
    while True:
        T = rng.uniform(-1.0, 1.0, size=(n, n))
        sv = np.linalg.svd(T, compute_uv=False)
        if sv[-1] > 0 and sv[0] / sv[-1] <= cond_limit:
            break
    A_hat = np.linalg.solve(T, S @ T)
    C_hat = C @ T
    kwargs = {}
    if B is not None:
        kwargs = {"B_hat": np.linalg.solve(T, B), "B_target": B}
    model = StateSpaceModel(A_hat=A_hat, C_hat=C_hat, C_target=C, **kwargs)
    return model, T


def random_laplacian(n: int, seed: int, min_gap: float = 1e-4) -> np.ndarray:
    """Connected integer-conductance Laplacian-form S with simple spectrum."""
    rng = np.random.default_rng(seed)
    while True:
        S = np.zeros((n, n))
        edges = []
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.6:
                    edges.append((i, j, float(rng.integers(1, 4))))
        # force connectivity with a random spanning path
        order = rng.permutation(n)
        for a, b in zip(order[:-1], order[1:]):
            i, j = min(a, b), max(a, b)
            if not any(e[0] == i and e[1] == j for e in edges):
                edges.append((i, j, float(rng.integers(1, 4))))
        for i, j, k in edges:
            S[i, j] += k
            S[j, i] += k
            S[i, i] -= k
            S[j, j] -= k
        lam = np.sort(np.linalg.eigvalsh(S))
        if np.diff(lam).min() > min_gap * max(np.abs(lam).max(), 1.0):
            return S
