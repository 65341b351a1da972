"""Rotation stage: parameterize every orthonormal Q compatible with (P, G).

The structural constraints collapse to a single matrix equation Q Z = W.
After reduction to full column rank, the solution set is either a single
matrix (rank Z = n) or the family W Z^+ + Wbar Ubar Zbar^T over orthonormal
Ubar of size k = n - rank Z. The final realization is assembled as
T = P Q sqrt(G), S = G T^-1 A_hat T.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import qr

from .errors import GramMismatch, SingularT
from .model import StateSpaceModel


@dataclass(frozen=True)
class RotationFamily:
    """All admissible Q: base + Wbar @ Ubar @ Zbar.T, Ubar in O(k)."""

    base: np.ndarray
    Wbar: np.ndarray
    Zbar: np.ndarray
    k: int
    rank_Z: int

    def member(self, Ubar: np.ndarray | None = None) -> np.ndarray:
        """The family member for a given Ubar (k = 0 needs no argument)."""
        if self.k == 0:
            return self.base.copy()
        Ubar = np.asarray(Ubar, dtype=float)
        if Ubar.shape != (self.k, self.k):
            raise ValueError(f"Ubar must be {self.k}x{self.k}, got {Ubar.shape}")
        return self.base + self.Wbar @ Ubar @ self.Zbar.T


@dataclass
class RCRealization:
    """A concrete realization (T, S, G) with its diagnostics."""

    T: np.ndarray
    S: np.ndarray
    G: np.ndarray
    symmetry_residual: float
    metzler_violation: float
    zero_norm: int
    one_norm: float
    residuals: dict[str, float] = field(default_factory=dict)


def build_ZW(
    P: np.ndarray,
    G: np.ndarray,
    model: StateSpaceModel,
    tol: float = 1e-8,
) -> tuple[np.ndarray, np.ndarray]:
    """Stack the constraint columns: W = [P C_hat^T | P^-1 B_hat], Z likewise.

    Z = [G^-1/2 C^T | G^-1/2 B]; absent constraint sides contribute no
    columns. Z^T Z = W^T W is exactly the scaling feasibility system
    evaluated at (P, G), so a mismatch means the supplied pair does not
    solve it.

    Raises:
        GramMismatch: Z^T Z != W^T W beyond tol * scale.
    """
    P = np.asarray(P, dtype=float)
    g = np.diag(np.asarray(G, dtype=float))
    sqrt_g = np.sqrt(g)
    W_parts = []
    Z_parts = []
    if model.output_constrained:
        W_parts.append(P @ model.C_hat.T)
        Z_parts.append(model.C_target.T / sqrt_g[:, None])
    if model.input_constrained:
        W_parts.append(np.linalg.solve(P, model.B_hat))
        Z_parts.append(model.B_target / sqrt_g[:, None])
    n = model.n
    W = np.hstack(W_parts) if W_parts else np.zeros((n, 0))
    Z = np.hstack(Z_parts) if Z_parts else np.zeros((n, 0))

    gz = Z.T @ Z
    gw = W.T @ W
    scale = max(1.0, np.abs(gz).max() if gz.size else 0.0,
                np.abs(gw).max() if gw.size else 0.0)
    gap = np.abs(gz - gw).max() if gz.size else 0.0
    if gap > tol * scale:
        raise GramMismatch(
            f"Z^T Z and W^T W differ by {gap:.3e}; the supplied (P, G) does "
            "not solve the scaling equations"
        )
    return Z, W


def reduce_full_column_rank(
    Z: np.ndarray, W: np.ndarray, tol_rank: float | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Select columns making Z full column rank without changing Img Z.

    Column-pivoted QR picks a spanning subset of the original columns, so
    residuals stay attributable to specific constraints. Q Z' = W' has the
    same solutions as Q Z = W. Returns (Z', W', L) with L the q x r selector.
    """
    Z = np.asarray(Z, dtype=float)
    W = np.asarray(W, dtype=float)
    q = Z.shape[1]
    if q == 0:
        return Z, W, np.zeros((0, 0))
    _, R, piv = qr(Z, mode="economic", pivoting=True)
    diag_R = np.abs(np.diag(R))
    if tol_rank is None:
        tol_rank = max(Z.shape) * np.finfo(float).eps * (diag_R[0] if diag_R.size else 0.0)
    r = int(np.sum(diag_R > tol_rank))
    if r == q:
        return Z, W, np.eye(q)
    selected = np.sort(piv[:r])
    L = np.zeros((q, r))
    L[selected, np.arange(r)] = 1.0
    return Z[:, selected], W[:, selected], L


def rotation_family(
    Z: np.ndarray, W: np.ndarray, tol_rank: float | None = None, tol: float = 1e-8
) -> RotationFamily:
    """Parameterize {Q orthonormal : Q Z = W} for full-column-rank Z.

    rank Z = n gives the unique Q = W Z^-1; otherwise the base point is
    W Z^+ (left pseudo-inverse) and the free action lives on the
    deterministic complement bases of Img Z and Img W.
    """
    from .linalg import orthonormal_complement

    Z = np.asarray(Z, dtype=float)
    W = np.asarray(W, dtype=float)
    n, q = Z.shape
    gz = Z.T @ Z
    gw = W.T @ W
    scale = max(1.0, np.abs(gz).max() if gz.size else 0.0)
    if gz.size and np.abs(gz - gw).max() > tol * scale:
        raise GramMismatch("Z and W do not share a Gram matrix")

    if tol_rank is None:
        z_scale = np.linalg.norm(Z) if Z.size else 0.0
        tol_rank = 1e-9 * max(z_scale, 1e-300)

    if q == n:
        sv = np.linalg.svd(Z, compute_uv=False)
        if sv[-1] > tol_rank:
            base = W @ np.linalg.inv(Z)
            empty = np.zeros((n, 0))
            return RotationFamily(base=base, Wbar=empty, Zbar=empty, k=0, rank_Z=n)

    # Left pseudo-inverse through the normal equations (full column rank).
    if q:
        base = W @ np.linalg.solve(gz, Z.T)
    else:
        base = np.zeros((n, n))
    Zbar, rz = orthonormal_complement(Z, tol_rank=tol_rank)
    Wbar, rw = orthonormal_complement(W, tol_rank=tol_rank)
    if rz != rw:
        raise GramMismatch(f"rank mismatch between Z ({rz}) and W ({rw})")
    return RotationFamily(base=base, Wbar=Wbar, Zbar=Zbar, k=n - rz, rank_Z=rz)


def assemble_realization(
    P: np.ndarray,
    G: np.ndarray,
    Q: np.ndarray,
    model: StateSpaceModel,
    prune_tol: float | None = None,
    orth_tol: float = 1e-8,
) -> RCRealization:
    """Build T = P Q sqrt(G) and S = G T^-1 A_hat T with diagnostics.

    ``orth_tol`` is the orthonormality gate on Q; noisy-mode callers widen
    it to the scaling residual level.

    Raises:
        SingularT: condition number of T above 1e12.
        ValueError: Q is not orthonormal within orth_tol.
    """
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    G = np.asarray(G, dtype=float)
    n = model.n
    if np.abs(Q.T @ Q - np.eye(n)).max() > orth_tol:
        raise ValueError(f"Q is not orthonormal within {orth_tol:g}")
    g = np.diag(G)
    T = (P @ Q) * np.sqrt(g)[None, :]
    sv = np.linalg.svd(T, compute_uv=False)
    if sv[-1] <= 0 or sv[0] / sv[-1] > 1e12:
        raise SingularT(
            f"assembled T has condition ~ {sv[0] / max(sv[-1], 1e-300):.3e}"
        )
    S = G @ np.linalg.solve(T, model.A_hat @ T)

    s_scale = max(np.abs(S).max(), 1e-300)
    if prune_tol is None:
        prune_tol = 1e-6 * s_scale
    off = S - np.diag(np.diag(S))
    min_off = off.min() if n > 1 else 0.0
    residuals: dict[str, float] = {}
    if model.output_constrained:
        residuals["output_constraint"] = float(
            np.abs(model.C_hat @ T - model.C_target).max()
        )
    if model.input_constrained:
        residuals["input_constraint"] = float(
            np.abs(np.linalg.solve(T, model.B_hat) - model.B_target / g[:, None]).max()
        )
    return RCRealization(
        T=T,
        S=S,
        G=G,
        symmetry_residual=float(np.abs(S - S.T).max()),
        metzler_violation=float(max(0.0, -min_off)),
        zero_norm=int(np.count_nonzero(np.abs(S) > prune_tol)),
        one_norm=float(np.abs(S).sum()),
        residuals=residuals,
    )
