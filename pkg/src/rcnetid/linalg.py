"""Deterministic numerical kernels shared by all solver stages.

Real diagonalization with eigenvalue-block detection, Gram-based rotation
construction, orthonormal complements, SPD square roots, and seeded sampling
of the orthogonal group. Everything here is a pure function of its inputs;
outputs follow fixed sign/order conventions so repeated runs are bit-stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import GramMismatch, NotPositiveDefinite, NotRCRealizable

# Condition-number gate for "numerically defective" eigenvector matrices.
COND_LIMIT = 1e12


@dataclass(frozen=True)
class Diagonalization:
    """Eigendecomposition A = V diag(eigenvalues) W with W = V^-1.

    Eigenvalues are real and sorted ascending; V columns have unit 2-norm
    with their first significant component positive. ``blocks`` partitions
    the indices into groups of numerically equal eigenvalues.
    """

    V: np.ndarray
    eigenvalues: np.ndarray
    W: np.ndarray
    blocks: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def distinct(self) -> bool:
        """True when every eigenvalue block is a singleton."""
        return all(len(b) == 1 for b in self.blocks)


@dataclass(frozen=True)
class OrthoSample:
    """A seeded draw from one connected component of O(k)."""

    U: np.ndarray
    component_flag: str  # "plus" (det +1) or "minus" (det -1)
    skew_seed: np.ndarray


def _sign_normalize_columns(M: np.ndarray) -> np.ndarray:
    """Flip column signs so the first significant component is positive."""
    M = M.copy()
    for j in range(M.shape[1]):
        col = M[:, j]
        amax = np.abs(col).max()
        if amax == 0.0:
            continue
        nz = np.nonzero(np.abs(col) > 1e-9 * amax)[0]
        if col[nz[0]] < 0:
            M[:, j] = -col
    return M


def real_diagonalize(A: np.ndarray, tol_eig: float | None = None) -> Diagonalization:
    """Diagonalize a real matrix, rejecting complex or defective spectra.

    Args:
        A: square real matrix.
        tol_eig: absolute tolerance separating eigenvalue blocks and bounding
            acceptable imaginary parts. Defaults to 1e-7 * ||A||_inf.

    Returns:
        Diagonalization with ascending eigenvalues and deterministic
        eigenvector normalization.

    Raises:
        NotRCRealizable: complex eigenvalue pair beyond tolerance, or
            eigenvector matrix with condition estimate above 1e12
            (numerically defective). Either condition means no RC
            realization exists.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    n = A.shape[0]
    scale = max(np.abs(A).max(), 1e-300)
    if tol_eig is None:
        tol_eig = 1e-7 * scale

    lam, V = np.linalg.eig(A)
    imag_max = np.abs(lam.imag).max() if n else 0.0
    if imag_max > tol_eig:
        raise NotRCRealizable(
            f"complex eigenvalue pair detected (|Im| = {imag_max:.3e} > {tol_eig:.3e}); "
            "the model cannot be similar to a symmetrizable matrix"
        )

    # Realify: conjugate pairs inside tolerance are replaced by the real and
    # imaginary parts of one member, which span the same invariant subspace.
    Vr = np.empty((n, n))
    lam_r = lam.real.copy()
    used = np.zeros(n, dtype=bool)
    for i in range(n):
        if used[i]:
            continue
        if abs(lam[i].imag) <= 1e-14 * scale:
            Vr[:, i] = V[:, i].real
            used[i] = True
            continue
        j_match = None
        for j in range(i + 1, n):
            if not used[j] and abs(lam[j] - np.conj(lam[i])) <= 10 * tol_eig:
                j_match = j
                break
        if j_match is None:
            Vr[:, i] = V[:, i].real
            used[i] = True
            continue
        Vr[:, i] = V[:, i].real
        Vr[:, j_match] = V[:, i].imag
        used[i] = used[j_match] = True

    order = np.argsort(lam_r, kind="stable")
    lam_r = lam_r[order]
    Vr = Vr[:, order]
    norms = np.linalg.norm(Vr, axis=0)
    if norms.min() <= 1e-300:
        raise NotRCRealizable("degenerate eigenvector (zero column)")
    Vr = _sign_normalize_columns(Vr / norms)

    sv = np.linalg.svd(Vr, compute_uv=False)
    if sv[-1] <= 0 or sv[0] / sv[-1] > COND_LIMIT:
        raise NotRCRealizable(
            f"eigenvector matrix numerically singular (cond ~ {sv[0] / max(sv[-1], 1e-300):.3e}); "
            "the matrix is defective"
        )
    W = np.linalg.inv(Vr)

    # Single-linkage clustering on the sorted eigenvalues.
    blocks: list[tuple[int, ...]] = []
    current = [0] if n else []
    for i in range(1, n):
        if lam_r[i] - lam_r[i - 1] <= tol_eig:
            current.append(i)
        else:
            blocks.append(tuple(current))
            current = [i]
    if current:
        blocks.append(tuple(current))

    return Diagonalization(V=Vr, eigenvalues=lam_r, W=W, blocks=tuple(blocks))


def commuting_pattern(diag: Diagonalization) -> np.ndarray:
    """Boolean mask of the entries of D left free by diag(lam) D = D diag(lam).

    mask[i, j] is True exactly when i and j fall in the same eigenvalue
    block; elsewhere the commutation relation forces d_ij = 0.
    """
    n = diag.n
    mask = np.zeros((n, n), dtype=bool)
    for block in diag.blocks:
        idx = np.array(block)
        mask[np.ix_(idx, idx)] = True
    return mask


def orthonormal_complement(
    M: np.ndarray, tol_rank: float | None = None
) -> tuple[np.ndarray, int]:
    """Orthonormal basis of the orthogonal complement of the column space.

    Args:
        M: n x m matrix (m may be 0).
        tol_rank: absolute singular-value threshold for the numerical rank.
            Defaults to max(n, m) * eps * smax.

    Returns:
        (complement, r): complement is n x (n - r) with orthonormal columns
        orthogonal to Img M; r is the numerical rank.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("expected a 2-d array")
    n, m = M.shape
    if m == 0:
        comp = np.eye(n)
        return comp, 0
    U, s, _ = np.linalg.svd(M, full_matrices=True)
    smax = s[0] if s.size else 0.0
    if tol_rank is None:
        tol_rank = max(n, m) * np.finfo(float).eps * smax
    r = int(np.sum(s > tol_rank))
    comp = _sign_normalize_columns(U[:, r:])
    return comp, r


def gram_rotation(target: np.ndarray, source: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal Q with Q @ source = target, given equal Gram matrices.

    The construction maps an orthonormal basis of col(source) onto the
    corresponding basis of col(target) (well defined because the columns
    have identical inner products) and acts as the identity pairing between
    the two deterministic complement bases.

    Raises:
        GramMismatch: ||target^T target - source^T source||_inf exceeds
            tol * scale.
    """
    A = np.asarray(target, dtype=float)
    B = np.asarray(source, dtype=float)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    n = A.shape[0]
    GA = A.T @ A
    GB = B.T @ B
    scale = max(1.0, np.abs(GA).max(), np.abs(GB).max())
    gap = np.abs(GA - GB).max() if GA.size else 0.0
    if gap > tol * scale:
        raise GramMismatch(
            f"Gram matrices differ by {gap:.3e} (allowed {tol * scale:.3e})"
        )

    Ub, s, Vtb = np.linalg.svd(B, full_matrices=False) if B.shape[1] else (
        np.zeros((n, 0)), np.zeros(0), np.zeros((0, 0)))
    smax = s[0] if s.size else 0.0
    rank_tol = max(B.shape) * np.finfo(float).eps * smax if s.size else 0.0
    r = int(np.sum(s > max(rank_tol, np.sqrt(tol * scale) * 1e-3)))

    if r:
        Ua = A @ (Vtb[:r].T / s[:r])
        # Drift from the Gram gap can leave Ua slightly non-orthonormal.
        q, rr = np.linalg.qr(Ua)
        Ua = q * np.sign(np.diag(rr))
        Ub_r = Ub[:, :r]
    else:
        Ua = np.zeros((n, 0))
        Ub_r = np.zeros((n, 0))

    comp_b, _ = orthonormal_complement(Ub_r)
    comp_a, _ = orthonormal_complement(Ua)
    Q = Ua @ Ub_r.T + comp_a @ comp_b.T
    return Q


def spd_sqrt(M: np.ndarray) -> np.ndarray:
    """Symmetric positive definite square root via eigendecomposition.

    Raises:
        NotPositiveDefinite: an eigenvalue is below the numerical-zero
            threshold.
        ValueError: input is not symmetric within 1e-10 * ||M||.
    """
    M = np.asarray(M, dtype=float)
    scale = max(np.abs(M).max(), 1e-300)
    if np.abs(M - M.T).max() > 1e-10 * scale:
        raise ValueError("matrix is not symmetric")
    w, U = np.linalg.eigh((M + M.T) / 2.0)
    tol = M.shape[0] * np.finfo(float).eps * max(abs(w[0]), abs(w[-1]))
    if w[0] <= tol:
        raise NotPositiveDefinite(
            f"smallest eigenvalue {w[0]:.3e} is not positive (threshold {tol:.3e})"
        )
    P = (U * np.sqrt(w)) @ U.T
    return (P + P.T) / 2.0


def random_orthogonal(
    k: int,
    rng_seed: int | np.random.Generator = 0,
    component_flag: str = "plus",
    sigma: float = 1.0,
) -> OrthoSample:
    """Seeded sample from one connected component of O(k).

    Draws a skew-symmetric matrix with entries uniform in [-sigma, sigma],
    exponentiates it (an element of SO(k)), and multiplies by the component
    anchor: the identity for "plus", diag(-1, 1, ..., 1) for "minus".
    k = 0 yields the empty matrix; k = 1 yields (+1) or (-1).
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if component_flag not in ("plus", "minus"):
        raise ValueError(f"unknown component flag {component_flag!r}")
    rng = (
        rng_seed
        if isinstance(rng_seed, np.random.Generator)
        else np.random.default_rng(rng_seed)
    )
    S = np.zeros((k, k))
    iu = np.triu_indices(k, 1)
    S[iu] = rng.uniform(-sigma, sigma, size=len(iu[0]))
    S = S - S.T
    anchor = np.eye(k)
    if component_flag == "minus":
        if k == 0:
            raise ValueError("O(0) has a single element; no 'minus' component")
        anchor[0, 0] = -1.0
    U = expm(S) @ anchor if k else np.zeros((0, 0))
    return OrthoSample(U=U, component_flag=component_flag, skew_seed=S)
