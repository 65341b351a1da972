"""Extreme-ray enumeration for cones of the form {x >= 0 : E x = 0}.

The enumeration runs the double-description method against the nonnegative
orthant, with two structural shortcuts that cover the common cases cheaply:

* columns of E that are identically zero contribute their coordinate axes
  directly (the cone is a direct sum across those coordinates), and
* when the remaining system has a one-dimensional null space the single
  candidate ray is read off an SVD null vector.

Rays are reported max-normalized, sorted lexicographically by support and
then by value, and polished by projecting back onto the null space of E
restricted to their support (ray combination chains otherwise accumulate
floating-point drift).
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

# Classification tolerance for the floating-point double description: zero
# sets and sign tests of combined rays carry cancellation noise well above
# machine precision, so the working tolerance is deliberately loose; the
# final null-space polish restores full accuracy on the surviving rays.
_DD_TOL = 1e-7
_SNAP = 1e-9        # entries below this (relative to max = 1) are snapped to 0
_POPCOUNT_TABLE = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


def _popcount(x: np.ndarray) -> np.ndarray:
    """Bit-population count of a uint64 array."""
    return _POPCOUNT_TABLE[x.view(np.uint8).reshape(x.shape + (8,))].sum(axis=-1)


def _pack_zero_sets(rays: np.ndarray, tol: float) -> np.ndarray:
    """Zero coordinates of each ray packed into one uint64 bitmask per ray."""
    d = rays.shape[1]
    bits = (np.abs(rays) <= tol).astype(np.uint64)
    weights = (np.uint64(1) << np.arange(d, dtype=np.uint64))
    return bits @ weights


def _normalize(r: np.ndarray) -> np.ndarray:
    r = r / np.abs(r).max()
    r[np.abs(r) < _SNAP] = 0.0
    return r


def _dd_step(rays: np.ndarray, a: np.ndarray, n_processed: int, tol: float) -> np.ndarray:
    """One double-description step: intersect the cone with {x : a.x = 0}."""
    d = rays.shape[1]
    vals = rays @ a
    pos = np.nonzero(vals > tol)[0]
    neg = np.nonzero(vals < -tol)[0]
    zero = np.nonzero(np.abs(vals) <= tol)[0]

    keep = [rays[i] for i in zero]
    if len(pos) == 0 or len(neg) == 0:
        return np.array(keep).reshape(len(keep), d)

    zsets = _pack_zero_sets(rays, tol)
    # Necessary condition for adjacency: the pair's common zero set must have
    # at least d - 2 - rho coordinates, rho bounded by the constraints done.
    need = max(d - 2 - min(n_processed, d), 0)
    meets = zsets[pos][:, None] & zsets[neg][None, :]
    candidates = np.argwhere(_popcount(meets) >= need)

    new = []
    for ip_idx, im_idx in candidates:
        ip, im = pos[ip_idx], neg[im_idx]
        meet = zsets[ip] & zsets[im]
        others = np.bitwise_and(meet, ~zsets) == 0     # meet subset of Z(r)
        others[ip] = others[im] = False
        if others.any():
            continue
        r = vals[ip] * rays[im] - vals[im] * rays[ip]
        new.append(_normalize(r))

    out = keep + new
    if not out:
        return np.zeros((0, d))
    out = np.array(out)
    # Deduplicate (snapping can occasionally merge nearly-parallel rays).
    uniq: list[np.ndarray] = []
    for r in out:
        if not any(np.abs(r - u).max() <= 1e-9 for u in uniq):
            uniq.append(r)
    return np.array(uniq)


def _polish(ray: np.ndarray, E: np.ndarray, rank_rel_tol: float = 1e-9) -> np.ndarray:
    """Project a ray onto null(E) restricted to its support.

    Column equilibration keeps the support-restricted rank detection honest
    for badly scaled systems; the null space is taken at the same relative
    singular-value threshold as the enumeration itself.
    """
    support = np.nonzero(ray)[0]
    if support.size == 0 or E.shape[0] == 0:
        return ray
    cs = np.abs(E[:, support]).max(axis=0)
    cs[cs == 0.0] = 1.0
    Es = E[:, support] / cs[None, :]
    _, s, Vt = np.linalg.svd(Es, full_matrices=True)
    smax = s[0] if s.size else 0.0
    r_rank = int(np.sum(s > rank_rel_tol * smax)) if smax else 0
    nullb = Vt[r_rank:].T
    if nullb.shape[1] == 0:
        return ray
    y = ray[support] * cs
    proj = nullb @ (nullb.T @ y)
    if (proj < -1e-9 * np.abs(proj).max()).any():
        return ray
    polished = np.zeros_like(ray)
    polished[support] = np.clip(proj, 0.0, None) / cs
    if np.abs(polished).max() == 0.0:
        return ray
    return _normalize(polished)


def _sort_rays(rays: np.ndarray) -> np.ndarray:
    def key(r: np.ndarray):
        support = tuple(np.nonzero(r)[0])
        return (support, tuple(np.round(r, 12)))

    return np.array(sorted(rays, key=key)).reshape(len(rays), rays.shape[1])


def extreme_rays(
    E: np.ndarray, tol: float = _DD_TOL, rank_rel_tol: float = 1e-9
) -> np.ndarray:
    """Extreme rays of {x >= 0 : E x = 0}, one per row, max-normalized.

    An empty result means the cone is {0}. E may have zero rows (the cone is
    then the whole orthant, whose rays are the coordinate axes).

    Two conditioning safeguards make this usable on systems assembled from
    identified models: columns are equilibrated (a positive column scaling
    maps rays bijectively), and singular values below ``rank_rel_tol`` times
    the largest are treated as exact nulls, so the enumeration runs on the
    orthogonalized significant rows instead of on noise.
    """
    E = np.asarray(E, dtype=float)
    if E.ndim != 2:
        raise ValueError("E must be 2-d")
    ne, d = E.shape
    if d == 0:
        return np.zeros((0, 0))
    if d > 63:
        raise ValueError("double description supports at most 63 variables")

    # Scale rows; drop numerically zero ones.
    if ne:
        row_scale = np.abs(E).max(axis=1)
        live = row_scale > tol * max(1.0, np.abs(E).max())
        E_live = E[live] / row_scale[live, None]
    else:
        E_live = E

    col_scale = np.abs(E_live).max(axis=0) if E_live.shape[0] else np.zeros(d)
    free_cols = np.nonzero(col_scale <= tol)[0]
    bound_cols = np.nonzero(col_scale > tol)[0]

    rays_full: list[np.ndarray] = []
    for j in free_cols:
        e = np.zeros(d)
        e[j] = 1.0
        rays_full.append(e)

    if bound_cols.size:
        scale_b = col_scale[bound_cols]
        Er = E_live[:, bound_cols] / scale_b[None, :]
        rs = np.abs(Er).max(axis=1)
        Er = Er[rs > tol] / rs[rs > tol, None]
        _, s, Vt = np.linalg.svd(Er, full_matrices=True)
        smax = s[0] if s.size else 0.0
        rank = int(np.sum(s > rank_rel_tol * smax)) if smax else 0
        nullity = bound_cols.size - rank

        sub_rays: list[np.ndarray] = []
        if nullity == 1:
            v = Vt[rank]
            if np.abs(v).max() > 0 and (v / v[np.abs(v).argmax()] >= -tol).all():
                v = v / v[np.abs(v).argmax()]
                sub_rays.append(np.clip(v, 0.0, None))
        elif nullity > 1:
            sub = np.eye(len(bound_cols))
            for n_done, a in enumerate(Vt[:rank]):
                sub = _dd_step(sub, a, n_done, tol)
                if sub.shape[0] == 0:
                    break
            sub_rays.extend(sub)
        for r_sub in sub_rays:
            r = np.zeros(d)
            r[bound_cols] = r_sub / scale_b  # undo column equilibration
            rays_full.append(_normalize(r))

    if not rays_full:
        return np.zeros((0, d))
    rays = np.array([_polish(r, E, rank_rel_tol) for r in rays_full])
    return _sort_rays(rays)


def prune_conic_redundant(rays: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Drop rays expressible as conic combinations of the others (LP check).

    Double description already yields extreme rays; this is the build-time
    certificate, and it also cleans up duplicates that survive snapping in
    near-degenerate systems.
    """
    rays = np.asarray(rays, dtype=float)
    keep = list(range(rays.shape[0]))
    changed = True
    while changed:
        changed = False
        for idx in list(keep):
            others = [i for i in keep if i != idx]
            if not others:
                continue
            A_eq = rays[others].T
            res = linprog(
                c=np.zeros(len(others)),
                A_eq=A_eq,
                b_eq=rays[idx],
                bounds=[(0, None)] * len(others),
                method="highs",
            )
            if res.status == 0 and np.abs(A_eq @ res.x - rays[idx]).max() <= tol:
                keep.remove(idx)
                changed = True
    return rays[keep]
