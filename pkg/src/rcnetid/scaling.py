"""Scaling stage: recover the matrices D and G (equivalently M = P^2, H = G^-1).

With at most one structural constraint side active the feasibility system is
linear in the unknown entries and its solution set is a polyhedral cone; this
module builds that cone, enumerates its generators, and picks strictly
positive points. With both sides active the system couples D with its inverse
and is solved by seeded multistart local least squares, as is the relaxed
(noise-tolerant) variant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import least_squares, linprog, minimize, nnls

from . import cones
from .errors import BothConstraintsActive, NoFeasiblePoint, NoStrictlyPositive, TrivialCone
from .linalg import Diagonalization, commuting_pattern, spd_sqrt
from .model import StateSpaceModel


@dataclass
class ScalingOptions:
    """Knobs for the nonconvex / relaxed scaling solvers."""

    restarts: int = 20
    rng_seed: int = 0
    feas_tol: float = 1e-8
    max_nfev: int = 4000
    init_scale: float = 0.5


@dataclass(frozen=True)
class VariableLayout:
    """Map between cone coordinates and the entries of D and H = G^-1.

    Coordinates 0 .. len(d_entries)-1 hold the free entries of D (upper
    triangle positions within eigenvalue blocks, (i, j) with i <= j); the
    remaining n coordinates hold diag(H). On the input-constrained side the
    D coordinates parameterize D^-1 instead (``d_inverted``), which is what
    makes that system linear.
    """

    n: int
    d_entries: tuple[tuple[int, int], ...]
    side: str  # "output", "input", or "none"
    d_inverted: bool

    @property
    def n_d(self) -> int:
        return len(self.d_entries)

    @property
    def n_u(self) -> int:
        return self.n_d + self.n

    @property
    def designated_coordinate(self) -> int:
        """Index of the first H coordinate; used to normalize reported rays."""
        return self.n_d

    @property
    def diagonal_coordinates(self) -> tuple[int, ...]:
        return tuple(k for k, (i, j) in enumerate(self.d_entries) if i == j)

    @property
    def offdiag_coordinates(self) -> tuple[int, ...]:
        return tuple(k for k, (i, j) in enumerate(self.d_entries) if i != j)

    def assemble_symmetric(self, d_coords: np.ndarray) -> np.ndarray:
        """Symmetric matrix from the D coordinate vector (pattern zeros kept)."""
        D = np.zeros((self.n, self.n))
        for k, (i, j) in enumerate(self.d_entries):
            D[i, j] = d_coords[k]
            D[j, i] = d_coords[k]
        return D

    def h_of(self, x: np.ndarray) -> np.ndarray:
        return x[self.n_d:]

    def d_of(self, x: np.ndarray) -> np.ndarray:
        return x[: self.n_d]


@dataclass
class ScalingCone:
    """Linearized feasibility system {x >= 0 on sign-constrained coords, Ex = 0}."""

    equality_matrix: np.ndarray
    layout: VariableLayout
    determined_mask: np.ndarray  # per H coordinate: pinned by some equation
    diag: Diagonalization
    model: StateSpaceModel
    generators: list[np.ndarray] | None = None


@dataclass
class ScalingSolution:
    """A concrete (D, G) pair with the derived P = sqrt(V D V^T)."""

    D: np.ndarray
    G: np.ndarray
    P: np.ndarray
    residual: float
    residuals: dict[str, float] = field(default_factory=dict)
    g_defaulted: np.ndarray | None = None
    alpha: np.ndarray | None = None


class UniquenessAdvice(NamedTuple):
    unique_ray_expected: bool
    threshold: float


def uniqueness_heuristic(n: int, p: int) -> UniquenessAdvice:
    """Generic-data advisory: is a single solution ray expected?

    For a projection output matrix the equation count p(p+1)/2 meets the
    n + p - 1 free parameters of a ray exactly when
    p >= (sqrt(8n - 7) + 1) / 2. Advisory only: degenerate data can carry
    extra rays even above the threshold.
    """
    if n < 1 or not 1 <= p <= n:
        raise ValueError("need n >= 1 and 1 <= p <= n")
    threshold = (np.sqrt(8.0 * n - 7.0) + 1.0) / 2.0
    return UniquenessAdvice(bool(p >= threshold), float(threshold))


def _upper_indices(p: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(p) for b in range(a, p)]


def build_scaling_system(model: StateSpaceModel, diag: Diagonalization) -> ScalingCone:
    """Vectorize the single-side feasibility equations into E x = 0.

    Output side: C_hat V D V^T C_hat^T = C H C^T, unknowns (D entries, diag H).
    Input side: B_hat^T W^T D^-1 W B_hat = B^T H B, linear in (D^-1 entries,
    diag H), recorded via ``layout.d_inverted``.

    Raises:
        BothConstraintsActive: both sides present; use solve_joint_nonconvex.
    """
    if model.output_constrained and model.input_constrained:
        raise BothConstraintsActive(
            "both B and C targets present; the scaling system is not linear"
        )
    n = model.n
    mask = commuting_pattern(diag)
    d_entries = tuple(
        (i, j) for i in range(n) for j in range(i, n) if mask[i, j]
    )

    if model.output_constrained:
        side, inverted = "output", False
        F = model.C_hat @ diag.V
        T_target = model.C_target
        pairs = _upper_indices(F.shape[0])
    elif model.input_constrained:
        side, inverted = "input", True
        F = (diag.W @ model.B_hat).T  # m x n
        T_target = model.B_target.T  # rows indexed like F's rows
        pairs = _upper_indices(F.shape[0])
    else:
        layout = VariableLayout(n=n, d_entries=d_entries, side="none", d_inverted=False)
        E = np.zeros((0, layout.n_u))
        return ScalingCone(E, layout, np.zeros(n, dtype=bool), diag, model)

    layout = VariableLayout(n=n, d_entries=d_entries, side=side, d_inverted=inverted)
    rows = []
    for a, b in pairs:
        row = np.zeros(layout.n_u)
        for k, (i, j) in enumerate(d_entries):
            if i == j:
                row[k] = F[a, i] * F[b, i]
            else:
                row[k] = F[a, i] * F[b, j] + F[a, j] * F[b, i]
        for k in range(n):
            row[layout.n_d + k] = -T_target[a, k] * T_target[b, k]
        rows.append(row)
    E = np.array(rows).reshape(len(rows), layout.n_u)

    col_norm = np.abs(E[:, layout.n_d:]).max(axis=0) if E.size else np.zeros(n)
    determined = col_norm > 1e-12 * max(1.0, np.abs(E).max() if E.size else 0.0)
    return ScalingCone(E, layout, determined, diag, model)


def enumerate_generators(cone: ScalingCone) -> list[np.ndarray]:
    """Extreme rays of the scaling cone, normalized and deterministically ordered.

    Normalization: designated coordinate (first H entry) scaled to 1 when
    nonzero on the ray, otherwise largest entry 1. Order: lexicographic on
    support, then on values. Results are cached on the cone.

    Raises:
        TrivialCone: only x = 0 solves the system (this constraint side
            admits no RC scaling).
        ValueError: the eigenvalue pattern has off-diagonal free entries;
            those coordinates are sign-free and the solution set is not a
            pointed cone, so generators are not defined. Use the relaxed or
            joint solvers for repeated-eigenvalue models.
    """
    if cone.generators is not None:
        return cone.generators
    if cone.layout.offdiag_coordinates:
        raise ValueError(
            "repeated eigenvalues give sign-free D entries; the solution set "
            "has a lineality space and no generator description"
        )
    rays = cones.extreme_rays(cone.equality_matrix)
    if rays.shape[0] == 0:
        raise TrivialCone("only x = 0 satisfies the scaling equations")
    rays = cones.prune_conic_redundant(rays)

    dc = cone.layout.designated_coordinate
    normalized = []
    for r in rays:
        if r[dc] > 1e-9:
            normalized.append(r / r[dc])
        else:
            normalized.append(r / np.abs(r).max())

    def key(r: np.ndarray):
        return (tuple(np.nonzero(r)[0]), tuple(np.round(r, 12)))

    cone.generators = sorted(normalized, key=key)
    return cone.generators


def _solution_from_x(
    cone: ScalingCone,
    x: np.ndarray,
    alpha: np.ndarray | None,
    pos_tol: float = 1e-9,
    strict: bool = True,
) -> ScalingSolution:
    layout = cone.layout
    core = layout.assemble_symmetric(layout.d_of(x))
    if layout.d_inverted:
        w = np.linalg.eigvalsh(core)
        if strict and w.min() <= pos_tol * max(abs(w).max(), 1.0):
            raise NoStrictlyPositive("recovered D^-1 is not positive definite")
        D = np.linalg.inv(core)
    else:
        D = core
    w = np.linalg.eigvalsh(D)
    if strict and w.min() <= pos_tol * max(abs(w).max(), 1.0):
        raise NoStrictlyPositive("recovered D is not positive definite")

    h = layout.h_of(x).copy()
    defaulted = ~cone.determined_mask
    h[defaulted] = 1.0
    if strict and (h[cone.determined_mask] <= pos_tol).any():
        raise NoStrictlyPositive("a determined capacitance coordinate is not positive")
    h = np.clip(h, 1e-300, None)
    G = np.diag(1.0 / h)
    P = spd_sqrt(cone.diag.V @ D @ cone.diag.V.T)
    residuals = equation_residuals(cone.model, cone.diag, D, G)
    return ScalingSolution(
        D=D,
        G=G,
        P=P,
        residual=max(residuals.values(), default=0.0),
        residuals=residuals,
        g_defaulted=defaulted,
        alpha=None if alpha is None else np.asarray(alpha, dtype=float),
    )


def select_positive_solution(
    cone: ScalingCone, strategy: str = "target_identity"
) -> ScalingSolution:
    """Pick a strictly positive cone point and turn it into (D, G, P).

    Strategies:
        "chebyshev": maximize the minimum required coordinate over the
            simplex sum(alpha) = 1 (LP).
        "target_identity": least-squares match the determined H coordinates
            to 1 over alpha >= 0, so the recovered capacitances default to
            unit values where the data pins them.

    H coordinates that appear in no equation (unmeasured nodes) are
    unidentifiable; they default to 1 and are flagged in ``g_defaulted``.

    Raises:
        NoStrictlyPositive: every cone point leaves some required coordinate
            at zero (the cone only touches the positivity boundary).
    """
    gens = enumerate_generators(cone)
    layout = cone.layout
    Gmat = np.column_stack(gens)
    n_gen = Gmat.shape[1]
    required = list(layout.diagonal_coordinates) + [
        layout.n_d + k for k in range(layout.n) if cone.determined_mask[k]
    ]

    pure_free: dict[int, int] = {}
    for gi, g in enumerate(gens):
        support = np.nonzero(g)[0]
        if support.size == 1 and support[0] >= layout.n_d:
            k = support[0] - layout.n_d
            if not cone.determined_mask[k]:
                pure_free[support[0]] = gi

    if strategy == "chebyshev":
        # max t  s.t.  (G alpha)_r >= t for required r, sum alpha = 1, alpha >= 0
        c = np.zeros(n_gen + 1)
        c[-1] = -1.0
        A_ub = np.zeros((len(required), n_gen + 1))
        A_ub[:, :n_gen] = -Gmat[required]
        A_ub[:, -1] = 1.0
        A_eq = np.zeros((1, n_gen + 1))
        A_eq[0, :n_gen] = 1.0
        res = linprog(
            c,
            A_ub=A_ub,
            b_ub=np.zeros(len(required)),
            A_eq=A_eq,
            b_eq=[1.0],
            bounds=[(0, None)] * n_gen + [(None, None)],
            method="highs",
        )
        if res.status != 0 or (required and res.x[-1] <= 1e-11):
            raise NoStrictlyPositive(
                "no conic combination makes all required coordinates positive"
            )
        alpha = res.x[:n_gen]
    elif strategy == "target_identity":
        det_rows = [layout.n_d + k for k in range(layout.n) if cone.determined_mask[k]]
        if det_rows:
            alpha, _ = nnls(Gmat[det_rows], np.ones(len(det_rows)))
        else:
            alpha = np.ones(n_gen) / n_gen
        x_try = Gmat @ alpha
        if required and x_try[required].min() <= 1e-11 * max(x_try.max(), 1.0):
            # Blend in a little of the chebyshev direction to move off the
            # boundary without disturbing the identity fit measurably.
            cheb = select_positive_solution(cone, "chebyshev")
            alpha = alpha + 1e-6 * cheb.alpha * max(x_try.max(), 1.0)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    # Unidentifiable capacitances default to 1 through their own rays.
    x = Gmat @ alpha
    for coord, gi in pure_free.items():
        gap = 1.0 - x[coord]
        alpha[gi] += gap / Gmat[coord, gi]
        x = Gmat @ alpha

    if required and x[required].min() <= 1e-11 * max(x.max(), 1.0):
        raise NoStrictlyPositive(
            "no conic combination makes all required coordinates positive"
        )
    return _solution_from_x(cone, x, alpha)


def equation_residuals(
    model: StateSpaceModel,
    diag: Diagonalization,
    D: np.ndarray,
    G: np.ndarray,
) -> dict[str, float]:
    """Inf-norm residuals of every active scaling equation for (D, G)."""
    out: dict[str, float] = {}
    V, W = diag.V, diag.W
    g = np.diag(G)
    Hd = 1.0 / g
    if model.output_constrained:
        lhs = model.C_hat @ V @ D @ V.T @ model.C_hat.T
        rhs = (model.C_target * Hd) @ model.C_target.T
        out["output_equation"] = float(np.abs(lhs - rhs).max())
    if model.input_constrained:
        lhs = model.B_hat.T @ W.T @ np.linalg.solve(D, W @ model.B_hat)
        rhs = (model.B_target.T * Hd) @ model.B_target
        out["input_equation"] = float(np.abs(lhs - rhs).max())
    if model.output_constrained and model.input_constrained:
        lhs = model.C_hat @ model.B_hat
        rhs = (model.C_target * Hd) @ model.B_target
        out["compatibility_equation"] = float(np.abs(lhs - rhs).max())
    lam = diag.eigenvalues
    out["commutation"] = float(np.abs(lam[:, None] * D - D * lam[None, :]).max())
    return out


# ---------------------------------------------------------------------------
# Nonconvex (both-sides) and relaxed solvers
# ---------------------------------------------------------------------------


def _block_param_count(blocks) -> int:
    return sum(len(b) * (len(b) + 1) // 2 for b in blocks)


def _D_from_theta(theta: np.ndarray, diag: Diagonalization) -> np.ndarray:
    """Positive definite D with the commuting block pattern via log-Cholesky."""
    n = diag.n
    D = np.zeros((n, n))
    pos = 0
    for block in diag.blocks:
        s = len(block)
        L = np.zeros((s, s))
        for i in range(s):
            for j in range(i + 1):
                if i == j:
                    L[i, i] = np.exp(theta[pos])
                else:
                    L[i, j] = theta[pos]
                pos += 1
        Db = L @ L.T
        idx = np.array(block)
        D[np.ix_(idx, idx)] = Db
    return D


def _vec_upper(M: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(M.shape[0])
    return M[iu]


def _least_squares_scaling(
    model: StateSpaceModel,
    diag: Diagonalization,
    weights: tuple[float, float, float],
    options: ScalingOptions,
) -> tuple[ScalingSolution, float]:
    """Multistart weighted least squares over (D block entries, determined g)."""
    n = model.n
    w_out, w_in, w_cross = weights
    use_out = model.output_constrained
    use_in = model.input_constrained

    determined = np.zeros(n, dtype=bool)
    if use_out:
        determined |= np.abs(model.C_target).max(axis=0) > 0
    if use_in:
        determined |= np.abs(model.B_target).max(axis=1) > 0

    n_theta = _block_param_count(diag.blocks)
    det_idx = np.nonzero(determined)[0]
    dim = n_theta + len(det_idx)
    V, W = diag.V, diag.W

    def unpack(params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        D = _D_from_theta(params[:n_theta], diag)
        g = np.ones(n)
        g[det_idx] = np.exp(params[n_theta:])
        return D, g

    def residual_vec(params: np.ndarray) -> np.ndarray:
        D, g = unpack(params)
        Hd = 1.0 / g
        parts = []
        if use_out and w_out > 0:
            lhs = model.C_hat @ V @ D @ V.T @ model.C_hat.T
            rhs = (model.C_target * Hd) @ model.C_target.T
            parts.append(np.sqrt(w_out) * _vec_upper(lhs - rhs))
        if use_in and w_in > 0:
            lhs = model.B_hat.T @ W.T @ np.linalg.solve(D, W @ model.B_hat)
            rhs = (model.B_target.T * Hd) @ model.B_target
            parts.append(np.sqrt(w_in) * _vec_upper(lhs - rhs))
        if use_out and use_in and w_cross > 0:
            lhs = model.C_hat @ model.B_hat
            rhs = (model.C_target * Hd) @ model.B_target
            parts.append(np.sqrt(w_cross) * (lhs - rhs).ravel())
        if not parts:
            return np.zeros(1)
        return np.concatenate(parts)

    best_params = None
    best_inf = np.inf
    for restart in range(options.restarts):
        rng = np.random.default_rng([options.rng_seed, restart])
        x0 = rng.normal(0.0, options.init_scale, size=dim)
        try:
            res = least_squares(
                residual_vec, x0, method="trf", max_nfev=options.max_nfev,
                xtol=1e-14, ftol=1e-14, gtol=1e-14,
            )
        except (np.linalg.LinAlgError, ValueError):
            continue
        D, g = unpack(res.x)
        cand_inf = max(
            equation_residuals(model, diag, D, np.diag(g)).values(),
            default=0.0,
        )
        if cand_inf < best_inf:
            best_inf = cand_inf
            best_params = res.x
        if best_inf <= 0.01 * options.feas_tol:
            break

    if best_params is None:
        raise NoFeasiblePoint("every restart failed to evaluate", residual=np.inf)
    D, g = unpack(best_params)
    G = np.diag(g)
    residuals = equation_residuals(model, diag, D, G)
    sol = ScalingSolution(
        D=D,
        G=G,
        P=spd_sqrt(V @ D @ V.T),
        residual=max(residuals.values(), default=0.0),
        residuals=residuals,
        g_defaulted=~determined,
    )
    return sol, best_inf


def solve_joint_nonconvex(
    model: StateSpaceModel,
    diag: Diagonalization,
    options: ScalingOptions | None = None,
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> ScalingSolution:
    """Solve the coupled (D, G) system when both B and C targets are present.

    Local minimization of the squared residuals of the three matrix
    equalities over the free D entries and the determined diagonal of G,
    positivity enforced by log parameterization, best over seeded restarts.

    Raises:
        NoFeasiblePoint: best residual stayed above options.feas_tol; the
            exception carries that residual, and callers may fall back to
            solve_relaxed.
    """
    if not (model.output_constrained and model.input_constrained):
        raise ValueError("solve_joint_nonconvex needs both constraint sides")
    options = options or ScalingOptions()
    sol, best_inf = _least_squares_scaling(model, diag, weights, options)
    if best_inf > options.feas_tol:
        raise NoFeasiblePoint(
            f"best residual {best_inf:.3e} above feasibility tolerance "
            f"{options.feas_tol:.3e} after {options.restarts} restarts",
            residual=best_inf,
        )
    return sol


def solve_relaxed(
    model: StateSpaceModel,
    diag: Diagonalization,
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0),
    options: ScalingOptions | None = None,
) -> ScalingSolution:
    """Noise-tolerant scaling solve; always returns the best point found.

    One active constraint side reduces to a convex least-squares problem in
    (D, H) which is solved to global optimality on the normalized slice
    sum(x) = 1 (the objective is scale-degenerate without it); the reported
    solution is renormalized so the designated coordinate equals 1. With
    both sides active this is the weighted version of the joint solver with
    no feasibility gate. The ``residual`` conveys solution quality.
    """
    options = options or ScalingOptions()
    if model.output_constrained and model.input_constrained:
        sol, _ = _least_squares_scaling(model, diag, weights, options)
        return sol
    if not (model.output_constrained or model.input_constrained):
        n = model.n
        D = np.eye(n)
        G = np.eye(n)
        return ScalingSolution(
            D=D,
            G=G,
            P=spd_sqrt(diag.V @ D @ diag.V.T),
            residual=0.0,
            residuals=equation_residuals(model, diag, D, G),
            g_defaulted=np.ones(n, dtype=bool),
        )

    cone = build_scaling_system(model, diag)
    layout = cone.layout
    E = cone.equality_matrix
    w = weights[0] if layout.side == "output" else weights[1]
    nonneg = np.ones(layout.n_u, dtype=bool)
    for k in layout.offdiag_coordinates:
        nonneg[k] = False

    if w == 0.0 or E.shape[0] == 0:
        x = np.zeros(layout.n_u)
        x[nonneg] = 1.0
        sol = _solution_from_x(cone, x, None, strict=False)
        sol.residuals["objective"] = 0.0
        sol.residual = 0.0
        return sol

    EtE = w * (E.T @ E)

    def objective(x):
        return float(x @ EtE @ x)

    def grad(x):
        return 2.0 * (EtE @ x)

    x0 = np.zeros(layout.n_u)
    x0[nonneg] = 1.0 / nonneg.sum()
    bounds = [(0.0, None) if nonneg[i] else (None, None) for i in range(layout.n_u)]
    constraint = {
        "type": "eq",
        "fun": lambda x: x[nonneg].sum() - 1.0,
        "jac": lambda x: nonneg.astype(float),
    }
    res = minimize(
        objective,
        x0,
        jac=grad,
        bounds=bounds,
        constraints=[constraint],
        method="SLSQP",
        options={"maxiter": 400, "ftol": 1e-16},
    )
    x = res.x
    # On exact data the optimum lies in null(E); the projection removes the
    # solver's convergence residue. (With noise the support-restricted
    # system has no sub-threshold null direction and this is a no-op.)
    x = _project_onto_null(x, E)
    dc = layout.designated_coordinate
    if x[dc] > 1e-9:
        x = x / x[dc]

    try:
        sol = _solution_from_x(cone, x, None, strict=True)
    except NoStrictlyPositive:
        # Boundary optimum: polish with a positivity-preserving
        # parameterization (scale pinned by a sum penalty).
        x = _log_polish(cone, np.clip(x, 1e-8, None) * nonneg + x * ~nonneg, w)
        if x[dc] > 1e-9:
            x = x / x[dc]
        sol = _solution_from_x(cone, x, None, strict=False)
    obj = float(np.sqrt(w) * np.linalg.norm(E @ (x / max(x[nonneg].sum(), 1e-300))))
    sol.residuals["objective"] = obj
    sol.residual = max(
        (v for k, v in sol.residuals.items() if k != "objective"), default=0.0
    )
    return sol


def _project_onto_null(x: np.ndarray, E: np.ndarray, rank_rel_tol: float = 1e-9) -> np.ndarray:
    """Project x onto the numerical null space of E restricted to its support."""
    if E.shape[0] == 0:
        return x
    support = np.nonzero(np.abs(x) > 1e-12 * max(np.abs(x).max(), 1e-300))[0]
    if support.size == 0:
        return x
    cs = np.abs(E[:, support]).max(axis=0)
    cs[cs == 0.0] = 1.0
    Es = E[:, support] / cs[None, :]
    _, s, Vt = np.linalg.svd(Es, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rank_rel_tol * smax)) if smax else 0
    nullb = Vt[rank:].T
    if nullb.shape[1] == 0:
        return x
    y = x[support] * cs
    proj = nullb @ (nullb.T @ y)
    if np.abs(proj - y).max() > 1e-3 * max(np.abs(y).max(), 1e-300):
        return x
    out = x.copy()
    out[support] = proj / cs
    return out


def _log_polish(cone: ScalingCone, x_init: np.ndarray, w: float) -> np.ndarray:
    layout = cone.layout
    E = cone.equality_matrix
    nonneg = np.ones(layout.n_u, dtype=bool)
    for k in layout.offdiag_coordinates:
        nonneg[k] = False

    def pack(x):
        th = x.copy()
        th[nonneg] = np.log(np.clip(x[nonneg], 1e-12, None))
        return th

    def unpack(th):
        x = th.copy()
        x[nonneg] = np.exp(th[nonneg])
        return x

    total = x_init[nonneg].sum()

    def residual_vec(th):
        x = unpack(th)
        return np.concatenate(
            [np.sqrt(w) * (E @ x), [x[nonneg].sum() - total]]
        )

    res = least_squares(residual_vec, pack(x_init), method="trf", max_nfev=2000)
    return unpack(res.x)
