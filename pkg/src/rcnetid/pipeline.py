"""End-to-end reconstruction: diagonalize, scale, rotate, search, report.

The pipeline mirrors the staged structure of the solvers. Scaling goes
through the cone (single constraint side, exact data), the joint nonconvex
solver (both sides), or the relaxed solver (noisy data or repeated
eigenvalues); the rotation family is then searched exhaustively (k <= 1) or
by the sparsity-driven multistart (k >= 2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import netgen
from .errors import NoFeasiblePoint
from .linalg import Diagonalization, real_diagonalize
from .metzler import SearchConfig, SearchResult, minimize_l1, solve_exhaustive_small_k, solve_metzler
from .model import StateSpaceModel
from .rotation import RCRealization, RotationFamily, build_ZW, reduce_full_column_rank, rotation_family
from .scaling import (
    ScalingOptions,
    ScalingSolution,
    build_scaling_system,
    enumerate_generators,
    select_positive_solution,
    solve_joint_nonconvex,
    solve_relaxed,
    uniqueness_heuristic,
)


@dataclass
class PipelineOptions:
    strategy: str = "target_identity"
    relaxed: bool = False
    metzler_only: bool = False
    search: SearchConfig = field(default_factory=SearchConfig)
    scaling: ScalingOptions = field(default_factory=ScalingOptions)
    tol_eig: float | None = None


@dataclass
class PipelineResult:
    model: StateSpaceModel
    diag: Diagonalization
    scaling: ScalingSolution
    family: RotationFamily
    search: SearchResult
    realization: RCRealization
    graph: netgen.WeightedGraph
    generators: list[np.ndarray] | None
    feasible: bool
    report: dict


def _to_jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {k: _to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_jsonable(v) for v in value]
    return value


def run_pipeline(model: StateSpaceModel, options: PipelineOptions | None = None) -> PipelineResult:
    """Reconstruct an RC realization for the model, or raise why not.

    Raises:
        NotRCRealizable: the diagonalizability gate failed.
        TrivialCone / NoStrictlyPositive / NoFeasiblePoint: the scaling
            stage proved or gave up on infeasibility (exact mode only).
    """
    options = options or PipelineOptions()
    diag = real_diagonalize(model.A_hat, tol_eig=options.tol_eig)

    generators = None
    both_sides = model.output_constrained and model.input_constrained
    if options.relaxed:
        scaling_sol = solve_relaxed(model, diag, options=options.scaling)
        mode = "relaxed"
    elif both_sides:
        try:
            scaling_sol = solve_joint_nonconvex(model, diag, options=options.scaling)
            mode = "joint"
        except NoFeasiblePoint:
            raise
    elif not diag.distinct:
        scaling_sol = solve_relaxed(model, diag, options=options.scaling)
        mode = "relaxed-blocks"
    else:
        cone = build_scaling_system(model, diag)
        generators = enumerate_generators(cone)
        scaling_sol = select_positive_solution(cone, options.strategy)
        mode = "cone"

    gram_tol = 1e-8
    if options.relaxed or mode == "relaxed-blocks":
        gram_tol = max(1e-6, 100.0 * scaling_sol.residual)
    Z, W = build_ZW(scaling_sol.P, scaling_sol.G, model, tol=gram_tol)
    Z_r, W_r, _ = reduce_full_column_rank(Z, W)
    family = rotation_family(Z_r, W_r, tol=gram_tol)

    if family.k <= 1:
        search = solve_exhaustive_small_k(family, scaling_sol.P, scaling_sol.G, model, options.search)
    elif options.metzler_only:
        search = solve_metzler(family, scaling_sol.P, scaling_sol.G, model, options.search)
    else:
        search = minimize_l1(family, scaling_sol.P, scaling_sol.G, model, options.search)

    realization = search.best
    prune = options.search.prune_tol
    if prune is None:
        prune = 1e-6 * max(np.abs(realization.S).max(), 1e-300)
    graph = netgen.graph_from_S(realization.S, model.C_target, prune_tol=prune)

    n, p = model.n, model.p
    advice = uniqueness_heuristic(n, p) if 1 <= p <= n else None
    spectrum_gap = float(
        np.abs(
            np.sort(np.linalg.eigvals(np.linalg.solve(realization.G, realization.S)).real)
            - diag.eigenvalues
        ).max()
    )
    report = {
        "model": {"n": n, "p": p, "m": model.m,
                  "output_constrained": model.output_constrained,
                  "input_constrained": model.input_constrained,
                  "name": model.name},
        "diagonalization": {
            "eigenvalues": diag.eigenvalues,
            "blocks": [list(b) for b in diag.blocks],
            "distinct": diag.distinct,
            "reconstruction_residual": float(
                np.abs(diag.V @ np.diag(diag.eigenvalues) @ diag.W - model.A_hat).max()
            ),
        },
        "uniqueness_advice": None if advice is None else
            {"unique_ray_expected": advice.unique_ray_expected, "threshold": advice.threshold},
        "scaling": {
            "mode": mode,
            "residual": scaling_sol.residual,
            "residuals": scaling_sol.residuals,
            "alpha": scaling_sol.alpha,
            "g_defaulted": None if scaling_sol.g_defaulted is None else scaling_sol.g_defaulted,
            "generators": generators,
        },
        "rotation": {
            "k": family.k,
            "rank_Z": family.rank_Z,
            "gram_residual": float(np.abs(Z_r.T @ Z_r - W_r.T @ W_r).max()) if Z_r.size else 0.0,
        },
        "search": {
            "feasible": search.feasible,
            "objective": search.objective,
            "per_restart_log": [list(rec) for rec in search.per_restart_log],
        },
        "realization": {
            "symmetry_residual": realization.symmetry_residual,
            "metzler_violation": realization.metzler_violation,
            "zero_norm": realization.zero_norm,
            "one_norm": realization.one_norm,
            "constraint_residuals": realization.residuals,
            "spectrum_deviation": spectrum_gap,
        },
        "graph": {
            "edges": [[i + 1, j + 1, w] for i, j, w in graph.edges],
            "unmeasured_nodes": [i + 1 for i in range(graph.n) if not graph.measured[i]],
        },
    }
    return PipelineResult(
        model=model,
        diag=diag,
        scaling=scaling_sol,
        family=family,
        search=search,
        realization=realization,
        graph=graph,
        generators=generators,
        feasible=search.feasible,
        report=_to_jsonable(report),
    )
