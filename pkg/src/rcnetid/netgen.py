"""Synthetic RC instances, graph extraction, DOT export, and file formats.

Instances follow the scramble protocol: a random connected conductance
graph defines S = -I K I^T (I the incidence matrix, K the diagonal of
integer conductances), unit capacitances G = I, and a random well-conditioned
similarity hides the realization behind the "identified" pair
(A_hat, C_hat). Matrices travel as JSON objects {rows, cols, data} with
row-major data; graphs render to deterministic DOT text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GenerationBudgetExceeded, NodeCountMismatch
from .model import StateSpaceModel

_MAX_ATTEMPTS = 1000


@dataclass(frozen=True)
class RCInstance:
    """Ground-truth system plus its scrambled, 'identified' counterpart."""

    n: int
    S_true: np.ndarray
    G_true: np.ndarray
    C_target: np.ndarray
    T_tilde: np.ndarray
    A_hat: np.ndarray
    C_hat: np.ndarray
    edges: tuple[tuple[int, int, float], ...]
    seed: int

    def model(self) -> StateSpaceModel:
        return StateSpaceModel(
            A_hat=self.A_hat,
            C_hat=self.C_hat,
            C_target=self.C_target,
            name=f"rc_instance_seed{self.seed}",
        )


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted graph on nodes 0..n-1 (rendered 1-based)."""

    n: int
    measured: tuple[bool, ...]
    edges: tuple[tuple[int, int, float], ...]  # i < j, no self loops


def _connected(n: int, edges: list[tuple[int, int]]) -> bool:
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = [False] * n
    stack = [0]
    seen[0] = True
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if not seen[w]:
                seen[w] = True
                stack.append(w)
    return all(seen)


def laplacian_from_edges(
    n: int, edges: list[tuple[int, int, float]]
) -> np.ndarray:
    """S = -I K I^T: off-diagonal (i, j) holds +k_e, rows sum to zero."""
    S = np.zeros((n, n))
    for i, j, k in edges:
        S[i, j] += k
        S[j, i] += k
        S[i, i] -= k
        S[j, j] -= k
    return S


def random_rc_instance(
    n: int,
    m: int,
    edge_probability: float = 0.5,
    conductance_range: tuple[int, int] = (1, 3),
    seed: int = 0,
) -> RCInstance:
    """Generate a connected random RC instance and scramble it.

    Conductances are integers drawn from ``conductance_range`` (inclusive).
    Regenerates until the graph is connected, the scramble T_tilde has
    condition number <= 1e4, and A_hat has well-separated eigenvalues (the
    diagonal-D cone path downstream needs a simple spectrum).

    Raises:
        GenerationBudgetExceeded: constraints not met within 1000 attempts.
    """
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    if n < 2:
        raise ValueError("need at least two nodes")
    rng = np.random.default_rng(seed)
    lo, hi = conductance_range

    for _ in range(_MAX_ATTEMPTS):
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        chosen = [p for p in pairs if rng.random() < edge_probability]
        if not _connected(n, chosen):
            continue
        edges = [(i, j, float(rng.integers(lo, hi + 1))) for i, j in chosen]
        S = laplacian_from_edges(n, edges)
        lam = np.sort(np.linalg.eigvalsh(S))
        scale = max(np.abs(lam).max(), 1.0)
        if np.diff(lam).min() <= 1e-6 * scale:
            continue

        T_tilde = None
        for _ in range(_MAX_ATTEMPTS):
            cand = rng.uniform(-1.0, 1.0, size=(n, n))
            sv = np.linalg.svd(cand, compute_uv=False)
            if sv[-1] > 0 and sv[0] / sv[-1] <= 1e4:
                T_tilde = cand
                break
        if T_tilde is None:
            continue

        C = np.eye(n)[:m]
        A_hat = np.linalg.solve(T_tilde, S @ T_tilde)
        C_hat = C @ T_tilde
        return RCInstance(
            n=n,
            S_true=S,
            G_true=np.eye(n),
            C_target=C,
            T_tilde=T_tilde,
            A_hat=A_hat,
            C_hat=C_hat,
            edges=tuple(edges),
            seed=seed,
        )
    raise GenerationBudgetExceeded(
        f"no admissible instance for n={n}, m={m} within {_MAX_ATTEMPTS} attempts"
    )


def graph_from_S(
    S: np.ndarray, C_target: np.ndarray | None = None, prune_tol: float = 0.0
) -> WeightedGraph:
    """Read the weighted connection graph off the realization matrix.

    An edge (i, j, S_ij) exists for each i < j with |S_ij| > prune_tol;
    self loops are omitted. Nodes whose column in C_target is zero are
    flagged unmeasured.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    if C_target is None:
        measured = tuple(True for _ in range(n))
    else:
        C_target = np.asarray(C_target, dtype=float)
        measured = tuple(bool(np.abs(C_target[:, k]).max() > 0) for k in range(n))
    edges = tuple(
        (i, j, float(S[i, j]))
        for i in range(n)
        for j in range(i + 1, n)
        if abs(S[i, j]) > prune_tol
    )
    return WeightedGraph(n=n, measured=measured, edges=edges)


def emit_dot(graph: WeightedGraph) -> str:
    """Deterministic DOT text: nodes in index order, unmeasured in red."""
    lines = ["graph rc_network {"]
    for i in range(graph.n):
        attr = "" if graph.measured[i] else " [color=red]"
        lines.append(f"  {i + 1}{attr};")
    for i, j, w in graph.edges:
        lines.append(f'  {i + 1} -- {j + 1} [label="{w:.4g}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def compare_graphs(
    g_true: WeightedGraph, g_rec: WeightedGraph, weight_tol: float = 1e-6
) -> dict:
    """Edge-set precision/recall and a verdict between two graphs.

    Verdicts: "identical" (same edges, weights within weight_tol),
    "same-topology" (same edges, weights differ), "different". A
    reconstructed network that differs from the truth is a legitimate
    outcome, so this only reports.

    Raises:
        NodeCountMismatch: node counts differ.
    """
    if g_true.n != g_rec.n:
        raise NodeCountMismatch(f"{g_true.n} nodes vs {g_rec.n}")
    true_edges = {(i, j): w for i, j, w in g_true.edges}
    rec_edges = {(i, j): w for i, j, w in g_rec.edges}
    matched = set(true_edges) & set(rec_edges)
    precision = len(matched) / len(rec_edges) if rec_edges else 1.0
    recall = len(matched) / len(true_edges) if true_edges else 1.0
    max_dev = max(
        (abs(true_edges[e] - rec_edges[e]) for e in matched), default=0.0
    )
    same_topology = set(true_edges) == set(rec_edges)
    if same_topology and max_dev <= weight_tol:
        verdict = "identical"
    elif same_topology:
        verdict = "same-topology"
    else:
        verdict = "different"
    return {
        "verdict": verdict,
        "precision": precision,
        "recall": recall,
        "matched_edges": len(matched),
        "true_edges": len(true_edges),
        "reconstructed_edges": len(rec_edges),
        "max_weight_deviation": max_dev,
    }


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def matrix_to_json(M: np.ndarray) -> dict:
    M = np.asarray(M, dtype=float)
    return {"rows": M.shape[0], "cols": M.shape[1], "data": M.ravel().tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    data = np.asarray(obj["data"], dtype=float)
    return data.reshape(int(obj["rows"]), int(obj["cols"]))


def model_to_json(model: StateSpaceModel) -> dict:
    out = {"A_hat": matrix_to_json(model.A_hat)}
    if model.C_hat is not None:
        out["C_hat"] = matrix_to_json(model.C_hat)
    if model.B_hat is not None:
        out["B_hat"] = matrix_to_json(model.B_hat)
    if model.C_target is not None:
        out["C"] = matrix_to_json(model.C_target)
    if model.B_target is not None:
        out["B"] = matrix_to_json(model.B_target)
    if model.name:
        out["name"] = model.name
    return out


def model_from_json(obj: dict) -> StateSpaceModel:
    def get(key):
        return matrix_from_json(obj[key]) if key in obj else None

    return StateSpaceModel(
        A_hat=matrix_from_json(obj["A_hat"]),
        C_hat=get("C_hat"),
        B_hat=get("B_hat"),
        C_target=get("C"),
        B_target=get("B"),
        name=obj.get("name", ""),
    )


def save_model(model: StateSpaceModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_json(model), indent=2, sort_keys=True) + "\n")


def load_model(path: str | Path) -> StateSpaceModel:
    return model_from_json(json.loads(Path(path).read_text()))


def save_instance(instance: RCInstance, out_dir: str | Path) -> dict[str, Path]:
    """Write model.json, truth.json, and network_true.dot; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "model": out / "model.json",
        "truth": out / "truth.json",
        "dot": out / "network_true.dot",
    }
    save_model(instance.model(), paths["model"])
    truth = {
        "S_true": matrix_to_json(instance.S_true),
        "G_true": matrix_to_json(instance.G_true),
        "T_tilde": matrix_to_json(instance.T_tilde),
        "edges": [[i, j, w] for i, j, w in instance.edges],
        "seed": instance.seed,
    }
    paths["truth"].write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n")
    graph = graph_from_S(instance.S_true, instance.C_target)
    paths["dot"].write_text(emit_dot(graph))
    return paths
