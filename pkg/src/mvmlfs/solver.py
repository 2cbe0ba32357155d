"""Joint non-negative objective and its alternating multiplicative updates.

The model learns, per view i, a feature-to-label map W_i (d_i x l), a
per-sample confidence vector C_i (length n), and coefficients Wy_i
((n+1) x d_i) that reconstruct the view from the label-kernel space.  With
A_i = diag(C_i) X_i and D_i = Yx Wy_i, the objective is

    sum_i ||A_i W_i - Y||_F^2
      + alpha * Tr(D^T L_Y D)
      + beta  * sum_i ||D_i - A_i||_F^2
      + gamma * ||D - X_fusion||_F^2
      + delta * ||stack(W)||_{2,1}

All three variable groups stay elementwise non-negative because each update
multiplies by a ratio of non-negative terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .datasets import MultiViewDataset
from .fusion import FusionMatrix, ViewWeights, build_fusion, compute_view_weights, uniform_view_weights
from .graph import GraphPair
from .label_space import LabelKernel, label_kernel, label_laplacian

# Stabilizer added to every update denominator and to row norms before
# inversion; keeps the multiplicative ratios finite when a variable hits 0.
EPS = 1e-8

ABLATIONS = ("full", "v1_no_confidence", "v2_uniform_view_weights",
             "v3_no_reconstruction")


@dataclass(frozen=True)
class Hyperparams:
    """Trade-off scalars, graph settings and stopping rule for a fit."""

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    delta: float = 1.0
    q: int = 5
    sigma: float = 1.0
    tol: float = 1e-3
    max_iters: int = 100
    seed: int = 42
    ablation: str = "full"

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.q < 1:
            raise ValueError("q must be at least 1")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.ablation not in ABLATIONS:
            raise ValueError(
                f"ablation must be one of {ABLATIONS}, got {self.ablation!r}"
            )


@dataclass
class ModelState:
    """Learnable blocks plus the cached sparsity diagonal.

    e_diag holds the diagonal of the d_total x d_total matrix E with
    entries 1 / (2 * ||row_j(W)||_2 + eps).
    """

    W_blocks: list[np.ndarray]
    C_blocks: list[np.ndarray]
    Wy_blocks: list[np.ndarray]
    e_diag: np.ndarray
    iteration: int = 0

    def stacked_W(self) -> np.ndarray:
        return np.vstack(self.W_blocks)


@dataclass(frozen=True)
class ConvergenceTrace:
    """Objective value per sweep and the relative drop between sweeps."""

    objective_values: np.ndarray
    rel_changes: np.ndarray
    converged: bool
    iterations_run: int


def sparsity_diagonal(W_stacked: np.ndarray) -> np.ndarray:
    """Diagonal of E: 1 / (2 * row norm + eps), strictly positive."""
    row_norms = np.linalg.norm(W_stacked, axis=1)
    return 1.0 / (2.0 * row_norms + EPS)


def l21_norm(W: np.ndarray) -> float:
    """Sum of l2 norms of the rows."""
    return float(np.linalg.norm(W, axis=1).sum())


def init_state(ds: MultiViewDataset, l: int, hp: Hyperparams) -> ModelState:
    """Seeded start: W and Wy uniform in (0, 1), confidence all ones."""
    rng = np.random.default_rng(hp.seed)
    n = ds.n_samples

    def positive_uniform(shape):
        u = rng.random(shape)
        u[u == 0.0] = 0.5
        return u

    W_blocks = [positive_uniform((x.shape[1], l)) for x in ds.views]
    Wy_blocks = [positive_uniform((n + 1, x.shape[1])) for x in ds.views]
    C_blocks = [np.ones(n) for _ in ds.views]
    return ModelState(W_blocks=W_blocks, C_blocks=C_blocks, Wy_blocks=Wy_blocks,
                      e_diag=sparsity_diagonal(np.vstack(W_blocks)))


def _view_slices(ds: MultiViewDataset) -> list[slice]:
    slices, pos = [], 0
    for x in ds.views:
        slices.append(slice(pos, pos + x.shape[1]))
        pos += x.shape[1]
    return slices


def evaluate_objective(ds: MultiViewDataset, fusion: FusionMatrix,
                       kernel: LabelKernel, labelgraph: GraphPair,
                       state: ModelState, hp: Hyperparams) -> float:
    """Current value of the joint objective for the given state."""
    Y = ds.labels
    total = 0.0
    A_blocks = [c[:, None] * x for c, x in zip(state.C_blocks, ds.views)]
    for A, W in zip(A_blocks, state.W_blocks):
        total += float(np.linalg.norm(A @ W - Y, "fro") ** 2)

    if hp.alpha > 0 or hp.beta > 0 or hp.gamma > 0:
        D_blocks = [kernel.augmented @ wy for wy in state.Wy_blocks]
        D = np.hstack(D_blocks)
        if hp.alpha > 0:
            total += hp.alpha * float(np.sum(D * (labelgraph.laplacian @ D)))
        if hp.beta > 0:
            for Di, A in zip(D_blocks, A_blocks):
                total += hp.beta * float(np.linalg.norm(Di - A, "fro") ** 2)
        if hp.gamma > 0:
            total += hp.gamma * float(np.linalg.norm(D - fusion.data, "fro") ** 2)

    if hp.delta > 0:
        total += hp.delta * l21_norm(state.stacked_W())
    return total


def update_feature_weights(state: ModelState, ds: MultiViewDataset,
                           Y: np.ndarray, hp: Hyperparams) -> list[np.ndarray]:
    """Multiplicative step on each W_i.

    Ratio of A_i^T Y over A_i^T A_i W_i + 2 delta E_i W_i; the sparsity
    diagonal is recomputed from the current stacked W before the step.
    """
    e_diag = sparsity_diagonal(state.stacked_W())
    slices = _view_slices(ds)
    new_blocks = []
    for sl, x, c, W in zip(slices, ds.views, state.C_blocks, state.W_blocks):
        A = c[:, None] * x
        numer = A.T @ Y
        denom = A.T @ (A @ W) + 2.0 * hp.delta * e_diag[sl][:, None] * W + EPS
        new_blocks.append(W * numer / denom)
    return new_blocks


def update_confidence(state: ModelState, ds: MultiViewDataset, Y: np.ndarray,
                      kernel: LabelKernel, hp: Hyperparams) -> list[np.ndarray]:
    """Multiplicative step on each confidence vector C_i.

    Only the n diagonal entries of the n x n products in the ratio are ever
    formed (row-wise dot products), so the step is O(n d) in memory.
    """
    new_blocks = []
    for x, c, W, Wy in zip(ds.views, state.C_blocks, state.W_blocks,
                           state.Wy_blocks):
        M = x @ W                       # diag(C) X W without the C factor
        Di = kernel.augmented @ Wy
        numer = np.einsum("ij,ij->i", Y, M) + hp.beta * np.einsum("ij,ij->i", Di, x)
        denom = c * np.einsum("ij,ij->i", M, M) \
            + hp.beta * c * np.einsum("ij,ij->i", x, x) + EPS
        new_blocks.append(c * numer / denom)
    return new_blocks


def update_label_coefficients(state: ModelState, ds: MultiViewDataset,
                              fusion: FusionMatrix, kernel: LabelKernel,
                              labelgraph: GraphPair,
                              hp: Hyperparams) -> list[np.ndarray]:
    """Multiplicative step on each coefficient block Wy_i.

    The label graph enters split in two: its affinity pulls the ratio up,
    its degree diagonal pushes it down.  With alpha = beta = gamma = 0 every
    denominator degenerates to the stabilizer, so the blocks are returned
    unchanged instead.
    """
    if hp.alpha == 0 and hp.beta == 0 and hp.gamma == 0:
        return [wy.copy() for wy in state.Wy_blocks]
    Yx = kernel.augmented
    S = labelgraph.affinity
    deg = labelgraph.degrees
    new_blocks = []
    for i, (x, c, Wy) in enumerate(zip(ds.views, state.C_blocks,
                                       state.Wy_blocks)):
        Di = Yx @ Wy
        A = c[:, None] * x
        numer = hp.alpha * (Yx.T @ (S @ Di)) + hp.beta * (Yx.T @ A) \
            + hp.gamma * (Yx.T @ fusion.block(i))
        denom = hp.alpha * (Yx.T @ (deg[:, None] * Di)) \
            + (hp.beta + hp.gamma) * (Yx.T @ Di) + EPS
        new_blocks.append(Wy * numer / denom)
    return new_blocks


def _effective_hp(hp: Hyperparams) -> Hyperparams:
    if hp.ablation == "v3_no_reconstruction":
        return replace(hp, alpha=0.0, beta=0.0, gamma=0.0)
    return hp


def fit(ds: MultiViewDataset, hp: Hyperparams,
        iteration_callback=None) -> tuple[ModelState, ConvergenceTrace]:
    """Run the full alternating optimization to convergence.

    Pipeline: view weights (uniform under the view-weight ablation), fusion
    matrix, label kernel, label graph, seeded init, then per sweep the W, C
    and Wy updates in that order followed by one objective evaluation.
    Stops when the relative objective drop falls below hp.tol or after
    hp.max_iters sweeps.  ``iteration_callback(state, iteration)``, when
    given, runs after every sweep.
    """
    for name, x in zip(ds.view_names, ds.views):
        if x.min() < 0:
            raise ValueError(
                f"view '{name}' has negative entries; normalize_views first"
            )
    hp = _effective_hp(hp)

    if hp.ablation == "v2_uniform_view_weights":
        weights: ViewWeights = uniform_view_weights(ds.n_views)
    else:
        weights = compute_view_weights(ds, q=hp.q, sigma=hp.sigma)
    fusion = build_fusion(ds, weights)
    kernel = label_kernel(ds.labels)
    labelgraph = label_laplacian(ds.labels, q=hp.q, sigma=hp.sigma)

    state = init_state(ds, ds.n_labels, hp)
    objective_values = [evaluate_objective(ds, fusion, kernel, labelgraph,
                                           state, hp)]
    rel_changes: list[float] = []
    converged = False

    for it in range(1, hp.max_iters + 1):
        state.W_blocks = update_feature_weights(state, ds, ds.labels, hp)
        if hp.ablation != "v1_no_confidence":
            state.C_blocks = update_confidence(state, ds, ds.labels, kernel, hp)
        if hp.ablation != "v3_no_reconstruction":
            state.Wy_blocks = update_label_coefficients(state, ds, fusion,
                                                        kernel, labelgraph, hp)
        state.e_diag = sparsity_diagonal(state.stacked_W())
        state.iteration = it

        z = evaluate_objective(ds, fusion, kernel, labelgraph, state, hp)
        if not np.isfinite(z):
            raise RuntimeError(
                f"objective became non-finite at iteration {it}"
            )
        prev = objective_values[-1]
        rel = (prev - z) / prev if prev != 0 else 0.0
        objective_values.append(z)
        rel_changes.append(rel)

        if iteration_callback is not None:
            iteration_callback(state, it)

        if rel < hp.tol:
            converged = True
            break

    trace = ConvergenceTrace(objective_values=np.array(objective_values),
                             rel_changes=np.array(rel_changes),
                             converged=converged,
                             iterations_run=state.iteration)
    return state, trace


def save_trace_csv(trace: ConvergenceTrace, path) -> None:
    """Write ``iter,objective,rel_change`` rows; iteration 0 is the start."""
    with open(path, "w", newline="") as fh:
        fh.write("iter,objective,rel_change\n")
        for i, z in enumerate(trace.objective_values):
            rel = "" if i == 0 else repr(float(trace.rel_changes[i - 1]))
            fh.write(f"{i},{z!r},{rel}\n")


def save_confidence_csv(state: ModelState, view_names: list[str], path) -> None:
    """Per-sample confidence values, one column per view."""
    with open(path, "w", newline="") as fh:
        fh.write("sample_index," + ",".join(view_names) + "\n")
        n = len(state.C_blocks[0])
        for m in range(n):
            vals = ",".join(repr(float(c[m])) for c in state.C_blocks)
            fh.write(f"{m},{vals}\n")
