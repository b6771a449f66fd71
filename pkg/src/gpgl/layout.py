"""Grid layout of graphs by regularized stress minimization.

The continuous stage embeds a graph in the plane so that Euclidean
distances track graph hop distances (Kamada-Kawai stress), with a hinge
penalty that pushes every vertex pair at least ``alpha`` apart so that
rounding to integer cells keeps vertices distinct. The discrete stage
rounds the optimized coordinates to the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CoincidentVerticesError, NonFiniteLossError
from .graph import DistanceMatrix, Graph, connected_components, shortest_path_distances

__all__ = [
    "Layout",
    "GridLayout",
    "LayoutParams",
    "LayoutDiagnostics",
    "circular_init",
    "kk_loss",
    "separation_penalty",
    "gpgl_loss_and_grad",
    "rescale_layout",
    "minimize",
    "round_layout",
    "gpgl_layout",
    "layout_graph",
]

# Pairs closer than this are treated as coincident during optimization;
# candidate steps that create one are rejected by the line search.
_MIN_PAIR_DISTANCE = 1e-9

_ARMIJO_C = 1e-4
_MAX_BACKTRACKS = 30
# Displacement magnitude of the fixed fallback step taken when
# backtracking cannot find a decrease (grid-cell units).
_FALLBACK_DISPLACEMENT = 1e-6
# Stop after this many consecutive iterations without meaningful decrease
# (the iterate is pinned at a hinge kink and only dithering).
_STALL_LIMIT = 50

# Compaction cycling for the penalized stage: squeeze toward the centroid
# by this factor plus seeded noise, re-descend, keep strict improvements.
# Stops after _POLISH_PATIENCE consecutive non-improving rounds.
_POLISH_ROUNDS = 16
_POLISH_PATIENCE = 4
_POLISH_CONTRACT = 0.85
_POLISH_NOISE = 0.1


@dataclass(frozen=True, eq=False)
class Layout:
    """Continuous 2D vertex positions, one row per vertex."""

    coords: np.ndarray

    def __post_init__(self) -> None:
        coords = np.asarray(self.coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != 2 or coords.shape[0] < 1:
            raise ValueError(f"coords must be (n, 2) with n >= 1, got {coords.shape}")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coords must be finite")
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.coords.shape[0]


@dataclass(frozen=True, eq=False)
class GridLayout:
    """Integer cell per vertex, normalized so each axis starts at 0."""

    cells: np.ndarray

    def __post_init__(self) -> None:
        cells = np.asarray(self.cells)
        if cells.ndim != 2 or cells.shape[1] != 2 or cells.shape[0] < 1:
            raise ValueError(f"cells must be (n, 2) with n >= 1, got {cells.shape}")
        if not np.issubdtype(cells.dtype, np.integer):
            raise ValueError("cells must be integers")
        cells = cells.astype(np.int64)
        if np.any(cells.min(axis=0) != 0):
            raise ValueError("cells must be origin-normalized (min 0 per axis)")
        object.__setattr__(self, "cells", cells)

    @property
    def n(self) -> int:
        return self.cells.shape[0]

    def extent(self) -> tuple[int, int]:
        """Cells spanned along each axis: (rows, cols)."""
        mx = self.cells.max(axis=0)
        return int(mx[0]) + 1, int(mx[1]) + 1

    def occupied_cells(self) -> set[tuple[int, int]]:
        return {(int(r), int(c)) for r, c in self.cells}


@dataclass(frozen=True)
class LayoutParams:
    """Knobs of the layout optimizer.

    Attributes
    ----------
    alpha : float
        Separation threshold in grid-cell units; pairs closer than this
        are penalized.
    lam : float
        Weight of the separation penalty.
    gamma : float
        Floor on the distance used to derive the optional rescale factor.
    enable_rescale : bool
        Apply the linear zoom between the stress-only stage and the
        penalized stage. Off by default; the stress-only solutions are
        usually a good enough starting point.
    max_iters : int
        Iteration cap per optimization stage.
    grad_tol : float
        Stop once the gradient max-norm falls below this.
    seed : int
        Drives the random vertex order of the circular initialization.
    """

    alpha: float = 1.25
    lam: float = 1000.0
    gamma: float = 0.1
    enable_rescale: bool = False
    max_iters: int = 2000
    grad_tol: float = 1e-4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be > 0")


@dataclass(frozen=True)
class LayoutDiagnostics:
    """Per-layout record of how the optimization went."""

    kk_loss: float
    separation_penalty: float
    kk_iterations: int
    gpgl_iterations: int
    lost_vertices: int
    converged: bool
    components: int = 1

    @property
    def total_loss(self) -> float:
        return self.kk_loss + self.separation_penalty

    def to_dict(self) -> dict:
        return {
            "kk_loss": self.kk_loss,
            "separation_penalty": self.separation_penalty,
            "total_loss": self.total_loss,
            "kk_iterations": self.kk_iterations,
            "gpgl_iterations": self.gpgl_iterations,
            "lost_vertices": self.lost_vertices,
            "converged": self.converged,
            "components": self.components,
        }


def _pairwise_distances(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def _check_no_coincident(dist: np.ndarray) -> None:
    n = dist.shape[0]
    off = ~np.eye(n, dtype=bool)
    if np.any(dist[off] == 0.0):
        i, j = np.argwhere((dist == 0.0) & off)[0]
        raise CoincidentVerticesError(f"vertices {i} and {j} coincide")


def circular_init(n: int, seed: int) -> Layout:
    """Evenly spaced points on a circle, vertex order shuffled by seed.

    The circle radius is ``n / (2 pi)`` so that consecutive points are one
    unit of arc apart. Which vertex lands on which circle position is a
    seed-determined permutation; the point multiset itself is the same for
    every seed. A single vertex is placed at the origin.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return Layout(np.zeros((1, 2)))
    radius = n / (2.0 * math.pi)
    angles = 2.0 * math.pi * np.arange(n) / n
    points = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    perm = np.random.default_rng(seed).permutation(n)
    return Layout(points[perm])


def kk_loss(layout: Layout, s: DistanceMatrix) -> float:
    """Stress of a layout against graph distances.

    Sums ``0.5 * (d_ij / s_ij - 1)^2`` over ordered vertex pairs, so each
    unordered pair contributes twice. Zero exactly when every Euclidean
    distance matches its hop distance.
    """
    coords = layout.coords
    if layout.n != s.n:
        raise ValueError(f"layout has {layout.n} vertices, distances have {s.n}")
    if layout.n < 2:
        raise ValueError("need at least 2 vertices")
    dist = _pairwise_distances(coords)
    off = ~np.eye(layout.n, dtype=bool)
    ratio = dist[off] / s.d[off]
    return float(0.5 * np.sum((ratio - 1.0) ** 2))


def separation_penalty(layout: Layout, alpha: float, lam: float) -> float:
    """Hinge penalty on vertex pairs closer than ``alpha``.

    Sums ``lam * max(0, alpha / d_ij - 1)`` over ordered pairs. Zero if
    and only if every pairwise distance is at least ``alpha``; grows
    without bound as any pair approaches coincidence.
    """
    if layout.n < 2:
        raise ValueError("need at least 2 vertices")
    dist = _pairwise_distances(layout.coords)
    _check_no_coincident(dist)
    off = ~np.eye(layout.n, dtype=bool)
    hinge = np.maximum(0.0, alpha / dist[off] - 1.0)
    return float(lam * hinge.sum())


def _values(
    coords: np.ndarray, s: np.ndarray, alpha: float, lam: float
) -> tuple[float, float, float]:
    """(total, stress, penalty) at ``coords``; raises on coincident pairs."""
    dist = _pairwise_distances(coords)
    _check_no_coincident(dist)
    n = coords.shape[0]
    off = ~np.eye(n, dtype=bool)
    ratio = dist[off] / s[off]
    kk = float(0.5 * np.sum((ratio - 1.0) ** 2))
    sep = float(lam * np.maximum(0.0, alpha / dist[off] - 1.0).sum())
    return kk + sep, kk, sep


def _loss_and_grad(
    coords: np.ndarray, s: np.ndarray, alpha: float, lam: float
) -> tuple[float, np.ndarray, float, float]:
    """Loss value and its exact gradient with respect to every coordinate.

    Ordered-pair summation doubles each unordered pair, so the gradient of
    the pair (i, j) term lands on both endpoints with factor 2. The hinge
    uses the one-sided zero derivative at ``d_ij >= alpha``.
    """
    n = coords.shape[0]
    dist = _pairwise_distances(coords)
    _check_no_coincident(dist)
    off = ~np.eye(n, dtype=bool)

    ratio = np.zeros_like(dist)
    ratio[off] = dist[off] / s[off]
    kk = float(0.5 * np.sum((ratio[off] - 1.0) ** 2))

    coef = np.zeros_like(dist)
    coef[off] = 2.0 * (ratio[off] - 1.0) / (s[off] * dist[off])

    sep = 0.0
    if lam > 0.0:
        active = off & (dist < alpha)
        sep = float(lam * np.maximum(0.0, alpha / dist[off] - 1.0).sum())
        coef[active] -= 2.0 * lam * alpha / dist[active] ** 3

    grad = coef.sum(axis=1)[:, None] * coords - coef @ coords
    return kk + sep, grad, kk, sep


@dataclass
class _StageStats:
    iterations: int = 0
    converged: bool = False
    loss: float = 0.0
    kk: float = 0.0
    sep: float = 0.0


def _descend(
    coords0: np.ndarray, s: np.ndarray, alpha: float, lam: float, p: LayoutParams
) -> tuple[np.ndarray, _StageStats]:
    """Full-gradient descent with Armijo backtracking.

    Returns the best iterate seen, so the reported loss never exceeds the
    starting loss even when fallback steps wander uphill.
    """
    x = coords0.copy()
    f, grad, kk, sep = _loss_and_grad(x, s, alpha, lam)
    if not (np.isfinite(f) and np.all(np.isfinite(grad))):
        raise NonFiniteLossError(f"non-finite loss at initialization: {f}")

    best_x, best = x.copy(), _StageStats(loss=f, kk=kk, sep=sep)
    step = 1.0
    stalled = 0
    stats = _StageStats(loss=f, kk=kk, sep=sep)

    for _ in range(p.max_iters):
        gmax = float(np.abs(grad).max())
        if gmax <= p.grad_tol:
            stats.converged = True
            break
        gsq = float((grad * grad).sum())

        t = step
        accepted = False
        cand = x
        f_c, kk_c, sep_c = f, kk, sep
        for _ in range(_MAX_BACKTRACKS):
            cand = x - t * grad
            try:
                f_c, kk_c, sep_c = _values(cand, s, alpha, lam)
            except CoincidentVerticesError:
                t *= 0.5
                continue
            if np.isfinite(f_c) and f_c <= f - _ARMIJO_C * t * gsq:
                accepted = True
                break
            t *= 0.5

        if accepted:
            step = t * 2.0
        else:
            # Hinge kinks can defeat backtracking; inch along the descent
            # direction with a fixed tiny displacement instead of halting.
            t = _FALLBACK_DISPLACEMENT / gmax
            cand = x - t * grad
            try:
                f_c, kk_c, sep_c = _values(cand, s, alpha, lam)
            except CoincidentVerticesError:
                break
            step = max(t * 2.0, _FALLBACK_DISPLACEMENT)

        if f - f_c <= 1e-12 * max(1.0, abs(f)):
            stalled += 1
        else:
            stalled = 0

        x, f, kk, sep = cand, f_c, kk_c, sep_c
        stats.iterations += 1
        if not np.isfinite(f):
            raise NonFiniteLossError(f"loss diverged to {f}")
        if f < best.loss:
            best_x = x.copy()
            best.loss, best.kk, best.sep = f, kk, sep
        if stalled >= _STALL_LIMIT:
            break
        f, grad, kk, sep = _loss_and_grad(x, s, alpha, lam)

    stats.loss, stats.kk, stats.sep = best.loss, best.kk, best.sep
    return best_x, stats


def _descend_polished(
    coords0: np.ndarray, s: np.ndarray, alpha: float, lam: float, p: LayoutParams
) -> tuple[np.ndarray, _StageStats]:
    """Descend, then compaction cycling: contract the best layout toward
    its centroid, add seeded noise, re-descend, keep strict improvements.

    Plain descent jams the penalized objective in sprawling local minima
    (rings and strings for dense graphs); squeezing and relaxing lets the
    configuration recrystallize into the compact packings the stress term
    favors. Skipped for the pure-stress stage (lam = 0), where contraction
    can only move the layout off its natural scale.
    """
    x_best, stats = _descend(coords0, s, alpha, lam, p)
    if lam <= 0.0 or coords0.shape[0] < 3:
        return x_best, stats
    rng = np.random.default_rng((p.seed, 0x9E37))
    stale = 0
    for _ in range(_POLISH_ROUNDS):
        center = x_best.mean(axis=0)
        proposal = (
            center
            + (x_best - center) * _POLISH_CONTRACT
            + rng.normal(0.0, _POLISH_NOISE, x_best.shape)
        )
        try:
            x_round, round_stats = _descend(proposal, s, alpha, lam, p)
        except (CoincidentVerticesError, NonFiniteLossError):
            stale += 1
            if stale >= _POLISH_PATIENCE:
                break
            continue
        stats.iterations += round_stats.iterations
        if round_stats.loss < stats.loss - 1e-9:
            x_best = x_round
            stats.loss = round_stats.loss
            stats.kk = round_stats.kk
            stats.sep = round_stats.sep
            stats.converged = round_stats.converged
            stale = 0
        else:
            stale += 1
            if stale >= _POLISH_PATIENCE:
                break
    return x_best, stats


def gpgl_loss_and_grad(
    layout: Layout, s: DistanceMatrix, p: LayoutParams
) -> tuple[float, np.ndarray]:
    """Combined stress plus separation penalty and its analytic gradient.

    The gradient is the exact derivative of the value actually computed,
    including the ``alpha`` factor from differentiating the hinge and the
    ordered-pair doubling; finite differences agree to first order
    everywhere off the hinge kinks.
    """
    if layout.n != s.n:
        raise ValueError(f"layout has {layout.n} vertices, distances have {s.n}")
    if layout.n < 2:
        raise ValueError("need at least 2 vertices")
    f, grad, _, _ = _loss_and_grad(layout.coords, s.d, p.alpha, p.lam)
    return f, grad


def rescale_layout(layout: Layout, p: LayoutParams) -> Layout:
    """Zoom a layout linearly so the closest pair is near ``alpha`` apart.

    The scale factor is ``max(1, alpha / beta)`` with ``beta`` the minimum
    pairwise distance floored at ``gamma``; a layout whose pairs are
    already separated is returned unchanged. Distances are never shrunk.
    """
    if layout.n < 2:
        raise ValueError("need at least 2 vertices")
    dist = _pairwise_distances(layout.coords)
    off = ~np.eye(layout.n, dtype=bool)
    beta = max(p.gamma, float(dist[off].min()))
    if beta == 0.0:
        return layout
    scale = max(1.0, p.alpha / beta)
    return Layout(layout.coords * scale)


def minimize(layout0: Layout, s: DistanceMatrix, p: LayoutParams) -> Layout:
    """Minimize the combined loss starting from ``layout0``.

    Descends the full gradient with Armijo backtracking until the gradient
    max-norm drops below ``p.grad_tol``, the iteration cap is hit, or
    progress stalls at a hinge kink; when the separation penalty is active
    the result is refined by compaction cycling. The returned layout never
    has higher loss than the input. Deterministic for fixed inputs.
    """
    if layout0.n != s.n:
        raise ValueError(f"layout has {layout0.n} vertices, distances have {s.n}")
    coords, _ = _descend_polished(layout0.coords, s.d, p.alpha, p.lam, p)
    return Layout(coords)


def round_layout(layout: Layout) -> GridLayout:
    """Round coordinates to integer cells and shift the origin to zero.

    Ties at exactly .5 round away from zero. Distinct vertices may land on
    the same cell; collisions are preserved here and merged downstream.
    """
    coords = layout.coords
    rounded = np.copysign(np.floor(np.abs(coords) + 0.5), coords).astype(np.int64)
    rounded -= rounded.min(axis=0)
    return GridLayout(rounded)


# Fractional offsets per axis tried when snapping the frame to the grid.
_PHASE_STEPS = 8


def _round_best_phase(coords: np.ndarray) -> GridLayout:
    """Round at the best grid phase.

    The loss is translation invariant, so which fractional offset the
    integer grid sits at is a free choice; it decides how many vertices
    collide per cell and how tight the frame is. Scan an 8x8 grid of
    offsets and keep the first with (fewest collisions, smallest bounding
    box). Deterministic via the fixed scan order.
    """
    base = coords - coords.min(axis=0)
    best: GridLayout | None = None
    best_key: tuple[int, int] | None = None
    for ty in np.arange(_PHASE_STEPS) / _PHASE_STEPS:
        for tx in np.arange(_PHASE_STEPS) / _PHASE_STEPS:
            grid = round_layout(Layout(base + np.array([tx, ty])))
            rows, cols = grid.extent()
            key = (coords.shape[0] - len(grid.occupied_cells()), rows * cols)
            if best_key is None or key < best_key:
                best, best_key = grid, key
    return best


def gpgl_layout(g: Graph, p: LayoutParams) -> tuple[GridLayout, LayoutDiagnostics]:
    """Full layout pipeline for a connected graph.

    Runs hop-distance computation, shuffled circular initialization, a
    stress-only descent, the optional rescale, the penalized descent, and
    rounding at the best grid phase.

    Raises
    ------
    DisconnectedGraphError
        If the graph has several components; see ``layout_graph``.
    """
    n = g.num_vertices
    if n == 1:
        diag = LayoutDiagnostics(0.0, 0.0, 0, 0, 0, True)
        return GridLayout(np.zeros((1, 2), dtype=np.int64)), diag

    s = shortest_path_distances(g)
    init = circular_init(n, p.seed)
    kk_coords, kk_stats = _descend(init.coords, s.d, p.alpha, 0.0, p)
    if p.enable_rescale:
        kk_coords = rescale_layout(Layout(kk_coords), p).coords
    coords, gp_stats = _descend_polished(kk_coords, s.d, p.alpha, p.lam, p)

    grid = _round_best_phase(coords)
    lost = n - len(grid.occupied_cells())
    diag = LayoutDiagnostics(
        kk_loss=gp_stats.kk,
        separation_penalty=gp_stats.sep,
        kk_iterations=kk_stats.iterations,
        gpgl_iterations=gp_stats.iterations,
        lost_vertices=lost,
        converged=gp_stats.converged,
    )
    return grid, diag


def layout_graph(g: Graph, p: LayoutParams) -> tuple[GridLayout, LayoutDiagnostics]:
    """Grid-lay any graph, connected or not.

    A connected graph goes straight through ``gpgl_layout``. A graph with
    several components lays each one out independently (same parameters
    and seed) and packs the component layouts left to right, separated by
    one empty column; losses and iteration counts are summed.
    """
    comps = connected_components(g)
    if len(comps) == 1:
        return gpgl_layout(g, p)

    cells = np.zeros((g.num_vertices, 2), dtype=np.int64)
    col_offset = 0
    kk_total = sep_total = 0.0
    kk_iters = gp_iters = lost = 0
    converged = True
    for comp in comps:
        grid, diag = gpgl_layout(comp.graph, p)
        placed = grid.cells.copy()
        placed[:, 1] += col_offset
        cells[comp.original_vertices] = placed
        col_offset += grid.extent()[1] + 1
        kk_total += diag.kk_loss
        sep_total += diag.separation_penalty
        kk_iters += diag.kk_iterations
        gp_iters += diag.gpgl_iterations
        lost += diag.lost_vertices
        converged = converged and diag.converged

    diag = LayoutDiagnostics(
        kk_loss=kk_total,
        separation_penalty=sep_total,
        kk_iterations=kk_iters,
        gpgl_iterations=gp_iters,
        lost_vertices=lost,
        converged=converged,
        components=len(comps),
    )
    return GridLayout(cells), diag
