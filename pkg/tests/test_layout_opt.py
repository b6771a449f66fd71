"""Tests for the layout optimizer: init, rescale, minimize, rounding, pipeline."""

import math

import numpy as np
import pytest

from conftest import complete_graph, cycle_graph, path_graph, random_connected_graph
from gpgl.errors import DisconnectedGraphError
from gpgl.graph import Graph, shortest_path_distances
from gpgl.layout import (
    GridLayout,
    Layout,
    LayoutParams,
    circular_init,
    gpgl_layout,
    gpgl_loss_and_grad,
    layout_graph,
    minimize,
    rescale_layout,
    round_layout,
)


class TestCircularInit:
    def test_single_vertex_at_origin(self):
        lay = circular_init(1, 0)
        assert lay.coords.shape == (1, 2)
        assert np.all(lay.coords == 0.0)

    def test_radius_and_unit_arc_spacing(self):
        for n in (2, 5, 12, 40):
            coords = circular_init(n, 0).coords
            radii = np.linalg.norm(coords, axis=1)
            assert radii == pytest.approx(n / (2.0 * math.pi), abs=1e-12)
            # Arc between consecutive circle positions is radius * 2pi/n = 1.
            assert radii[0] * 2.0 * math.pi / n == pytest.approx(1.0, abs=1e-12)

    def test_four_points_are_quarter_turns(self):
        r = 4.0 / (2.0 * math.pi)
        expected = {(r, 0.0), (0.0, r), (-r, 0.0), (0.0, -r)}
        coords = circular_init(4, 3).coords
        for row in coords:
            assert min(math.hypot(row[0] - ex, row[1] - ey) for ex, ey in expected) < 1e-12

    def test_point_multiset_is_seed_invariant(self):
        base = np.sort(circular_init(9, 0).coords, axis=0)
        for seed in (1, 2, 3, 99):
            other = np.sort(circular_init(9, seed).coords, axis=0)
            assert np.allclose(base, other, atol=1e-12)

    def test_seed_permutes_vertex_order(self):
        a = circular_init(10, 0).coords
        b = circular_init(10, 1).coords
        assert not np.allclose(a, b)

    def test_deterministic(self):
        a = circular_init(17, 5).coords
        b = circular_init(17, 5).coords
        assert np.array_equal(a, b)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            circular_init(0, 0)


class TestRescaleLayout:
    def test_identity_when_already_separated(self):
        lay = Layout(np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]))
        out = rescale_layout(lay, LayoutParams())
        assert np.array_equal(out.coords, lay.coords)

    def test_scale_factor_two_point_five(self):
        # min distance 0.5 with alpha 1.25 -> scale alpha/beta = 2.5.
        lay = Layout(np.array([[0.0, 0.0], [0.5, 0.0]]))
        out = rescale_layout(lay, LayoutParams(alpha=1.25, gamma=0.1))
        assert np.allclose(out.coords, np.array([[0.0, 0.0], [1.25, 0.0]]), atol=1e-12)

    def test_gamma_floor_caps_scale(self):
        # min distance 0.01 is floored to gamma 0.1 -> scale 12.5, not 125.
        lay = Layout(np.array([[0.0, 0.0], [0.01, 0.0]]))
        out = rescale_layout(lay, LayoutParams(alpha=1.25, gamma=0.1))
        assert np.allclose(out.coords, np.array([[0.0, 0.0], [0.125, 0.0]]), atol=1e-12)

    def test_never_shrinks_and_scales_uniformly(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            n = int(rng.integers(2, 8))
            lay = Layout(rng.uniform(-2.0, 2.0, size=(n, 2)))
            out = rescale_layout(lay, LayoutParams())
            before = np.linalg.norm(lay.coords[:, None] - lay.coords[None, :], axis=-1)
            after = np.linalg.norm(out.coords[:, None] - out.coords[None, :], axis=-1)
            off = ~np.eye(n, dtype=bool)
            scale = after[off] / before[off]
            assert scale.min() >= 1.0 - 1e-12
            assert scale.max() - scale.min() < 1e-9
            assert after[off].min() >= before[off].min() - 1e-12


class TestRoundLayout:
    def test_rounds_to_nearest(self):
        grid = round_layout(Layout(np.array([[0.4, 0.6], [0.0, 0.0]])))
        assert np.array_equal(grid.cells, np.array([[0, 1], [0, 0]]))

    def test_ties_round_away_from_zero(self):
        # (-1.5, 2.5) -> (-2, 3); with the origin anchor the shift is (+2, 0).
        grid = round_layout(Layout(np.array([[-1.5, 2.5], [0.0, 0.0]])))
        assert np.array_equal(grid.cells, np.array([[0, 3], [2, 0]]))

    def test_positive_and_negative_halves(self):
        grid = round_layout(Layout(np.array([[0.5, 1.5], [-0.5, -1.5]])))
        assert np.array_equal(grid.cells, np.array([[2, 4], [0, 0]]))

    def test_collision_preserved(self):
        grid = round_layout(Layout(np.array([[0.40, 0.40], [0.45, 0.45]])))
        assert np.array_equal(grid.cells[0], grid.cells[1])
        assert len(grid.occupied_cells()) == 1

    def test_origin_normalized(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            coords = rng.uniform(-10.0, 10.0, size=(int(rng.integers(1, 9)), 2))
            grid = round_layout(Layout(coords))
            assert np.array_equal(grid.cells.min(axis=0), [0, 0])


class TestMinimize:
    def test_fixed_point_stays_put(self):
        # Two vertices at distance alpha: stress pulls inward, hinge pushes
        # outward harder, so this is the minimizer and must not move.
        p = LayoutParams()
        lay = Layout(np.array([[0.0, 0.0], [p.alpha, 0.0]]))
        s = shortest_path_distances(path_graph(2))
        before, _ = gpgl_loss_and_grad(lay, s, p)
        out = minimize(lay, s, p)
        after, _ = gpgl_loss_and_grad(out, s, p)
        assert abs(after - before) <= 1e-8

    def test_path_three_consecutive_spacing(self):
        # 1D oracle: spacing t has stress 2*(t-1)^2 + end-pair term while
        # the hinge blocks t < alpha, so consecutive gaps settle at 1.25.
        g = path_graph(3)
        s = shortest_path_distances(g)
        p = LayoutParams()
        for seed in range(3):
            c = minimize(circular_init(3, seed), s, p).coords
            d01 = np.linalg.norm(c[1] - c[0])
            d12 = np.linalg.norm(c[2] - c[1])
            d02 = np.linalg.norm(c[2] - c[0])
            assert 1.0 <= d01 <= 1.5
            assert 1.0 <= d12 <= 1.5
            # The end pair stretches toward its hop distance 2.
            assert d02 > max(d01, d12)

    def test_k32_compact_separated_cloud(self):
        g = complete_graph(32)
        s = shortest_path_distances(g)
        c = minimize(circular_init(32, 0), s, LayoutParams()).coords
        dist = np.linalg.norm(c[:, None] - c[None, :], axis=-1)
        np.fill_diagonal(dist, np.inf)
        assert dist.min() >= 1.0
        radius = np.linalg.norm(c - c.mean(axis=0), axis=1).max()
        assert radius <= 5.0

    def test_loss_never_increases(self):
        rng = np.random.default_rng(31)
        p = LayoutParams(max_iters=60)
        for trial in range(8):
            g = random_connected_graph(int(rng.integers(3, 9)), rng)
            s = shortest_path_distances(g)
            init = circular_init(g.num_vertices, trial)
            before, _ = gpgl_loss_and_grad(init, s, p)
            out = minimize(init, s, p)
            after, _ = gpgl_loss_and_grad(out, s, p)
            assert after <= before + 1e-9

    def test_deterministic(self):
        g = cycle_graph(7)
        s = shortest_path_distances(g)
        p = LayoutParams(seed=4)
        a = minimize(circular_init(7, 4), s, p).coords
        b = minimize(circular_init(7, 4), s, p).coords
        assert np.array_equal(a, b)

    def test_size_mismatch_rejected(self):
        s = shortest_path_distances(path_graph(4))
        with pytest.raises(ValueError):
            minimize(circular_init(3, 0), s, LayoutParams())


class TestGpglLayout:
    def test_single_vertex(self):
        grid, diag = gpgl_layout(Graph(1, ()), LayoutParams())
        assert np.array_equal(grid.cells, np.array([[0, 0]]))
        assert diag.lost_vertices == 0
        assert diag.converged
        assert diag.total_loss == 0.0

    def test_edge_graph_adjacent_cells(self):
        grid, diag = gpgl_layout(path_graph(2), LayoutParams())
        assert len(grid.occupied_cells()) == 2
        dr, dc = np.abs(grid.cells[0] - grid.cells[1])
        assert max(dr, dc) == 1
        assert diag.lost_vertices == 0

    def test_path_graph_no_loss(self):
        grid, diag = gpgl_layout(path_graph(4), LayoutParams())
        assert len(grid.occupied_cells()) == 4
        assert diag.lost_vertices == 0
        assert diag.total_loss == pytest.approx(diag.kk_loss + diag.separation_penalty)

    def test_complete_graph_disc_invariant(self):
        # K_n should land on n distinct cells inside a disc of radius
        # ceil(sqrt(n/pi)) + 1 around the centroid, for every seed.
        for n in (10, 20):
            g = complete_graph(n)
            bound = math.ceil(math.sqrt(n / math.pi)) + 1
            for seed in range(5):
                grid, _ = gpgl_layout(g, LayoutParams(seed=seed))
                assert len(grid.occupied_cells()) == n
                cells = grid.cells.astype(float)
                radius = np.linalg.norm(cells - cells.mean(axis=0), axis=1).max()
                assert radius <= bound, f"K{n} seed {seed}: radius {radius:.3f}"

    def test_rejects_disconnected(self):
        g = Graph.from_edges(4, [(0, 1), (2, 3)])
        with pytest.raises(DisconnectedGraphError):
            gpgl_layout(g, LayoutParams())

    def test_deterministic(self):
        g = cycle_graph(6)
        a, _ = gpgl_layout(g, LayoutParams(seed=2))
        b, _ = gpgl_layout(g, LayoutParams(seed=2))
        assert np.array_equal(a.cells, b.cells)


class TestLayoutGraph:
    def test_connected_matches_gpgl_layout(self):
        g = cycle_graph(5)
        a, _ = layout_graph(g, LayoutParams(seed=1))
        b, _ = gpgl_layout(g, LayoutParams(seed=1))
        assert np.array_equal(a.cells, b.cells)

    def test_components_packed_with_gap_column(self):
        # Two triangles: the second component starts one empty column
        # after the first component's bounding box.
        g = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
        grid, diag = layout_graph(g, LayoutParams())
        assert diag.components == 2
        assert len(grid.occupied_cells()) == 6
        first_cols = grid.cells[:3, 1]
        second_cols = grid.cells[3:, 1]
        gap = int(first_cols.max()) + 1
        assert second_cols.min() == gap + 1
        assert gap not in set(grid.cells[:, 1].tolist())

    def test_isolated_vertices(self):
        g = Graph.from_edges(3, [(0, 1)])
        grid, diag = layout_graph(g, LayoutParams())
        assert diag.components == 2
        assert len(grid.occupied_cells()) == 3

    def test_losses_sum_over_components(self):
        g = Graph.from_edges(6, [(0, 1), (1, 2), (3, 4), (4, 5)])
        _, whole = layout_graph(g, LayoutParams())
        part = Graph.from_edges(3, [(0, 1), (1, 2)])
        _, single = gpgl_layout(part, LayoutParams())
        assert whole.kk_loss == pytest.approx(2 * single.kk_loss, rel=1e-12)
        assert whole.separation_penalty == pytest.approx(
            2 * single.separation_penalty, rel=1e-12
        )


class TestGridLayoutType:
    def test_extent(self):
        grid = GridLayout(np.array([[0, 0], [2, 5]]))
        assert grid.extent() == (3, 6)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            GridLayout(np.array([[1, 1], [2, 2]]))

    def test_rejects_floats(self):
        with pytest.raises(ValueError):
            GridLayout(np.array([[0.0, 0.0]]))
