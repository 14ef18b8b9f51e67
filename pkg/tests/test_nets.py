"""Scale ladder, separated nets, and greedy coloring.

Frozen expectations are hand-derived: nets by walking the greedy admission
rule step by step, colorings by first-fit over the conflict lists.
"""
import numpy as np
import pytest

from assouad.errors import BadTau, TooFewPoints
from assouad.instances import line_instance, random_instance
from assouad.metric import extremes, validate_metric
from assouad.nets import (
    build_ladder,
    build_levels,
    greedy_color,
    level_dump,
    maximal_net,
    neighbor_count,
)


class TestLadder:
    def test_pair_at_unit_distance(self, pair_space):
        ladder = build_ladder(pair_space, 0.1)
        # diam = d_min = 1: tau**0 = 1 >= 1 picks k_coarse = 0, and
        # 4 * tau**2 = 0.04 <= 1 picks k_fine = 1.
        assert ladder.k_coarse == 0
        assert ladder.k_fine == 1
        assert ladder.radii[0] == 1.0
        assert ladder.radii[1] == 0.1 * 0.1

    def test_definition_of_endpoints(self):
        space = line_instance(20)
        diam, d_min = extremes(space)
        for tau in (0.1, 0.05, 0.02):
            ladder = build_ladder(space, tau)
            radii = ladder.radii
            assert radii[ladder.k_coarse] >= diam
            assert radii[ladder.k_coarse] * tau * tau < diam
            assert 4.0 * radii[ladder.k_fine] <= d_min
            assert 4.0 * radii[ladder.k_fine] / (tau * tau) > d_min

    def test_consecutive_radii_exact(self):
        space = random_instance(30, seed=2)
        ladder = build_ladder(space, 0.05)
        step = 0.05 * 0.05
        for k in range(ladder.k_coarse, ladder.k_fine):
            assert ladder.radii[k + 1] == ladder.radii[k] * step

    def test_scales_cover_radii(self):
        ladder = build_ladder(line_instance(10), 0.1)
        assert list(ladder.scales()) == sorted(ladder.radii)

    def test_rejects_bad_tau(self, pair_space):
        for tau in (0.0, -0.1, 0.5, 0.7):
            with pytest.raises(BadTau):
                build_ladder(pair_space, tau)

    def test_needs_two_points(self):
        with pytest.raises(TooFewPoints):
            build_ladder(line_instance(1), 0.1)


class TestMaximalNet:
    def test_line5_radius2(self):
        # greedy from index 0: admit 0; skip 1 (d=1 < 2); admit 2; skip 3; admit 4
        assert maximal_net(line_instance(5), 2.0) == (0, 2, 4)

    def test_radius_below_min_distance_keeps_all(self):
        assert maximal_net(line_instance(5), 1.0) == (0, 1, 2, 3, 4)

    def test_huge_radius_keeps_first(self):
        assert maximal_net(line_instance(5), 100.0) == (0,)

    @pytest.mark.parametrize("radius", [0.3, 0.9, 2.7])
    def test_separation_and_covering(self, radius):
        space = random_instance(25, seed=4)
        net = maximal_net(space, radius)
        members = np.array(net)
        gaps = space.dist[np.ix_(members, members)]
        off = gaps[np.triu_indices(len(members), k=1)]
        if off.size:
            assert off.min() >= radius
        assert space.dist[:, members].min(axis=1).max() < radius


class TestColoring:
    def test_line5_small_radius(self):
        space = line_instance(5)
        level = greedy_color(space, maximal_net(space, 0.15), 0.15)
        # conflicts within 1.5: adjacent integers only; colors alternate
        assert [level.color[j] for j in level.net] == [1, 2, 1, 2, 1]

    def test_line5_radius_quarter(self):
        space = line_instance(5)
        level = greedy_color(space, maximal_net(space, 0.25), 0.25)
        # conflicts within 2.5 reach two steps; first-fit cycles three colors
        assert [level.color[j] for j in level.net] == [1, 2, 3, 1, 2]

    def test_classes_partition_net_in_order(self):
        space = random_instance(30, seed=6)
        level = greedy_color(space, maximal_net(space, 0.2), 0.2)
        rebuilt = sorted(j for members in level.classes.values() for j in members)
        assert rebuilt == sorted(level.net)
        for members in level.classes.values():
            assert list(members) == sorted(members, key=level.net.index)

    def test_same_color_separation(self):
        space = random_instance(40, seed=7)
        radius = 0.05
        level = greedy_color(space, maximal_net(space, radius), radius)
        for members in level.classes.values():
            pts = np.array(members)
            gaps = space.dist[np.ix_(pts, pts)][np.triu_indices(len(pts), k=1)]
            if gaps.size:
                assert gaps.min() > 10.0 * radius

    def test_color_count_bounded_by_neighbors(self):
        space = random_instance(40, seed=8)
        radius = 0.05
        net = maximal_net(space, radius)
        level = greedy_color(space, net, radius)
        max_neighbors, _ = neighbor_count(space, net, radius)
        assert max(level.color.values()) <= max_neighbors


class TestLevels:
    def test_levels_match_direct_calls(self):
        space = line_instance(10)
        ladder = build_ladder(space, 0.1)
        levels = build_levels(space, ladder)
        assert [level.k for level in levels] == list(ladder.scales())
        for level in levels:
            assert level.r == ladder.radii[level.k]
            assert level.net == maximal_net(space, level.r)
            direct = greedy_color(space, level.net, level.r, k=level.k)
            assert level.color == direct.color
            assert level.classes == direct.classes

    def test_level_dump_shape(self):
        space = line_instance(5)
        levels = build_levels(space, build_ladder(space, 0.1))
        dump = level_dump(levels)
        assert [entry["k"] for entry in dump] == [level.k for level in levels]
        for entry, level in zip(dump, levels):
            assert entry["r"] == level.r
            assert entry["net"] == list(level.net)
            assert entry["color"] == {str(j): c for j, c in level.color.items()}
