import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from docosim.geometry import (Ball, Box, ProductSet, project, project_block,
                              project_dual)


def unit_box(d):
    return Box(np.zeros(d), np.ones(d))


class TestProject:
    def test_box_clamps(self):
        s = unit_box(2)
        assert np.array_equal(project(s, [2.0, -1.0]), [1.0, 0.0])

    def test_ball_radial_rescale(self):
        s = Ball(np.zeros(2), 1.0)
        np.testing.assert_allclose(project(s, [3.0, 4.0]), [0.6, 0.8], rtol=0, atol=1e-15)

    def test_interior_point_fixed(self):
        s = Box(np.zeros(1), np.ones(1))
        assert project(s, [0.4])[0] == 0.4

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            project(unit_box(2), [1.0, 2.0, 3.0])

    def test_bad_box(self):
        with pytest.raises(ValueError):
            Box([1.0], [0.0])


class TestProjectBlock:
    def test_clamps_second_block(self):
        s = ProductSet([unit_box(1), unit_box(1)])
        assert project_block(s, 1, [0.5, 1.7])[0] == 1.0

    def test_interior_block(self):
        s = ProductSet([unit_box(2)])
        np.testing.assert_array_equal(project_block(s, 0, [0.2, 0.3]), [0.2, 0.3])

    def test_ball_block(self):
        s = ProductSet([Ball(np.zeros(2), 1.0), Box([0.0], [2.0])])
        np.testing.assert_allclose(project_block(s, 0, [3.0, 4.0, 5.0]), [0.6, 0.8],
                                   rtol=0, atol=1e-15)

    def test_index_out_of_range(self):
        s = ProductSet([unit_box(1)])
        with pytest.raises(IndexError):
            project_block(s, 1, [0.5])


class TestProjectDual:
    def test_clamps(self):
        np.testing.assert_array_equal(project_dual(5.0, [-1.0, 2.0, 7.0]), [0.0, 2.0, 5.0])

    def test_fixed_point(self):
        np.testing.assert_array_equal(project_dual(5.0, [0.0, 0.0]), [0.0, 0.0])

    def test_interior(self):
        assert project_dual(1.0, [0.3])[0] == 0.3

    def test_nonpositive_cap(self):
        with pytest.raises(ValueError):
            project_dual(0.0, [1.0])


SETS = [
    Box(-np.ones(3), np.array([0.5, 2.0, 1.0])),
    Ball(np.array([0.3, -0.2]), 1.7),
]


@pytest.mark.parametrize("s", SETS, ids=["box", "ball"])
def test_idempotence_and_membership(s):
    rng = np.random.default_rng(0)
    for _ in range(200):
        p = rng.normal(scale=3.0, size=s.dim)
        q = s.project(p)
        np.testing.assert_array_equal(s.project(q), q)
        assert s.contains(q, tol=1e-12)


@pytest.mark.parametrize("s", SETS, ids=["box", "ball"])
def test_non_expansiveness(s):
    rng = np.random.default_rng(1)
    for _ in range(1000):
        p = rng.normal(scale=4.0, size=s.dim)
        q = rng.normal(scale=4.0, size=s.dim)
        lhs = np.linalg.norm(s.project(p) - s.project(q))
        assert lhs <= np.linalg.norm(p - q) + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=2, max_size=2))
def test_ball_projection_properties(point):
    s = Ball(np.zeros(2), 1.0)
    q = s.project(np.array(point))
    assert np.linalg.norm(q) <= 1.0 + 1e-12
    np.testing.assert_array_equal(s.project(q), q)


class TestProductSet:
    def test_diameter_pythagoras(self):
        blocks = [Box(-np.ones(2), np.ones(2)), Ball(np.zeros(3), 2.0), unit_box(1)]
        s = ProductSet(blocks)
        expected = np.sqrt(sum(b.diameter() ** 2 for b in blocks))
        assert abs(s.diameter() - expected) <= 1e-12

    def test_offsets_and_dim(self):
        s = ProductSet([unit_box(2), unit_box(3)])
        assert s.dim == 5
        assert s.offsets == (0, 2, 5)
        assert s.block_slice(1) == slice(2, 5)

    def test_joint_projection_blockwise(self):
        s = ProductSet([unit_box(1), Ball(np.zeros(2), 1.0)])
        p = np.array([5.0, 3.0, 4.0])
        out = s.project(p)
        np.testing.assert_allclose(out, [1.0, 0.6, 0.8], rtol=0, atol=1e-15)

    def test_sample_in_set(self):
        s = ProductSet([Box(-np.ones(2), np.ones(2)), Ball(np.ones(2), 0.5)])
        rng = np.random.default_rng(3)
        for _ in range(100):
            assert s.contains(s.sample(rng), tol=1e-12)

    def test_immutability(self):
        s = unit_box(2)
        with pytest.raises(ValueError):
            s.lo[0] = 5.0
