import numpy as np
import pytest

from mfd.domain import (
    bfs_tree,
    build_domain,
    cycle,
    interval,
    n_components,
    orientation_consistent,
    permutation_sign,
    s3,
    sphere2,
    vertex_link,
)
from mfd.errors import BadParam


def test_interval_and_cycle():
    d = interval(4)
    assert d.n_vertices == 5 and len(d.edges) == 4 and d.is_acyclic()
    assert d.euler_characteristic() == 1
    c = cycle(6)
    assert c.is_cycle() and not c.is_acyclic() and c.euler_characteristic() == 0
    with pytest.raises(BadParam):
        cycle(2)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_sphere2_counts(k):
    d = sphere2(k)
    d.validate()
    assert d.euler_characteristic() == 2
    assert len(d.triangles) == 8 * 4**k
    np.testing.assert_allclose(np.linalg.norm(d.coords, axis=1), 1.0)
    assert orientation_consistent(d.triangles, d.orientation)


@pytest.mark.parametrize("k", [0, 1])
def test_s3_counts(k):
    d = s3(k)
    d.validate()
    assert d.euler_characteristic() == 0
    assert len(d.tets) == 16 * 8**k
    assert orientation_consistent(d.tets, d.orientation)


def test_s3_level2_size():
    d = s3(2)
    assert d.n_vertices == 192 and len(d.tets) == 1024


def test_vertex_link_is_a_sphere():
    d = sphere2(1)
    link = vertex_link(s3(1), 0)
    # the link of a vertex in a 3-manifold is a closed surface of Euler characteristic 2
    tris = link
    verts = np.unique(tris)
    edges = {frozenset(e) for t in tris for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0]))}
    assert len(verts) - len(edges) + len(tris) == 2
    assert d.dimension == 2


def test_bfs_tree_spans():
    d = sphere2(1)
    parent, order, tree = bfs_tree(d)
    assert len(order) == d.n_vertices and len(tree) == d.n_vertices - 1
    assert n_components(d) == 1


def test_permutation_sign():
    assert permutation_sign([0, 1, 2]) == 1
    assert permutation_sign([1, 0, 2]) == -1
    assert permutation_sign([1, 2, 0]) == 1


def test_build_domain():
    assert build_domain("interval(4)").n_vertices == 5
    assert build_domain("cycle", 8).n_vertices == 8
    with pytest.raises(BadParam):
        build_domain("torus", 3)
