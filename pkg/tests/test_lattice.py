import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import bfs_distances
from qcatn.lattice import Lattice, parse_lattice


def test_sites_row_major():
    lat = Lattice(2, 3)
    assert lat.N == 9
    assert lat.sites[:4] == ((0, 0), (0, 1), (0, 2), (1, 0))
    assert lat.index[(1, 0)] == 3
    assert lat.z == 4


@pytest.mark.parametrize("lat", [
    Lattice(1, 5), Lattice(1, 8, boundary="periodic"), Lattice(2, 3), Lattice(2, 4, boundary="periodic"),
])
def test_distance_matches_graph_search(lat):
    ref = bfs_distances(lat)
    for s in lat.sites:
        for t in lat.sites:
            assert lat.distance(s, t) == ref[s][t]


def test_open_chain_partition():
    lat = Lattice(1, 4)
    part = lat.partition([0])
    assert part.A == ((0,),)
    assert part.a == ((1,),)
    assert part.b == ((2,),)
    assert part.B == ((3,),)
    assert part.A_bar == ((0,), (1,))
    assert part.B_bar == ((2,), (3,))


def test_small_chain_region_sets():
    assert Lattice(1, 4).enumerate_S(2) == [((0,),), ((3,),)]
    assert Lattice(1, 2).enumerate_S(2) == []
    assert Lattice(1, 4, boundary="periodic").enumerate_S(4) == []
    assert Lattice(1, 5, boundary="periodic").enumerate_S(5) == []
    assert len(Lattice(1, 6, boundary="periodic").enumerate_S(1)) == 6


def test_periodic_range_guard():
    with pytest.raises(ValueError, match="r <= M/4"):
        Lattice(1, 7, boundary="periodic", r=2)
    Lattice(1, 8, boundary="periodic", r=2)


@pytest.mark.parametrize("kwargs", [dict(d_L=0, M=3), dict(d_L=1, M=3, d=1), dict(d_L=1, M=3, boundary="mobius")])
def test_invalid_lattices(kwargs):
    with pytest.raises(ValueError):
        Lattice(**kwargs)


def test_boundary_size():
    assert Lattice(1, 6, boundary="periodic").boundary_size([1, 2]) == 2
    assert Lattice(1, 6).boundary_size([0, 1]) == 1
    assert Lattice(2, 3).boundary_size([(1, 1)]) == 4


def test_blocks_are_contiguous_and_proper():
    lat = Lattice(1, 5, boundary="periodic")
    blocks = lat.blocks()
    assert ((0,), (4,)) in blocks
    assert all(len(b) < lat.N for b in blocks)
    assert len(blocks) == 5 * 4


def test_translate_periodic():
    lat = Lattice(1, 6, boundary="periodic")
    assert lat.translate([4, 5], 2) == ((0,), (1,))


@given(
    M=st.integers(3, 7),
    boundary=st.sampled_from(["open", "periodic"]),
    data=st.data(),
)
def test_partition_is_disjoint_cover(M, boundary, data):
    if boundary == "periodic" and M < 4:
        M = 4
    lat = Lattice(1, M, boundary=boundary)
    A = data.draw(st.sets(st.integers(0, M - 1), min_size=1, max_size=M))
    part = lat.partition(A)
    pieces = [set(part.A), set(part.a), set(part.b), set(part.B)]
    assert sum(len(p) for p in pieces) == lat.N
    assert set().union(*pieces) == set(lat.sites)
    for s in part.a:
        assert 0 < lat.region_distance(s, part.A) <= lat.r
    for s in part.b:
        assert lat.r < lat.region_distance(s, part.A) <= 2 * lat.r
    for s in part.B:
        assert lat.region_distance(s, part.A) > 2 * lat.r


def test_parse_lattice():
    lat = parse_lattice("2d,M=4,periodic,d=3")
    assert (lat.d_L, lat.M, lat.boundary, lat.d) == (2, 4, "periodic", 3)
    assert parse_lattice({"M": 5}).to_dict() == {"d_L": 1, "M": 5, "d": 2, "boundary": "open", "r": 1}
    assert parse_lattice("1d, M=4, open, r=1") == Lattice(1, 4)
    with pytest.raises(ValueError, match="does not set M"):
        parse_lattice("1d,open")
    with pytest.raises(ValueError):
        parse_lattice("1d,M=4,bogus")


def test_with_size_keeps_everything_else():
    lat = Lattice(1, 4, d=3, boundary="periodic").with_size(8)
    assert lat.to_dict() == {"d_L": 1, "M": 8, "d": 3, "boundary": "periodic", "r": 1}
