import numpy as np
import pytest

from macsearch.network import (
    Location, NetworkFormatError, RoadNetwork, RoadSocialNetwork, SocialNetwork, load_road_network,
    load_road_social, load_social_network, save_road_social,
)
from macsearch.synth import generate_road_social


def write(path, text):
    path.write_text(text)
    return path


def test_two_vertex_road(tmp_path):
    road = load_road_network(write(tmp_path / "r.tsv", "0 1 5.0\n"))
    assert road.n == 2
    assert road.edges == ((0, 1, 5.0),)


def test_negative_weight_names_line(tmp_path):
    with pytest.raises(NetworkFormatError, match="negative weight at line 2"):
        load_road_network(write(tmp_path / "r.tsv", "# road\n0 1 -2\n"))


def test_triangle_degrees(tmp_path):
    road = load_road_network(write(tmp_path / "r.tsv", "a b 1\nb c 1\nc a 1\n"))
    assert (road.n, len(road.edges)) == (3, 3)
    assert all(road.degree(u) == 2 for u in range(3))


@pytest.fixture
def road(tmp_path):
    return load_road_network(write(tmp_path / "r.tsv", "r0 r1 4\nr1 r2 3\n"))


def test_social_files(tmp_path, road):
    soc = load_social_network(write(tmp_path / "e.tsv", "0 1\n"),
                              write(tmp_path / "a.tsv", "0 0.1 0.2 0.3\n1 0.4 0.5 0.6\n"),
                              write(tmp_path / "l.tsv", "0 r0 r1 1.5\n1 r2\n"), road)
    assert (soc.n, soc.m, soc.d) == (2, 1, 3)
    assert soc.locations[0] == Location(0, 1.5)
    assert soc.locations[1].on_vertex(road) == 2


def test_missing_attributes(tmp_path, road):
    with pytest.raises(NetworkFormatError, match="missing attributes for 5"):
        load_social_network(write(tmp_path / "e.tsv", "0 5\n"), write(tmp_path / "a.tsv", "0 1 2 3\n"),
                            write(tmp_path / "l.tsv", "0 r0\n"), road)


def test_inconsistent_dimensionality(tmp_path, road):
    with pytest.raises(NetworkFormatError, match="inconsistent dimensionality"):
        load_social_network(write(tmp_path / "e.tsv", ""), write(tmp_path / "a.tsv", "0 1 2 3\n1 1 2 3 4\n"),
                            write(tmp_path / "l.tsv", "0 r0\n1 r1\n"), road)


def test_duplicate_social_edge(tmp_path, road):
    with pytest.raises(NetworkFormatError, match="duplicate edge"):
        load_social_network(write(tmp_path / "e.tsv", "0 1\n1 0\n"), write(tmp_path / "a.tsv", "0 1\n1 2\n"),
                            write(tmp_path / "l.tsv", "0 r0\n1 r1\n"), road)


def test_offset_outside_edge_rejected():
    road = RoadNetwork.build(2, [(0, 1, 1.0)])
    soc = SocialNetwork.build(1, [], [Location(0, 2.0)], [[0.5]])
    with pytest.raises(NetworkFormatError, match="offset outside"):
        RoadSocialNetwork(road, soc)


def test_round_trip_is_byte_identical(tmp_path):
    rsn = generate_road_social(60, 3, "independent", "grid", seed=4, grid=(4, 4))
    save_road_social(rsn, tmp_path / "a")
    save_road_social(load_road_social(tmp_path / "a"), tmp_path / "b")
    for name in ("road.tsv", "social_edges.tsv", "attributes.tsv", "locations.tsv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    again = load_road_social(tmp_path / "b")
    assert np.array_equal(again.social.attributes, rsn.social.attributes)
    assert again.social.edges == rsn.social.edges
