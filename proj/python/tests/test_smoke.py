import itertools
import math

import numpy as np
import pytest

import gdvalign as ga


def triangle_plus_tail():
    return ga.Graph.parse("a b\nb c\nc a\nc d\n")


def test_graph_parse_and_serialize():
    g = triangle_plus_tail()
    assert g.num_nodes == 4
    assert g.num_edges == 4
    assert g.labels == ["a", "b", "c", "d"]
    assert g.serialize() == "a b\na c\nb c\nc d\n"
    assert ga.Graph.parse(g.serialize()) == g
    with pytest.raises(ga.FormatError):
        ga.Graph.parse("lonely\n")


def test_generators_and_rewire():
    g = ga.generate_geo(200, 800, 1)
    assert (g.num_nodes, g.num_edges) == (200, 800)
    noisy, truth = ga.rewire(g, 50, 3)
    assert noisy.num_edges == 800
    assert truth == list(range(200))
    same, _ = ga.rewire(g, 0, 3)
    assert same == g
    with pytest.raises(ga.ParameterError):
        ga.rewire(g, 101, 0)


def test_orbit_counts_match_oracle_and_networkx_triangles():
    nx = pytest.importorskip("networkx")
    h = nx.gnp_random_graph(25, 0.3, seed=4)
    g = ga.Graph(25, list(h.edges()))
    gdv = ga.count_orbits(g)
    assert gdv.shape == (25, ga.NUM_ORBITS)
    assert np.array_equal(gdv, ga.brute_force_orbits(g))
    triangles = nx.triangles(h)
    for u in range(25):
        assert gdv[u, 0] == h.degree(u)
        assert gdv[u, 3] == triangles[u]
        assert gdv[u, 2] + gdv[u, 3] == math.comb(h.degree(u), 2)


def test_similarity_and_alignment_pipeline():
    g = ga.generate_sf(150, 600, 2)
    noisy, truth = ga.rewire(g, 0, 5)
    sim = ga.graphlet_similarity(g, noisy)
    assert sim.shape == (150, 150)
    assert sim.min() >= 0.0 and sim.max() <= 1.0
    wave = ga.wave_align(g, noisy, sim)
    assert sorted(wave["mapping"]) == list(range(150))
    assert ga.node_correctness(wave["mapping"], truth) == 1.0
    assert ga.s3_score(g, noisy, wave["mapping"]) == 1.0

    sa = ga.sa_align(g, noisy, sim, moves=20000, seed=1)
    assert len(set(sa["mapping"])) == 150
    assert sa["moves"] == 20000
    assert 0.0 <= sa["objective"] <= 1.0


def test_pca_reduce_reports_components():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 50, size=(30, 15), dtype=np.uint64)
    b = rng.integers(0, 50, size=(20, 15), dtype=np.uint64)
    r = ga.pca_reduce(a, b)
    assert r["components"] >= 2
    assert r["first"].shape == (30, r["components"])
    assert r["second"].shape == (20, r["components"])
    assert r["explained_variance"] >= 0.90


def test_sa_toy_optimum_matches_exhaustive_search():
    rng = np.random.default_rng(3)
    sim = rng.uniform(0.0, 0.5, size=(5, 5))
    hidden = rng.permutation(5)
    sim[np.arange(5), hidden] = 0.9
    best = max(itertools.permutations(range(5)), key=lambda p: sum(sim[i, p[i]] for i in range(5)))
    g = ga.Graph(5, [(0, 1), (1, 2)])
    r = ga.sa_align(g, g, sim, w_s3=0.0, w_esim=1.0, moves=100000, seed=9)
    assert tuple(r["mapping"]) == best


def test_benchmark_and_rank(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(
        "master_seed: 3\n"
        "noise_levels: [0, 25]\n"
        "instances_per_level: 1\n"
        "sa:\n  synthetic: {moves: 2000}\n"
        "networks:\n  - {name: g, model: geo, n: 60, m: 180}\n"
    )
    out = tmp_path / "out"
    records = ga.run_benchmark(str(cfg), str(out))
    assert len(records) == 4
    assert {r["aligner"] for r in records} == {"wave", "sa"}
    with pytest.raises(ga.ParameterError):
        ga.rank_records(str(out / "records.csv"))
