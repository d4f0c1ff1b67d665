from math import inf

import numpy as np
import pytest
from numpy.random import default_rng
from scipy.sparse.csgraph import connected_components

from . import context  # noqa: F401
from .oracle import greedy_tmfg
from .samples import random_matrix, gmrf_matrix, two_blobs
from model import DataMatrix, SparseKnnGraph, Face, AtmfgConfig
from dataset import correlation, correlation_matrix, znormalize
from engine import (Engine, build_atmfg, seed_clique, profile_seed, score,
                    local_expand, global_rescue)
from exact_tmfg import build_exact_tmfg, seed_tetrahedron
from metrics import jaccard, graph_audit
from structures import FaceUniverse, CandidateHeap
from exception import (SizeError, ParameterError, InvalidCandidateError,
                       InternalStateError)
from consts import MODE_EXACT, MODE_APPROXIMATE, SEEDING_KNN


def _knn(lists):
    '''
        SparseKnnGraph from {node: [(neighbor, weight), ...]} with equal
        list lengths.
    '''

    k = len(lists[0])
    indptr = np.arange(0, len(lists) * k + 1, k)
    indices = [j for i in range(len(lists)) for j, _ in lists[i]]
    weights = [w for i in range(len(lists)) for _, w in lists[i]]
    return SparseKnnGraph(k, indptr, indices, weights)


def _exact_config(n, **kwargs):
    return AtmfgConfig(k=n - 1, universe_limit=inf, index_mode=MODE_EXACT,
                       **kwargs)


# score


def test_score_perfect_correlation():
    row = np.array([1.0, -2.0, 0.5, 3.0, -1.0])
    m = znormalize(DataMatrix(np.stack([row] * 4)))
    assert score(m, Face(0, (0, 1, 2), m.values), 3) == pytest.approx(3.0)


def test_score_degenerate_node():
    values = np.random.default_rng(0).standard_normal((4, 6))
    values[3] = 7.0
    m = znormalize(DataMatrix(values))
    assert score(m, Face(0, (0, 1, 2), m.values), 3) == 0.0


def test_score_is_sum_of_correlations():
    m = random_matrix(20, 40, seed=1)
    face = Face(0, (2, 9, 14), m.values)
    for v in (0, 5, 19):
        expected = sum(correlation(m, v, u) for u in (2, 9, 14))
        assert abs(score(m, face, v) - expected) < 1e-9


def test_score_rejects_face_vertex():
    m = random_matrix(5, 6)
    with pytest.raises(InvalidCandidateError):
        score(m, Face(0, (0, 1, 2), m.values), 1)


# seed clique


def test_seed_clique_four_nodes():
    m = random_matrix(4, 8)
    engine = Engine(m, AtmfgConfig(k=3))
    assert sorted(seed_clique(engine.graph, 4)) == [0, 1, 2, 3]


def test_seed_clique_dominant_node():
    lists = [[(1, 0.1), (2, 0.1), (3, 0.1)],
             [(0, 0.1), (2, 0.2), (4, 0.1)],
             [(1, 0.9), (3, 0.8), (4, 0.7)],
             [(2, 0.8), (0, 0.1), (4, 0.1)],
             [(2, 0.7), (1, 0.1), (3, 0.1)]]
    assert seed_clique(_knn(lists), 4) == [2, 1, 3, 4]


def test_seed_clique_tie_goes_to_lower_id():
    lists = [[(1, 0.5), (2, 0.5), (3, 0.1)],
             [(0, 0.1), (2, 0.1), (3, 0.1)],
             [(0, 0.1), (1, 0.1), (3, 0.1)],
             [(0, 0.5), (4, 0.5), (2, 0.1)],
             [(3, 0.1), (1, 0.1), (2, 0.1)]]
    assert seed_clique(_knn(lists), 4)[0] == 0


def test_seed_clique_too_small():
    with pytest.raises(SizeError):
        seed_clique(_knn([[(1, 0.5)], [(0, 0.5)]]), 4)


@pytest.mark.parametrize('source', ['gmrf', 'gmrf32', 'noise'])
def test_profile_seed_is_exact_builder_seed(source):
    if source == 'noise':
        m = random_matrix(120, 30, seed=23)
    else:
        m, _ = gmrf_matrix(300, seed=21, as_float64=source == 'gmrf')
    assert profile_seed(m) == seed_tetrahedron(correlation_matrix(m))


def test_profile_seed_errors():
    with pytest.raises(SizeError):
        profile_seed(random_matrix(3, 5))
    with pytest.raises(ParameterError):
        profile_seed(DataMatrix(np.arange(20.0).reshape(4, 5)))


def test_default_seeding_follows_exact_builder():
    m, _ = gmrf_matrix(300, seed=24, as_float64=False)
    _, trace = build_exact_tmfg(m)
    engine = Engine(m, AtmfgConfig())
    engine.place_seed()
    assert engine.clique == trace.clique


def test_knn_seeding_uses_strongest_neighborhood():
    m = random_matrix(80, 20, seed=25)
    engine = Engine(m, AtmfgConfig(k=6, seeding=SEEDING_KNN))
    engine.place_seed()
    assert engine.clique == sorted(seed_clique(engine.graph, 4))


# config


@pytest.mark.parametrize('kwargs', [{'k': 2}, {'clique_size': 5},
                                    {'rescue_k': 0}, {'universe_limit': 3},
                                    {'index_mode': 'nope'},
                                    {'seeding': 'nope'}, {'sketch_dim': -1}])
def test_config_validation(kwargs):
    with pytest.raises(ParameterError):
        AtmfgConfig(**kwargs)


def test_default_universe_limit():
    cfg = AtmfgConfig()
    assert cfg.limit_for(100) == 1000
    assert cfg.limit_for(10000) == 3000
    assert AtmfgConfig(universe_limit=inf).limit_for(10) == inf
    assert AtmfgConfig(universe_limit=inf).as_dict()['universe_limit'] == \
        'inf'


# containers


def test_universe_prunes_oldest_first():
    m = random_matrix(8, 6)
    universe = FaceUniverse(limit=2)
    faces = [Face(i, (i, i + 1, i + 2), m.values) for i in range(4)]
    for face in faces:
        universe.add(face)
    pruned = universe.prune()
    assert [f.face_id for f in pruned] == [0, 1]
    assert not faces[0].alive and faces[3].alive
    assert universe.get(0) is None and universe.get(3) is faces[3]
    with pytest.raises(InternalStateError):
        universe.kill(0)


def test_heap_order():
    heap = CandidateHeap()
    heap.push(0.5, 3, 1)
    heap.push(0.9, 7, 2)
    heap.push(0.9, 4, 5)
    heap.push(0.9, 4, 3)
    assert [heap.pop() for _ in range(4)] == [(0.9, 4, 3), (0.9, 4, 5),
                                              (0.9, 7, 2), (0.5, 3, 1)]
    assert heap.pop() is None


# builds


def test_four_nodes():
    edges, stats = build_atmfg(random_matrix(4, 10), AtmfgConfig(k=3))
    assert len(edges) == 6
    assert stats.rescues == 0
    assert stats.edges == 6


def test_too_few_nodes():
    with pytest.raises(SizeError):
        build_atmfg(random_matrix(3, 10))


def test_k_is_clipped():
    edges, _ = build_atmfg(random_matrix(10, 20), AtmfgConfig(k=50))
    assert len(edges) == 24


@pytest.mark.parametrize('n,seed', [(5, 0), (7, 1), (13, 2), (40, 3),
                                    (101, 4), (250, 5)])
def test_structural_invariants(n, seed):
    m = random_matrix(n, 30, seed=seed)
    edges, stats = build_atmfg(m, AtmfgConfig(k=5, seed=seed))
    audit = graph_audit(edges)
    assert audit.edges == 3 * n - 6
    assert audit.components == 1
    assert audit.min_deg >= 3
    assert stats.faces_created == stats.centroids_computed == 4 + 3 * (n - 4)


def test_unbounded_universe_reaches_2n_minus_4():
    n = 60
    _, stats = build_atmfg(random_matrix(n, 20, seed=2),
                           AtmfgConfig(k=10, universe_limit=inf))
    assert stats.peak_universe == 2 * n - 4
    assert stats.faces_pruned == 0


def test_universe_limit_is_respected():
    n = 120
    _, stats = build_atmfg(random_matrix(n, 20, seed=3),
                           AtmfgConfig(k=10, universe_limit=12))
    assert stats.peak_universe <= 12
    assert stats.faces_pruned > 0


def test_local_expand_counts():
    m = random_matrix(30, 20, seed=4)
    engine = Engine(m, _exact_config(30))
    engine.place_seed()
    _, v, face_id = engine.heap.pop()
    face = engine.universe.get(face_id)
    before_edges, before_faces = len(engine.edges), len(engine.universe)
    local_expand(engine, face, v)
    assert len(engine.edges) == before_edges + 3
    assert len(engine.universe) == before_faces + 2
    assert engine.integrated[v]
    assert engine.index.deleted[v]
    with pytest.raises(InternalStateError):
        local_expand(engine, face, v)

    # a stale entry naming v is discarded and the build still completes
    live = engine.universe.live()[0]
    engine.heap.push(99.0, v, live.face_id)
    discards = engine.stats.lazy_discards
    edges = engine.run()
    assert len(edges) == 3 * 30 - 6
    assert engine.stats.lazy_discards > discards


def test_rescue_on_complete_graph_returns_zero():
    m = random_matrix(20, 10, seed=5)
    engine = Engine(m, AtmfgConfig(k=5))
    engine.run()
    assert global_rescue(engine) == 0


def test_rescue_scores_match_direct_scores():
    m, _ = two_blobs(size=20)
    engine = Engine(m, AtmfgConfig(k=5, rescue_k=3))
    engine.place_seed()
    while engine.heap.pop() is not None:
        pass
    pushed = global_rescue(engine)
    assert pushed == 4
    while True:
        entry = engine.heap.pop()
        if entry is None:
            break
        s, v, face_id = entry
        face = engine.universe.get(face_id)
        assert not engine.integrated[v]
        assert abs(s - score(engine.m, face, v)) < 1e-9


def test_rescue_connects_separated_blobs():
    m, labels = two_blobs(size=30)
    engine = Engine(m, AtmfgConfig(k=5))
    adjacency = np.zeros((60, 60))
    for i in range(60):
        adjacency[i, engine.graph.neighbor_ids(i)] = 1
    assert connected_components(adjacency, directed=False)[0] >= 2
    edges = engine.run()
    assert graph_audit(edges).components == 1
    assert len(edges) == 3 * 60 - 6
    assert engine.stats.rescues >= 1
    assert engine.stats.rescue_candidates >= 1


def test_matches_exhaustive_greedy():
    n = 50
    m, _ = gmrf_matrix(n, seed=6)
    engine = Engine(m, _exact_config(n))
    edges = engine.run()
    steps, expected = greedy_tmfg(correlation_matrix(m), engine.clique)
    got = [(tuple(sorted(vertices)), v)
           for vertices, v, _ in engine.insertions]
    assert got == steps
    assert edges.pairs() == expected


def test_shared_clique_reproduces_exact_tmfg():
    n = 50
    m, _ = gmrf_matrix(n, seed=7)
    exact, trace = build_exact_tmfg(m)
    approx, _ = build_atmfg(m, _exact_config(n), clique=trace.clique)
    assert approx.pairs() == exact.pairs()


def test_close_to_exact_tmfg_with_default_seeding():
    n = 200
    scores = []
    for seed in range(5):
        m, _ = gmrf_matrix(n, alpha=0.25, seed=10 + seed)
        exact, _ = build_exact_tmfg(m)
        approx, _ = build_atmfg(m, _exact_config(n, seed=seed))
        scores.append(jaccard(exact, approx))
    assert np.mean(scores) >= 0.95


def test_deterministic_with_approximate_index():
    m = random_matrix(300, 24, seed=8)
    cfg = AtmfgConfig(k=8, seed=3, index_mode=MODE_APPROXIMATE)
    first, _ = build_atmfg(m, cfg)
    second, _ = build_atmfg(m, cfg)
    assert first.edges() == second.edges()
    assert graph_audit(first).components == 1


def test_stats_json_fields():
    _, stats = build_atmfg(random_matrix(12, 10), AtmfgConfig(k=4))
    assert list(stats.as_json()) == ['n', 'edges', 'rescues',
                                     'lazy_discards', 'faces_pruned',
                                     'peak_universe', 'wall_seconds']


def test_recovers_planar_truth():
    m, truth = gmrf_matrix(300, alpha=0.25, seed=9, as_float64=False)
    edges, _ = build_atmfg(m)
    assert jaccard(edges, truth) >= 0.75


def test_planar_truth_recovery_tracks_exact_builder():
    for seed in (31, 32, 33):
        m, truth = gmrf_matrix(300, alpha=0.3, seed=seed, as_float64=False)
        exact, _ = build_exact_tmfg(m)
        approx, _ = build_atmfg(m)
        assert jaccard(approx, truth) >= jaccard(exact, truth) - 0.05


@pytest.mark.slow
def test_structural_invariants_many_inputs():
    rng = default_rng(2024)
    for trial in range(200):
        n = int(rng.integers(4, 2001))
        m = random_matrix(n, 16, seed=trial)
        cfg = AtmfgConfig(k=int(rng.integers(3, 30)), seed=trial)
        edges, _ = build_atmfg(m, cfg)
        audit = graph_audit(edges)
        assert audit.edges == 3 * n - 6
        assert audit.components == 1
        exact, _ = build_exact_tmfg(m)
        audit = graph_audit(exact)
        assert audit.edges == 3 * n - 6
        assert audit.components == 1


@pytest.mark.slow
def test_alpha_sweep_against_planar_truth():
    scores = {}
    for alpha in (0.1, 0.2, 0.25, 0.3, 1.0):
        values = []
        for repeat in range(5):
            m, truth = gmrf_matrix(1000, alpha=alpha, seed=100 + repeat,
                                   as_float64=False)
            edges, _ = build_atmfg(m, AtmfgConfig(seed=repeat))
            values.append(jaccard(edges, truth))
        scores[alpha] = np.mean(values)
    assert scores[0.2] >= 0.85 and scores[0.3] >= 0.85
    assert scores[0.1] < scores[0.25]
    assert scores[1.0] < scores[0.25]


@pytest.mark.slow
def test_universe_limit_plateau():
    n = 10000
    m, truth = gmrf_matrix(n, alpha=0.25, seed=300, as_float64=False)
    scores = {}
    for limit in (500, n // 2, inf):
        edges, _ = build_atmfg(m, AtmfgConfig(universe_limit=limit))
        scores[limit] = jaccard(edges, truth)
    assert abs(scores[n // 2] - scores[inf]) <= 0.05
    assert scores[500] < scores[n // 2]


@pytest.mark.slow
def test_runtime_is_near_linear():
    walls = {}
    for n in (5000, 20000):
        m, _ = gmrf_matrix(n, alpha=0.25, seed=400, as_float64=False)
        _, stats = build_atmfg(m, AtmfgConfig(k=50,
                                              universe_limit=int(0.3 * n)))
        walls[n] = stats.wall_seconds
    assert walls[20000] / walls[5000] <= 6
