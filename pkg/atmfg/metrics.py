'''
    Evaluation metrics: edge-set Jaccard similarity, the weighted average
    intra-cluster shortest path, structural audits and the window overlap
    test for the stationarity of a filtered graph.

    Methods:
    --------
    jaccard(e1, e2): |E1 & E2| / |E1 | E2| on unweighted edges.

    pairwise_jaccard(edge_lists): Jaccard of every pair of edge lists.

    weighted_intra_cluster_path(e, p, max_pairs_per_cluster, seed,
    induced): Returns (L_weighted, per_cluster).

    graph_audit(e): Returns an AuditReport.

    temporal_overlap(m, n_windows, builder, cfg): Jaccard of the graphs of
    consecutive column windows.
'''


from math import ceil

import numpy as np
from numpy.random import default_rng
from scipy.sparse.csgraph import connected_components, shortest_path

from model import DataMatrix, EdgeList, Partition, AuditReport
from dataset import znormalize
from exception import (ParameterError, InputMismatchError,
                       UnreachablePairError)
from consts import DEFAULT_MAX_PAIRS, BFS_CHUNK, BUILDER_EXACT, BUILDER_ATMFG
from utils import derive_seed
from logger import console, file


# ====================
#     MAIN METHODS
# ====================


def jaccard(e1: EdgeList, e2: EdgeList):
    a, b = e1.pairs(), e2.pairs()
    union = len(a | b)
    if union == 0:
        return 1.0
    return len(a & b) / union


def pairwise_jaccard(edge_lists: list):
    '''
        Returns {'pairs': [(i, j), ...], 'scores': [...], 'mean':, 'std':}
        over every i < j.
    '''

    if len(edge_lists) < 2:
        raise ParameterError('Pairwise Jaccard needs at least 2 edge lists')
    pairs, scores = [], []
    for i in range(len(edge_lists)):
        for j in range(i + 1, len(edge_lists)):
            pairs.append((i, j))
            scores.append(jaccard(edge_lists[i], edge_lists[j]))
    return {'pairs': pairs, 'scores': scores,
            'mean': float(np.mean(scores)), 'std': float(np.std(scores))}


def weighted_intra_cluster_path(e: EdgeList, p: Partition,
                                max_pairs_per_cluster: int =
                                DEFAULT_MAX_PAIRS, seed: int = 0,
                                induced: bool = False):
    '''
        L(C_k) is the mean hop distance over the ordered pairs of cluster
        C_k, and L_weighted the mean of L(C_k) weighted by cluster size.

        Distances are measured on the full graph, or on the subgraph
        induced by the cluster when induced is set (unreachable pairs are
        then left out). Clusters with more than max_pairs_per_cluster
        ordered pairs are estimated from a seeded sample of source nodes,
        each with all of its cluster targets. Singleton clusters are
        skipped.

        Returns (L_weighted, per_cluster) where per_cluster holds None for
        skipped clusters.
    '''

    if p.n_nodes != e.n_nodes:
        raise InputMismatchError('Partition has %d nodes, graph has %d'
                                 % (p.n_nodes, e.n_nodes))
    if max_pairs_per_cluster < 1:
        raise ParameterError('max_pairs_per_cluster must be positive')
    adjacency = e.adjacency()
    if not induced:
        components = connected_components(adjacency, directed=False)[0]
        if components > 1:
            raise UnreachablePairError('Graph has %d components'
                                       % components)

    per_cluster, sizes = [], []
    for k in range(p.n_clusters):
        members = p.members(k)
        if len(members) < 2:
            console.warning('Cluster %d has a single node, skipped', k)
            per_cluster.append(None)
            continue
        rng = default_rng(derive_seed(seed, k))
        value = _cluster_path(adjacency, members, max_pairs_per_cluster,
                              rng, induced)
        if value is None:
            console.warning('Cluster %d has no connected pair, skipped', k)
        else:
            sizes.append(len(members))
        per_cluster.append(value)

    if not sizes:
        raise ParameterError('No cluster has 2 or more connected nodes')
    values = np.array([v for v in per_cluster if v is not None])
    weights = np.array(sizes, dtype=np.float64) / sum(sizes)
    return float(np.dot(weights, values)), per_cluster


def graph_audit(e: EdgeList):
    components = 0
    if e.n_nodes:
        components = int(connected_components(e.adjacency(),
                                              directed=False)[0])
    return AuditReport(e.n_nodes, len(e), components, e.degrees())


def temporal_overlap(m: DataMatrix, n_windows: int,
                     builder: str = BUILDER_EXACT, cfg=None):
    '''
        Splits the columns of m into n_windows consecutive windows, builds
        one TMFG per window and returns the Jaccard of every consecutive
        pair of graphs. Stable structure gives values near 1.
    '''

    from engine import build_atmfg
    from exact_tmfg import build_exact_tmfg

    if n_windows < 2:
        raise ParameterError('At least 2 windows are required')
    if builder not in (BUILDER_EXACT, BUILDER_ATMFG):
        raise ParameterError('Unknown builder %s' % builder)
    width = m.n_cols // n_windows
    if width < 2:
        raise ParameterError('%d columns cannot fill %d windows'
                             % (m.n_cols, n_windows))

    graphs = []
    for w in range(n_windows):
        window = znormalize(DataMatrix(
            m.values[:, w * width:(w + 1) * width]))
        if builder == BUILDER_EXACT:
            graphs.append(build_exact_tmfg(window)[0])
        else:
            graphs.append(build_atmfg(window, cfg)[0])
        file.info('Window %d/%d built', w + 1, n_windows)
    return [jaccard(graphs[w], graphs[w + 1])
            for w in range(n_windows - 1)]


# ====================
#    OTHER METHODS
# ====================


def _cluster_path(adjacency, members, max_pairs: int, rng, induced: bool):
    s = len(members)
    if s * (s - 1) <= max_pairs:
        sources = np.arange(s)
    else:
        n_sources = min(s, ceil(max_pairs / (s - 1)))
        sources = np.sort(rng.choice(s, size=n_sources, replace=False))

    if induced:
        graph = adjacency[members][:, members]
        targets = np.arange(s)
        origin = sources
    else:
        graph = adjacency
        targets = members
        origin = members[sources]

    total, count = 0.0, 0
    for start in range(0, len(origin), BFS_CHUNK):
        chunk = origin[start:start + BFS_CHUNK]
        dist = shortest_path(graph, directed=False, unweighted=True,
                             indices=chunk)[:, targets]
        rows = np.arange(len(chunk))
        dist[rows, sources[start:start + BFS_CHUNK]] = np.nan
        dist = dist[~np.isnan(dist)]
        reachable = np.isfinite(dist)
        if not reachable.all():
            if not induced:
                raise UnreachablePairError('Unreachable intra-cluster pair')
            file.warning('%d unreachable pairs skipped',
                         int((~reachable).sum()))
        total += float(dist[reachable].sum())
        count += int(reachable.sum())
    if count == 0:
        return None
    return total / count
