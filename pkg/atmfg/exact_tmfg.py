'''
    Exact TMFG baseline. Builds the maximal planar graph greedily from the
    dense correlation matrix: a seed tetrahedron, then N - 4 insertions of
    the (node, face) pair with the largest gain (sum of the node's three
    correlations to the face), each covered face being replaced by its three
    subdivisions. Every step is recorded so the position of the selected
    face in the face universe can be analysed.

    Methods:
    --------
    build_exact_tmfg(m, clique, force, limit): Returns (EdgeList,
    ConstructionTrace).

    face_location_stats(trace): Returns L_j = (j - |F|) / |F| per step.

    face_location_histogram(stats, bins): (bin, count) rows over [-1, 0].

    validate_tmfg(e, trace): Structural checks of a build.

    tetrahedron_faces(clique): The 4 seed faces in birth order.
'''


from itertools import combinations

import numpy as np
from scipy.sparse.csgraph import connected_components

from dataset import correlation_matrix
from model import DataMatrix, EdgeList, ConstructionTrace, ValidationReport
from exception import SizeError, SizeGuardError, ParameterError
from consts import HIST_BINS
from settings import EXACT_LIMIT
from logger import console, file


# faces rescored per block (block x N gains in memory)
SCORE_CHUNK = 256


def tetrahedron_faces(clique):
    '''
        Returns the 4 faces of the seed tetrahedron, vertices ascending, in
        birth order.
    '''

    return list(combinations(sorted(int(v) for v in clique), 3))


def subdivide(vertices: tuple, v: int):
    '''
        Returns the 3 faces replacing face vertices once v is attached, in
        birth order.
    '''

    a, b, c = vertices
    return [(v, b, c), (a, v, c), (a, b, v)]


def seed_tetrahedron(corr):
    '''
        Greedy seed: the node with the largest correlation row-sum, its best
        partner, then twice the node with the largest summed correlation to
        the current seed set. Ties go to the lowest id.
    '''

    n = corr.shape[0]
    free = np.ones(n, dtype=bool)
    sums = corr.sum(axis=1, dtype=np.float64) - np.diag(corr)
    seed = [int(np.argmax(sums))]
    free[seed[0]] = False
    pull = corr[seed[0]].astype(np.float64)
    while len(seed) < 4:
        masked = np.where(free, pull, -np.inf)
        nxt = int(np.argmax(masked))
        seed.append(nxt)
        free[nxt] = False
        pull = pull + corr[nxt]
    return sorted(seed)


def build_exact_tmfg(m: DataMatrix, clique: list = None, force: bool = False,
                     limit: int = None):
    '''
        Build the exact TMFG of a normalized matrix.

        clique overrides the seed tetrahedron (4 node ids). Inputs above
        limit (ATMFG_EXACT_LIMIT by default) are refused unless force.

        Ties are broken by higher gain, then lower node id, then lower face
        birth order.

        Returns (EdgeList, ConstructionTrace).
    '''

    n = m.n_rows
    if n < 4:
        raise SizeError('The TMFG needs at least 4 nodes, got %d' % n)
    limit = EXACT_LIMIT if limit is None else limit
    if n > limit and not force:
        raise SizeGuardError('Exact TMFG refused for N=%d > %d (use force)'
                             % (n, limit))
    if not m.normalized:
        raise ParameterError('The TMFG requires a normalized matrix')

    corr = correlation_matrix(m)
    if clique is None:
        clique = seed_tetrahedron(corr)
    clique = sorted(int(v) for v in clique)
    if len(set(clique)) != 4 or clique[0] < 0 or clique[-1] >= n:
        raise ParameterError('Seed clique must be 4 distinct node ids')

    console.info('Building exact TMFG over %d nodes', n)
    builder = _ExactBuilder(corr, clique)
    edges, trace = builder.run()
    file.info('Exact TMFG done: %d edges', len(edges))
    return edges, trace


def face_location_stats(trace: ConstructionTrace):
    '''
        Returns the location L_j = (j - |F|) / |F| of the selected face at
        every step: 0 for the newest face, towards -1 for the oldest.
    '''

    return [(step.j - step.universe_size) / step.universe_size
            for step in trace.steps]


def face_location_histogram(stats: list, bins: int = HIST_BINS):
    '''
        Returns (bin left edge, count) rows of L_j over [-1, 0].
    '''

    counts, edges = np.histogram(np.asarray(stats, dtype=np.float64),
                                 bins=bins, range=(-1.0, 0.0))
    return [(round(float(left), 6), int(count))
            for left, count in zip(edges[:-1], counts)]


def validate_tmfg(e: EdgeList, trace: ConstructionTrace):
    '''
        Checks a TMFG build: edge count 3N - 6, N - 4 steps, connectivity,
        seed clique complete, degree 3 at insertion for every other node,
        and a face universe growing as 4 + 2t.

        Returns a ValidationReport.
    '''

    n = e.n_nodes
    report = ValidationReport()
    report.record('edge_count', len(e) == 3 * n - 6,
                  '%d edges, expected %d' % (len(e), 3 * n - 6))
    report.record('steps', len(trace) == n - 4,
                  '%d steps, expected %d' % (len(trace), n - 4))

    components = connected_components(e.adjacency(), directed=False)[0] \
        if n else 0
    report.record('connected', components == 1,
                  '%d components' % components)

    order = trace.insertion_order()
    position = np.full(n, -1, dtype=np.int64)
    valid_order = len(set(order)) == len(order) and all(
        0 <= v < n for v in order)
    if valid_order:
        position[order] = np.arange(len(order))
    seed_ok = all(pair in e for pair in combinations(trace.clique, 2))
    earlier = np.zeros(n, dtype=np.int64)
    for u, v, _ in e.edges():
        if position[u] < 0 or position[v] < 0:
            valid_order = False
            break
        later = u if position[u] > position[v] else v
        earlier[later] += 1
    degree_ok = valid_order and seed_ok and all(
        earlier[step.node] == 3 for step in trace.steps)
    report.record('degree_at_insertion', degree_ok,
                  'a node does not attach to exactly 3 earlier nodes')

    growth_ok = all(step.universe_size == 4 + 2 * t
                    for t, step in enumerate(trace.steps))
    report.record('universe_growth', growth_ok,
                  'universe size does not follow 4 + 2t')
    return report


class _ExactBuilder:
    '''
        Incremental exact construction. Every live face keeps its best
        remaining node and gain; after an insertion only the 3 new faces and
        the faces whose best node was just taken are rescored.
    '''

    def __init__(self, corr, clique: list):
        n = corr.shape[0]
        self.corr = corr
        self.n = n
        self.clique = clique
        n_faces = max(4, 3 * n - 8)
        self.verts = np.zeros((n_faces, 3), dtype=np.int64)
        self.alive = np.zeros(n_faces, dtype=bool)
        self.best_node = np.full(n_faces, -1, dtype=np.int64)
        self.best_gain = np.full(n_faces, -np.inf)
        self.remaining = np.ones(n, dtype=bool)
        self.remaining[clique] = False
        self.n_faces = 0

    def run(self):
        edges = EdgeList(self.n)
        for a, b in combinations(self.clique, 2):
            edges.add(a, b, self.corr[a, b])
        trace = ConstructionTrace(self.clique)
        self._score(self._add_faces(tetrahedron_faces(self.clique)))

        for _ in range(self.n - 4):
            live = np.flatnonzero(self.alive[:self.n_faces])
            f = self._select(live)
            v = int(self.best_node[f])
            j = int(np.count_nonzero(self.alive[:f + 1]))
            trace.append(j, len(live), v, self.best_gain[f])

            face = tuple(int(x) for x in self.verts[f])
            for u in face:
                edges.add(v, u, self.corr[v, u])
            self.remaining[v] = False
            self.alive[f] = False

            stale = np.flatnonzero(self.alive[:self.n_faces]
                                   & (self.best_node[:self.n_faces] == v))
            new = self._add_faces(subdivide(face, v))
            self._score(np.concatenate((stale, new)))
        return edges, trace

    def _add_faces(self, faces: list):
        ids = np.arange(self.n_faces, self.n_faces + len(faces))
        self.verts[ids] = faces
        self.alive[ids] = True
        self.n_faces += len(faces)
        return ids

    def _select(self, live):
        gains = self.best_gain[live]
        tied = live[gains == gains.max()]
        if len(tied) > 1:
            nodes = self.best_node[tied]
            tied = tied[nodes == nodes.min()]
        return int(tied.min())

    def _score(self, ids):
        if not self.remaining.any():
            self.best_node[ids] = -1
            self.best_gain[ids] = -np.inf
            return
        for start in range(0, len(ids), SCORE_CHUNK):
            block = ids[start:start + SCORE_CHUNK]
            tri = self.verts[block]
            gains = (self.corr[tri[:, 0]].astype(np.float64)
                     + self.corr[tri[:, 1]] + self.corr[tri[:, 2]])
            gains[:, ~self.remaining] = -np.inf
            best = np.argmax(gains, axis=1)
            self.best_node[block] = best
            self.best_gain[block] = gains[np.arange(len(block)), best]
