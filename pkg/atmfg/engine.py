'''
    Approximate TMFG (a-TMFG) builder. Instead of scoring every node against
    every face over a dense correlation matrix, each new face only looks at
    the union of its vertices' neighbors in a static kNN graph. Faces carry a
    cached centroid (sum of their vertex rows), so scoring a candidate is a
    single dot product. Candidates wait in a lazy-deletion max-heap, the set
    of live faces can be capped (oldest pruned first), and when no local
    candidate is left the live face centroids query the soft-deleted index
    for nodes still outside the graph.

    Classes:
    --------
    Engine: State of one build.

    Methods:
    --------
    build_atmfg(m, cfg, clique): Returns (EdgeList, EngineStats).

    seed_clique(g, c): Seed clique from the kNN graph.

    profile_seed(m, c): Seed clique from correlation profiles.

    score(m, f, v): Summed correlation of node v to the vertices of f.

    local_expand(state, f_best, v_best): Attach v_best to f_best.

    global_rescue(state): Inject candidates found through the index.
'''


from time import perf_counter

import numpy as np

from ann_index import AnnIndex
from dataset import znormalize
from exact_tmfg import tetrahedron_faces, subdivide
from structures import FaceUniverse, CandidateHeap
from model import (DataMatrix, EdgeList, SparseKnnGraph, Face, AtmfgConfig,
                   EngineStats)
from exception import (SizeError, ParameterError, InternalStateError,
                       InvalidCandidateError, FrontierExhaustedError)
from consts import SEEDING_KNN
from logger import console, file


# rows per block when summing correlation profiles
PROFILE_CHUNK = 4096


# ====================
#     MAIN METHODS
# ====================


def build_atmfg(m: DataMatrix, cfg: AtmfgConfig = None, clique: list = None):
    '''
        Build the a-TMFG of m. m is normalized first if needed. clique
        overrides the seed clique (4 node ids).

        Returns (EdgeList with 3N - 6 edges, EngineStats).
    '''

    start = perf_counter()
    engine = Engine(m, cfg or AtmfgConfig(), clique)
    edges = engine.run()
    engine.stats.wall_seconds = round(perf_counter() - start, 6)
    file.info('a-TMFG stats: %s', str(engine.stats.as_json()))
    return edges, engine.stats


def seed_clique(g: SparseKnnGraph, c: int = 4):
    '''
        Returns the node whose c - 1 strongest kNN weights have the largest
        sum, followed by those c - 1 neighbors. Ties go to the lowest node
        id. If no node has c - 1 neighbors, the node with the most neighbors
        is used and the clique is completed with the lowest free ids.
    '''

    n = g.n_nodes
    if n < c:
        raise SizeError('A seed clique of %d needs at least %d nodes, got %d'
                        % (c, c, n))
    degrees = np.diff(g.indptr)
    eligible = np.flatnonzero(degrees >= c - 1)
    if len(eligible):
        slots = g.indptr[eligible][:, None] + np.arange(c - 1)
        sums = g.weights[slots].sum(axis=1)
        # argmax keeps the first (lowest id) of equal sums
        seed = int(eligible[np.argmax(sums)])
    else:
        seed = int(np.argmax(degrees))
        file.warning('No node has %d kNN neighbors, seeding from node %d',
                     c - 1, seed)
    clique = [seed]
    for v in g.neighbor_ids(seed)[:c - 1]:
        clique.append(int(v))
    for v in range(n):
        if len(clique) == c:
            break
        if v not in clique:
            clique.append(v)
    return clique


def profile_seed(m: DataMatrix, c: int = 4):
    '''
        Returns (ascending) the node with the largest correlation row-sum,
        then c - 1 times the free node with the largest summed correlation
        to the nodes already chosen. Ties go to the lowest id. This is the
        seed tetrahedron of the exact builder, computed from row blocks in
        O(N D) without the dense correlation matrix.
    '''

    n = m.n_rows
    if n < c:
        raise SizeError('A seed clique of %d needs at least %d nodes, got %d'
                        % (c, c, n))
    if not m.normalized:
        raise ParameterError('Profile seeding requires a normalized matrix')
    total = m.values.sum(axis=0, dtype=np.float64)
    sums = np.empty(n, dtype=np.float64)
    for start in range(0, n, PROFILE_CHUNK):
        block = m.values[start:start + PROFILE_CHUNK].astype(np.float64)
        sums[start:start + PROFILE_CHUNK] = \
            block @ total - np.einsum('ij,ij->i', block, block)
    clique = [int(np.argmax(sums))]
    free = np.ones(n, dtype=bool)
    free[clique[0]] = False
    pull = _profile(m, clique[0])
    while len(clique) < c:
        nxt = int(np.argmax(np.where(free, pull, -np.inf)))
        clique.append(nxt)
        free[nxt] = False
        pull += _profile(m, nxt)
    return sorted(clique)


def _profile(m: DataMatrix, v: int):
    row = m.values[v].astype(np.float64)
    out = np.empty(m.n_rows, dtype=np.float64)
    for start in range(0, m.n_rows, PROFILE_CHUNK):
        out[start:start + PROFILE_CHUNK] = \
            m.values[start:start + PROFILE_CHUNK].astype(np.float64) @ row
    return out


def score(m: DataMatrix, f: Face, v: int):
    '''
        Returns dot(row_v, centroid_f) / D, which is the sum of the
        correlations of v with the three vertices of f.
    '''

    if v in f.vertices:
        raise InvalidCandidateError('Node %d is a vertex of face %d'
                                    % (v, f.face_id))
    return float(np.dot(m.values[v].astype(np.float64), f.centroid)
                 / m.n_cols)


def local_expand(state, f_best: Face, v_best: int, gain: float = None):
    state.local_expand(f_best, v_best, gain)


def global_rescue(state):
    return state.global_rescue()


class Engine:
    '''
        State of one a-TMFG build.

        Attributes:
        -----------
        m: The normalized matrix.

        cfg: The AtmfgConfig.

        k: Neighborhood size in use (cfg.k clipped to N - 1).

        index: AnnIndex over m, nodes soft-deleted once integrated.

        graph: Static kNN graph exported before any deletion.

        universe: FaceUniverse of live faces.

        heap: CandidateHeap holding at most one entry per live face.

        integrated: Boolean mask of nodes already in the graph.

        edges: The EdgeList being built.

        stats: EngineStats of the build.

        clique: The seed clique (given, or sorted once placed).

        insertions: One (face vertices, node, gain) record per expansion.

        Methods:
        --------
        place_seed(): Add the seed clique, its 4 faces and their candidates.

        run(): Build the graph and return the EdgeList (seeding first if
        place_seed() was not called).

        local_expand(face, v, gain): Attach v to face.

        global_rescue(): Query the index with every live face centroid and
        push the best pair of each face. Returns the number pushed.
    '''

    def __init__(self, m: DataMatrix, cfg: AtmfgConfig, clique: list = None):
        cfg.validate()
        n = m.n_rows
        if n < 4:
            raise SizeError('The TMFG needs at least 4 nodes, got %d' % n)
        self.m = znormalize(m)
        self.cfg = cfg
        self.k = min(cfg.k, n - 1)
        if self.k < cfg.k:
            console.info('k clipped from %d to %d', cfg.k, self.k)
        self.index = AnnIndex(self.m, mode=cfg.index_mode,
                              max_degree=cfg.max_degree,
                              ef_construction=cfg.ef_construction,
                              ef_search=cfg.ef_search, rng_seed=cfg.seed,
                              exact_fallback=cfg.exact_fallback,
                              sketch_dim=cfg.sketch_dim)
        self.graph = self.index.export_knn_graph(self.k)
        self.universe = FaceUniverse(cfg.limit_for(n))
        self.heap = CandidateHeap()
        self.integrated = np.zeros(n, dtype=bool)
        self.edges = EdgeList(n)
        self.stats = EngineStats(n)
        self.insertions = []
        self.clique = clique
        self._rows = self.m.values
        self._d = self.m.n_cols
        self._next_face = 0
        self._seeded = False

    @property
    def n(self):
        return self.m.n_rows

    @property
    def target_edges(self):
        return 3 * self.n - 6

    def run(self):
        console.info('Building a-TMFG over %d nodes (k=%d, U=%s)', self.n,
                     self.k, str(self.universe.limit))
        if not self._seeded:
            self.place_seed()
        while len(self.edges) < self.target_edges:
            entry = self.heap.pop()
            if entry is None:
                global_rescue(self)
                continue
            gain, v, face_id = entry
            face = self.universe.get(face_id)
            if face is None:
                self.stats.lazy_discards += 1
                continue
            if self.integrated[v]:
                self.stats.lazy_discards += 1
                self._push_best(face)
                continue
            local_expand(self, face, v, gain)
        self.stats.edges = len(self.edges)
        self.stats.peak_universe = self.universe.peak
        return self.edges

    def local_expand(self, face: Face, v: int, gain: float = None):
        if face.face_id not in self.universe:
            raise InternalStateError('Face %d is not alive' % face.face_id)
        if self.integrated[v]:
            raise InternalStateError('Node %d is already integrated' % v)
        if gain is None:
            gain = score(self.m, face, v)

        for u in face.vertices:
            self.edges.add(v, u, self._correlation(u, v))
        self.integrated[v] = True
        self.index.mark_deleted(v)
        self.universe.kill(face.face_id)
        self.insertions.append((face.vertices, int(v), float(gain)))

        created = [self._new_face(vertices)
                   for vertices in subdivide(face.vertices, v)]
        self.stats.faces_pruned += len(self.universe.prune())
        for new in created:
            if new.alive:
                self._push_best(new)
        self.universe.record_peak()

    def global_rescue(self):
        remaining = self.n - int(self.integrated.sum())
        if remaining == 0:
            return 0
        faces = self.universe.live()
        self.stats.rescues += 1
        pushed = 0
        if faces:
            centroids = np.stack([face.centroid for face in faces])
            results = self.index.batch_query(centroids, self.cfg.rescue_k)
            for face, hits in zip(faces, results):
                best = next(((node, sim) for node, sim in hits
                             if not self.integrated[node]), None)
                if best is None:
                    continue
                face.exhausted = False
                self.heap.push(best[1], best[0], face.face_id)
                pushed += 1
        self.stats.rescue_candidates += pushed
        file.info('Rescue %d: %d candidates for %d remaining nodes',
                  self.stats.rescues, pushed, remaining)
        if pushed == 0:
            raise FrontierExhaustedError('No candidate found for %d remaining '
                                         'nodes' % remaining)
        return pushed

    # the following methods are internal

    def place_seed(self):
        if self._seeded:
            raise InternalStateError('Seed clique already placed')
        self._seeded = True
        clique = self.clique
        if clique is None and self.cfg.seeding == SEEDING_KNN:
            clique = seed_clique(self.graph, self.cfg.clique_size)
        elif clique is None:
            clique = profile_seed(self.m, self.cfg.clique_size)
        clique = sorted(int(v) for v in clique)
        self.clique = clique
        if (len(set(clique)) != self.cfg.clique_size or clique[0] < 0
                or clique[-1] >= self.n):
            raise ParameterError('Seed clique must be %d distinct node ids'
                                 % self.cfg.clique_size)
        for i, u in enumerate(clique):
            for v in clique[i + 1:]:
                w = self.graph.weight(u, v)
                if w is None:
                    w = self.graph.weight(v, u)
                if w is None:
                    w = self._correlation(u, v)
                self.edges.add(u, v, w)
        for v in clique:
            self.integrated[v] = True
            self.index.mark_deleted(v)
        faces = [self._new_face(vertices)
                 for vertices in tetrahedron_faces(clique)]
        self.universe.record_peak()
        for face in faces:
            self._push_best(face)
        file.info('Seed clique %s', str(clique))

    def _new_face(self, vertices: tuple):
        face = Face(self._next_face, vertices, self._rows)
        self._next_face += 1
        self.stats.faces_created += 1
        self.stats.centroids_computed += 1
        self.universe.add(face)
        return face

    def _push_best(self, face: Face):
        pool = np.unique(np.concatenate(
            [self.graph.neighbor_ids(u) for u in face.vertices]))
        pool = pool[~self.integrated[pool]]
        if len(pool) == 0:
            face.exhausted = True
            return False
        gains = (self._rows[pool].astype(np.float64) @ face.centroid) / self._d
        # pool is ascending, argmax keeps the lowest id among ties
        best = int(np.argmax(gains))
        self.heap.push(float(gains[best]), int(pool[best]), face.face_id)
        return True

    def _correlation(self, u: int, v: int):
        c = np.dot(self._rows[u].astype(np.float64),
                   self._rows[v].astype(np.float64)) / self._d
        return float(np.clip(c, -1.0, 1.0))
