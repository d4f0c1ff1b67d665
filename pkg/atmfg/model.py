'''
    Model classes used to represent the objects handled by the graph
    builders: feature matrices, edge lists, construction traces, kNN graphs,
    faces, engine configuration and statistics, generator parameters,
    partitions and the reports produced by the structural checks.

    Classes:
    --------
    Model: Base class for all model classes.

    DataMatrix: N x D feature matrix, one node per row.

    EdgeList: Undirected weighted edge set over n_nodes nodes.

    ConstructionTrace: Step-by-step record of an exact TMFG build.

    SparseKnnGraph: Static kNN graph in compressed sparse row layout.

    Face: Triangle of the planar construction with its cached centroid.

    AtmfgConfig: Parameters of the approximate builder.

    EngineStats: Counters recorded by the approximate builder.

    FactorModelParams: Parameters of the 1-factor generator.

    GmrfParams: Parameters of the GMRF sampler.

    Partition: Assignment of nodes to clusters.

    ValidationReport: Pass/fail per structural check of a TMFG build.

    AuditReport: Structural summary of an arbitrary edge list.
'''


from copy import copy
from math import ceil, inf, isinf
from collections import namedtuple

import numpy as np

from exception import (DimensionError, ParameterError, StructureError,
                       BoundsError)
from consts import (DEFAULT_K, DEFAULT_CLIQUE_SIZE, DEFAULT_RESCUE_K,
                    DEFAULT_UNIVERSE_FLOOR, DEFAULT_UNIVERSE_FRACTION,
                    MIN_UNIVERSE_LIMIT, DEFAULT_MAX_DEGREE,
                    DEFAULT_EF_CONSTRUCTION, DEFAULT_SAMPLES, MODE_AUTO,
                    MODE_EXACT, MODE_APPROXIMATE, DEFAULT_SKETCH_DIM,
                    SEEDING_PROFILE, SEEDING_KNN)


class Model:
    '''
        Base class for all model classes.

        Methods:
        --------
        as_dict(flat, _prefix): Converts object to dictionary and returns it.
        Attributes starting with an underscore and array-valued attributes
        are left out, so the result can be serialized into run manifests.
    '''

    def as_dict(self, flat: bool = False, _prefix: str = ''):
        if flat and _prefix:
            _prefix += '_'
        return {_prefix + str(key): copy(val)
                for key, val in self.__dict__.items()
                if not key.startswith('_')
                and not isinstance(val, np.ndarray)}


class DataMatrix(Model):
    '''
        N x D feature matrix, row-major, one node per row.

        Values are stored as given when they are floating point (float32 for
        files and generators), anything else is converted to float32. Dot
        products are always accumulated in float64.

        Attributes:
        -----------
        values: 2-D array of shape (n_rows, n_cols).

        normalized: True once rows are z-normalized.

        degenerate: Ids of constant rows (all zeros after normalization).
    '''

    def __init__(self, values, normalized: bool = False,
                 degenerate: list = None):
        values = np.asarray(values)
        if values.ndim != 2:
            raise DimensionError('Matrix must be 2-D, got %d-D' % values.ndim)
        if not np.issubdtype(values.dtype, np.floating):
            values = values.astype(np.float32)
        if values.shape[0] < 1:
            raise DimensionError('Matrix must have at least 1 row')
        if values.shape[1] < 2:
            raise DimensionError('Matrix must have at least 2 columns, got %d'
                                 % values.shape[1])
        self.values = values
        self.normalized = normalized
        self.degenerate = list(degenerate or [])

    @property
    def n_rows(self):
        return self.values.shape[0]

    @property
    def n_cols(self):
        return self.values.shape[1]

    def row(self, i: int):
        '''
            Returns row i as a float64 vector.
        '''

        if i < 0 or i >= self.n_rows:
            raise BoundsError('Row %d out of range [0, %d)' % (i, self.n_rows))
        return self.values[i].astype(np.float64)

    def as_dict(self, flat: bool = False, _prefix: str = ''):
        d = super().as_dict(flat, _prefix)
        if flat and _prefix:
            _prefix += '_'
        d[_prefix + 'n_rows'] = self.n_rows
        d[_prefix + 'n_cols'] = self.n_cols
        d[_prefix + 'dtype'] = str(self.values.dtype)
        return d


class EdgeList(Model):
    '''
        Undirected weighted edge set. Edges are stored canonically (u < v);
        self-loops and duplicates are rejected.

        Attributes:
        -----------
        n_nodes: Number of nodes (ids are 0 .. n_nodes - 1).

        Methods:
        --------
        add(u, v, w): Add edge (u, v) with weight w.

        discard(u, v): Remove edge (u, v) if present.

        pairs(): Returns the set of unweighted (u, v) pairs.

        edges(): Returns the (u, v, w) triples sorted by (u, v).

        degrees(): Returns the degree of every node.
    '''

    def __init__(self, n_nodes: int, edges=None):
        self.n_nodes = int(n_nodes)
        self._weights = {}
        for edge in edges or ():
            self.add(*edge)

    def add(self, u: int, v: int, w: float = 1.0):
        u, v = int(u), int(v)
        if u == v:
            raise StructureError('Self-loop on node %d' % u)
        if u > v:
            u, v = v, u
        if u < 0 or v >= self.n_nodes:
            raise BoundsError('Edge (%d, %d) out of range [0, %d)'
                              % (u, v, self.n_nodes))
        if (u, v) in self._weights:
            raise StructureError('Duplicate edge (%d, %d)' % (u, v))
        self._weights[(u, v)] = float(w)

    def discard(self, u: int, v: int):
        self._weights.pop((min(u, v), max(u, v)), None)

    def weight(self, u: int, v: int):
        return self._weights[(min(u, v), max(u, v))]

    def pairs(self):
        return set(self._weights)

    def edges(self):
        return [(u, v, w) for (u, v), w in sorted(self._weights.items())]

    def adjacency(self):
        '''
            Returns the symmetric 0/1 adjacency matrix (scipy CSR).
        '''

        from scipy.sparse import csr_matrix
        if not self._weights:
            return csr_matrix((self.n_nodes, self.n_nodes), dtype=np.float64)
        uv = np.array(list(self._weights), dtype=np.int64)
        rows = np.concatenate((uv[:, 0], uv[:, 1]))
        cols = np.concatenate((uv[:, 1], uv[:, 0]))
        return csr_matrix((np.ones(len(rows)), (rows, cols)),
                          shape=(self.n_nodes, self.n_nodes))

    def degrees(self):
        deg = np.zeros(self.n_nodes, dtype=np.int64)
        for u, v in self._weights:
            deg[u] += 1
            deg[v] += 1
        return deg

    def __len__(self):
        return len(self._weights)

    def __contains__(self, pair):
        u, v = pair
        return (min(u, v), max(u, v)) in self._weights

    def as_dict(self, flat: bool = False, _prefix: str = ''):
        d = super().as_dict(flat, _prefix)
        if flat and _prefix:
            _prefix += '_'
        d[_prefix + 'n_edges'] = len(self)
        return d


TraceStep = namedtuple('TraceStep', ('j', 'universe_size', 'node', 'gain'))


class ConstructionTrace(Model):
    '''
        Record of an exact TMFG build.

        Attributes:
        -----------
        clique: The 4 seed nodes, ascending.

        steps: List of TraceStep(j, universe_size, node, gain). j is the
        1-based position of the selected face among the active faces in
        birth order (|F| is the newest), universe_size is |F| before the
        insertion.
    '''

    def __init__(self, clique: list, steps: list = None):
        self.clique = sorted(int(v) for v in clique)
        self.steps = list(steps or [])

    def append(self, j: int, universe_size: int, node: int, gain: float):
        self.steps.append(TraceStep(int(j), int(universe_size), int(node),
                                    float(gain)))

    @property
    def n_nodes(self):
        return len(self.clique) + len(self.steps)

    def insertion_order(self):
        '''
            Returns the nodes in the order they joined the graph.
        '''

        return self.clique + [step.node for step in self.steps]

    def __len__(self):
        return len(self.steps)

    def as_dict(self, flat: bool = False, _prefix: str = ''):
        if flat and _prefix:
            _prefix += '_'
        return {_prefix + 'clique': list(self.clique),
                _prefix + 'n_steps': len(self.steps)}


class SparseKnnGraph(Model):
    '''
        Static kNN graph. Neighbor lists are sorted by weight (descending),
        ties by ascending node id, and stored in compressed sparse row layout.

        Attributes:
        -----------
        k: Neighborhood size.

        indptr: Row pointers (length n_nodes + 1).

        indices: Neighbor ids.

        weights: Neighbor correlations.
    '''

    def __init__(self, k: int, indptr, indices, weights):
        self.k = int(k)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=np.float64)

    @property
    def n_nodes(self):
        return len(self.indptr) - 1

    @property
    def n_entries(self):
        return len(self.indices)

    def neighbor_ids(self, i: int):
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def neighbor_weights(self, i: int):
        return self.weights[self.indptr[i]:self.indptr[i + 1]]

    def neighbors(self, i: int):
        return [(int(j), float(w)) for j, w in
                zip(self.neighbor_ids(i), self.neighbor_weights(i))]

    def degree(self, i: int):
        return int(self.indptr[i + 1] - self.indptr[i])

    def weight(self, i: int, j: int):
        '''
            Returns the weight of j in the list of i, or None.
        '''

        ids = self.neighbor_ids(i)
        hit = np.flatnonzero(ids == j)
        if len(hit):
            return float(self.neighbor_weights(i)[hit[0]])
        return None


class Face(Model):
    '''
        Triangle of the planar construction.

        Attributes:
        -----------
        face_id: Birth order, strictly increasing.

        vertices: Triple of node ids.

        centroid: Sum of the three vertex rows (float64), computed once.

        alive: False once covered by a node or pruned.

        exhausted: True when no local candidate is left.
    '''

    def __init__(self, face_id: int, vertices: tuple, rows):
        if len(set(vertices)) != 3:
            raise StructureError('Face vertices must be distinct: %s'
                                 % str(vertices))
        self.face_id = face_id
        self.vertices = tuple(int(v) for v in vertices)
        self.centroid = rows[list(self.vertices)].astype(np.float64).sum(
            axis=0)
        self.alive = True
        self.exhausted = False


class AtmfgConfig(Model):
    '''
        Parameters of the approximate builder.

        Attributes:
        -----------
        k: kNN neighborhood size (>= 3). Clipped to N - 1 at build time.

        universe_limit: Maximum number of active faces. None selects
        max(1000, ceil(0.3 N)); math.inf disables pruning.

        clique_size: Seed clique size (only 4 is supported).

        rescue_k: Neighbors requested per face centroid in a global rescue.

        seed: Root seed of the build (index construction).

        index_mode: auto, exact or approximate.

        max_degree, ef_construction, ef_search: Small-world index
        parameters. ef_search None means max(64, 2k) per query.

        exact_fallback: Row count at or below which auto mode is exact. None
        uses ATMFG_EXACT_FALLBACK.

        sketch_dim: Width of the sketch the index navigates for wider rows
        (0 indexes the full rows).

        seeding: profile (node with the largest correlation row-sum, grown
        greedily, as the exact builder does) or knn (strongest kNN
        neighborhood).
    '''

    def __init__(self, k: int = DEFAULT_K, universe_limit=None,
                 clique_size: int = DEFAULT_CLIQUE_SIZE,
                 rescue_k: int = DEFAULT_RESCUE_K, seed: int = 0,
                 index_mode: str = MODE_AUTO,
                 max_degree: int = DEFAULT_MAX_DEGREE,
                 ef_construction: int = DEFAULT_EF_CONSTRUCTION,
                 ef_search: int = None, exact_fallback: int = None,
                 sketch_dim: int = DEFAULT_SKETCH_DIM,
                 seeding: str = SEEDING_PROFILE):
        self.k = k
        self.universe_limit = universe_limit
        self.clique_size = clique_size
        self.rescue_k = rescue_k
        self.seed = seed
        self.index_mode = index_mode
        self.max_degree = max_degree
        self.ef_construction = ef_construction
        self.ef_search = ef_search
        self.exact_fallback = exact_fallback
        self.sketch_dim = sketch_dim
        self.seeding = seeding
        self.validate()

    def validate(self):
        if self.k < 3:
            raise ParameterError('k must be >= 3, got %s' % str(self.k))
        if self.clique_size != 4:
            raise ParameterError('Only tetrahedral seeding (clique size 4) '
                                 'is supported')
        if self.rescue_k < 1:
            raise ParameterError('rescue_k must be >= 1')
        if (self.universe_limit is not None
                and not isinf(self.universe_limit)
                and self.universe_limit < MIN_UNIVERSE_LIMIT):
            raise ParameterError('Universe limit must be >= %d'
                                 % MIN_UNIVERSE_LIMIT)
        if self.index_mode not in (MODE_AUTO, MODE_EXACT, MODE_APPROXIMATE):
            raise ParameterError('Unknown index mode %s' % self.index_mode)
        if self.max_degree < 2 or self.ef_construction < 1:
            raise ParameterError('Index parameters must be positive')
        if self.ef_search is not None and self.ef_search < 1:
            raise ParameterError('ef_search must be positive')
        if self.sketch_dim is not None and self.sketch_dim < 0:
            raise ParameterError('sketch_dim must be >= 0')
        if self.seeding not in (SEEDING_PROFILE, SEEDING_KNN):
            raise ParameterError('Unknown seeding %s' % self.seeding)

    def limit_for(self, n: int):
        '''
            Returns the universe limit for a build over n nodes.
        '''

        if self.universe_limit is None:
            return max(DEFAULT_UNIVERSE_FLOOR,
                       ceil(DEFAULT_UNIVERSE_FRACTION * n))
        if isinf(self.universe_limit):
            return inf
        return int(self.universe_limit)

    def as_dict(self, flat: bool = False, _prefix: str = ''):
        d = super().as_dict(flat, _prefix)
        if flat and _prefix:
            _prefix += '_'
        if self.universe_limit is not None and isinf(self.universe_limit):
            d[_prefix + 'universe_limit'] = 'inf'
        return d


class EngineStats(Model):
    '''
        Counters recorded by one approximate build.

        Attributes:
        -----------
        n, edges: Nodes and emitted edges.

        rescues: Global rescue rounds triggered.

        lazy_discards: Heap entries discarded at pop time.

        faces_pruned: Faces removed by the universe limit.

        peak_universe: Largest live-face count at the end of a step.

        wall_seconds: Build time, index construction included.

        faces_created, centroids_computed: Face creations and centroid
        computations (always equal).

        rescue_candidates: Candidates injected by all rescues.
    '''

    JSON_FIELDS = ('n', 'edges', 'rescues', 'lazy_discards', 'faces_pruned',
                   'peak_universe', 'wall_seconds')

    def __init__(self, n: int = 0):
        self.n = n
        self.edges = 0
        self.rescues = 0
        self.lazy_discards = 0
        self.faces_pruned = 0
        self.peak_universe = 0
        self.wall_seconds = 0.0
        self.faces_created = 0
        self.centroids_computed = 0
        self.rescue_candidates = 0

    def as_json(self):
        '''
            Returns the fixed-field JSON document of the stats.
        '''

        return {field: getattr(self, field) for field in self.JSON_FIELDS}


class FactorModelParams(Model):
    '''
        Parameters of the 1-factor Gaussian mixture.

        Attributes:
        -----------
        n: Number of nodes.

        n_clusters: Number of factors K.

        loading: Factor loading g_s in (0, 1), scalar or one per cluster.

        n_samples: Length T of every row.

        seed: Generator seed.
    '''

    def __init__(self, n: int, n_clusters: int, loading=0.5,
                 n_samples: int = DEFAULT_SAMPLES, seed: int = 0):
        self.n = n
        self.n_clusters = n_clusters
        self.loading = loading
        self.n_samples = n_samples
        self.seed = seed
        self.validate()

    def loadings(self):
        g = np.broadcast_to(np.asarray(self.loading, dtype=np.float64),
                            (self.n_clusters,))
        return np.array(g)

    def validate(self):
        if self.n < 1 or self.n_clusters < 1:
            raise ParameterError('n and K must be positive')
        if self.n_clusters > self.n:
            raise ParameterError('K (%d) must not exceed n (%d)'
                                 % (self.n_clusters, self.n))
        if self.n_samples < 2:
            raise ParameterError('At least 2 samples are required')
        try:
            g = self.loadings()
        except ValueError:
            raise ParameterError('One loading per cluster is required')
        if np.any(g <= 0) or np.any(g >= 1):
            raise ParameterError('Loadings must lie in (0, 1)')

    def as_dict(self, flat: bool = False, _prefix: str = ''):
        d = super().as_dict(flat, _prefix)
        if flat and _prefix:
            _prefix += '_'
        d[_prefix + 'loading'] = self.loadings().tolist()
        return d


class GmrfParams(Model):
    '''
        Parameters of the GMRF sampler.

        Attributes:
        -----------
        adjacency: Sparse symmetric 0/1 matrix with zero diagonal.

        alpha: Coupling strength (>= 0).

        n_samples: Number of samples T.

        seed: Generator seed.
    '''

    def __init__(self, adjacency, alpha: float, n_samples: int =
                 DEFAULT_SAMPLES, seed: int = 0):
        from scipy.sparse import csr_matrix
        self._adjacency = csr_matrix(adjacency, dtype=np.float64)
        self.alpha = float(alpha)
        self.n_samples = n_samples
        self.seed = seed
        self.validate()

    @property
    def adjacency(self):
        return self._adjacency

    @property
    def n(self):
        return self._adjacency.shape[0]

    def validate(self):
        a = self._adjacency
        if a.shape[0] != a.shape[1]:
            raise StructureError('Adjacency must be square')
        if (a != a.T).nnz:
            raise StructureError('Adjacency must be symmetric')
        if np.any(a.diagonal() != 0):
            raise StructureError('Adjacency must have a zero diagonal')
        if self.alpha < 0:
            raise ParameterError('alpha must be >= 0')
        if self.n_samples < 2:
            raise ParameterError('At least 2 samples are required')

    def as_dict(self, flat: bool = False, _prefix: str = ''):
        d = super().as_dict(flat, _prefix)
        if flat and _prefix:
            _prefix += '_'
        d[_prefix + 'n'] = self.n
        d[_prefix + 'n_edges'] = int(self._adjacency.nnz // 2)
        return d


class Partition(Model):
    '''
        Assignment of nodes to clusters.

        Attributes:
        -----------
        labels: Cluster id of every node; ids are contiguous from 0.

        Methods:
        --------
        sizes(): Returns |C_k| for every cluster.

        members(k): Returns the node ids of cluster k.
    '''

    def __init__(self, labels):
        labels = np.asarray(labels)
        if labels.ndim != 1 or len(labels) == 0:
            raise ParameterError('Labels must be a non-empty 1-D sequence')
        if not np.issubdtype(labels.dtype, np.integer):
            raise ParameterError('Labels must be integers')
        if labels.min() < 0 or len(np.unique(labels)) != labels.max() + 1:
            raise ParameterError('Cluster ids must be contiguous from 0')
        self.labels = labels.astype(np.int64)

    @property
    def n_nodes(self):
        return len(self.labels)

    @property
    def n_clusters(self):
        return int(self.labels.max()) + 1

    def sizes(self):
        return np.bincount(self.labels, minlength=self.n_clusters)

    def members(self, k: int):
        return np.flatnonzero(self.labels == k)


class ValidationReport(Model):
    '''
        Pass/fail per structural check of a TMFG build.

        Attributes:
        -----------
        checks: Dict of check name -> bool.

        details: Dict of check name -> message for failed checks.
    '''

    def __init__(self):
        self.checks = {}
        self.details = {}

    def record(self, name: str, ok: bool, detail: str = ''):
        self.checks[name] = bool(ok)
        if not ok and detail:
            self.details[name] = detail

    @property
    def passed(self):
        return all(self.checks.values())


class AuditReport(Model):
    '''
        Structural summary of an edge list.

        Attributes:
        -----------
        n_nodes, edges: Node and edge counts.

        expected_edges: 3N - 6 (maximal planar edge count).

        components: Number of connected components.

        min_deg, max_deg: Degree range.

        degree_histogram: Dict of degree -> node count.
    '''

    def __init__(self, n_nodes: int, edges: int, components: int,
                 degrees):
        degrees = np.asarray(degrees)
        self.n_nodes = n_nodes
        self.edges = edges
        self.expected_edges = 3 * n_nodes - 6
        self.components = components
        self.min_deg = int(degrees.min()) if len(degrees) else 0
        self.max_deg = int(degrees.max()) if len(degrees) else 0
        values, counts = np.unique(degrees, return_counts=True)
        self.degree_histogram = {int(v): int(c)
                                 for v, c in zip(values, counts)}

    @property
    def maximal_planar_count(self):
        return self.edges == self.expected_edges
