'''
    Nearest-neighbor index over the rows of a normalized DataMatrix with
    soft deletion. Similarity is the inner product divided by D, i.e. the
    Pearson correlation of the rows. Large inputs are indexed with an HNSW
    graph (hnswlib, inner-product space, rows scaled to unit norm); small
    inputs, or any input in exact mode, are served by a brute-force scan
    whose results are the true top-k with ties broken by ascending id.

    Wide rows (D above sketch_dim) are navigated through a Gaussian sketch
    of sketch_dim columns: the HNSW graph returns an over-fetched candidate
    list and every candidate is reranked against the full rows, so reported
    similarities are always exact.

    Classes:
    --------
    AnnIndex: The index.

    Methods:
    --------
    build_index(m, **params): Build an AnnIndex over m.

    query(idx, vector, k): Top-k live rows for vector.

    batch_query(idx, vectors, k): query() for every vector.

    mark_deleted(idx, id): Exclude id from all later results.

    export_knn_graph(idx, m, k): Static kNN graph of all rows.
'''


from math import sqrt

import numpy as np
from numpy.random import default_rng
import hnswlib

from model import DataMatrix, SparseKnnGraph
from exception import (DimensionError, BoundsError, EmptyInputError,
                       IndexStateError, ParameterError)
from consts import (MODE_AUTO, MODE_EXACT, MODE_APPROXIMATE,
                    DEFAULT_MAX_DEGREE, DEFAULT_EF_CONSTRUCTION,
                    DEFAULT_EF_SEARCH_FLOOR, DEFAULT_SKETCH_DIM,
                    MIN_OVERFETCH)
from settings import EXACT_FALLBACK
from utils import workers, derive_seed
from logger import console, file


# rows per block when exporting the kNN graph; float64 cells held by one
# block of similarities (block x N for a scan, block x k x D for a rerank)
EXPORT_CHUNK = 1024
EXPORT_CELLS = 1 << 24

# rows projected per block when sketching
SKETCH_CHUNK = 4096


class AnnIndex:
    '''
        Nearest-neighbor index with soft deletion.

        Attributes:
        -----------
        mode: exact or approximate (resolved from auto by
        exact_fallback: exact when N <= exact_fallback).

        max_degree, ef_construction: HNSW build parameters (M and
        efConstruction).

        ef_search: HNSW query breadth. None means max(64, 2k) per query;
        it is never lower than k.

        deleted: Boolean mask over node ids.

        rng_seed: Seed of the HNSW level generator and of the sketch.

        sketch_dim: Width of the sketch navigated by the HNSW graph when D
        is larger (0 or None indexes the full rows).

        Methods:
        --------
        query(vector, k): Returns up to k (node id, similarity) pairs of live
        rows, by descending similarity then ascending id.

        batch_query(vectors, k): query() for every vector, in input order.

        mark_deleted(id): Exclude id from all later results (idempotent).

        export_knn_graph(k): Returns the kNN graph of all rows (only before
        any deletion).
    '''

    def __init__(self, m: DataMatrix, mode: str = MODE_AUTO,
                 max_degree: int = DEFAULT_MAX_DEGREE,
                 ef_construction: int = DEFAULT_EF_CONSTRUCTION,
                 ef_search: int = None, rng_seed: int = 0,
                 exact_fallback: int = None, threads: int = None,
                 sketch_dim: int = DEFAULT_SKETCH_DIM):
        if m.n_rows == 0:
            raise EmptyInputError('Cannot index an empty matrix')
        if not m.normalized:
            raise ParameterError('The index requires a normalized matrix')
        if mode not in (MODE_AUTO, MODE_EXACT, MODE_APPROXIMATE):
            raise ParameterError('Unknown index mode %s' % mode)
        if sketch_dim is not None and sketch_dim < 0:
            raise ParameterError('sketch_dim must be >= 0')
        if exact_fallback is None:
            exact_fallback = EXACT_FALLBACK
        if mode == MODE_AUTO:
            mode = MODE_EXACT if m.n_rows <= exact_fallback else \
                MODE_APPROXIMATE

        self.mode = mode
        self.max_degree = max_degree
        self.ef_construction = ef_construction
        self.ef_search = ef_search
        self.rng_seed = rng_seed
        self.sketch_dim = sketch_dim or 0
        self.deleted = np.zeros(m.n_rows, dtype=bool)

        self._rows = m.values
        self._n, self._d = m.values.shape
        self._live = self._n
        self._scale = 1 / sqrt(self._d)
        self._threads = workers(threads)
        self._hnsw = None
        self._projection = None

        if mode == MODE_APPROXIMATE:
            if 0 < self.sketch_dim < self._d:
                self._projection = default_rng(
                    derive_seed(rng_seed, self.sketch_dim)).standard_normal(
                    (self._d, self.sketch_dim))
            self._build_hnsw()
        file.info('Built %s index over %d rows (navigation width %d)', mode,
                  self._n, self._width)

    @property
    def n_live(self):
        return self._live

    @property
    def sketched(self):
        return self._projection is not None

    def query(self, vector, k: int):
        vector = np.asarray(vector, dtype=np.float64)
        if vector.ndim != 1 or vector.shape[0] != self._d:
            raise DimensionError('Query must be a single vector of length %d'
                                 % self._d)
        return self.batch_query(vector[None, :], k)[0]

    def batch_query(self, vectors, k: int):
        if k < 1:
            raise ParameterError('k must be >= 1')
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.size == 0:
            return []
        if vectors.ndim != 2 or vectors.shape[1] != self._d:
            raise DimensionError('Query vectors must have length %d'
                                 % self._d)
        if self._live == 0:
            return [[] for _ in range(len(vectors))]
        k = min(k, self._live)
        if self.mode == MODE_EXACT:
            return self._scan(vectors, k)
        return self._search(vectors, k)

    def mark_deleted(self, id: int):
        if id < 0 or id >= self._n:
            raise BoundsError('Node %d out of range [0, %d)' % (id, self._n))
        if self.deleted[id]:
            return
        self.deleted[id] = True
        self._live -= 1
        if self._hnsw is not None:
            self._hnsw.mark_deleted(int(id))

    def export_knn_graph(self, k: int):
        if k >= self._n:
            raise ParameterError('k (%d) must be < N (%d)' % (k, self._n))
        if k < 1:
            raise ParameterError('k must be >= 1')
        if self.deleted.any():
            raise IndexStateError('The kNN graph must be exported before '
                                  'any deletion')
        indptr = np.arange(0, self._n * k + 1, k, dtype=np.int64)
        indices = np.empty(self._n * k, dtype=np.int64)
        weights = np.empty(self._n * k, dtype=np.float64)
        chunk = EXPORT_CHUNK
        if self.mode == MODE_EXACT:
            chunk = max(1, min(chunk, EXPORT_CELLS // self._n))
        fetch = min(self._n, self._fetch(k) + 1)
        for start in range(0, self._n, chunk):
            stop = min(start + chunk, self._n)
            rows = np.arange(start, stop)
            if self.mode == MODE_EXACT:
                cand = np.broadcast_to(np.arange(self._n),
                                       (len(rows), self._n))
            else:
                cand = self._hnsw_labels(rows, k + 1, fetch)
            ids, sims = self._rank_rows(rows, cand, k)
            indices[start * k:stop * k] = ids.ravel()
            weights[start * k:stop * k] = sims.ravel()
        file.info('Exported kNN graph with k=%d (%d entries)', k,
                  len(indices))
        return SparseKnnGraph(k, indptr, indices, weights)

    # the following methods are internal

    @property
    def _width(self):
        return self.sketch_dim if self.sketched else self._d

    def _fetch(self, k: int):
        # candidates reranked per query
        if not self.sketched:
            return k
        return max(2 * k, k + MIN_OVERFETCH)

    def _navigation(self, vectors):
        # float32 coordinates in the space the HNSW graph was built on
        out = np.empty((len(vectors), self._width), dtype=np.float32)
        for start in range(0, len(vectors), SKETCH_CHUNK):
            block = np.asarray(vectors[start:start + SKETCH_CHUNK],
                               dtype=np.float64)
            if self.sketched:
                block = block @ self._projection
            else:
                block = block * self._scale
            out[start:start + SKETCH_CHUNK] = block
        return out

    def _build_hnsw(self):
        self._hnsw = hnswlib.Index(space='ip', dim=self._width)
        self._hnsw.init_index(max_elements=self._n,
                              ef_construction=self.ef_construction,
                              M=self.max_degree, random_seed=self.rng_seed)
        points = self._navigation(self._rows)
        if self.sketched:
            norms = np.linalg.norm(points, axis=1, keepdims=True)
            points /= np.where(norms > 0, norms, 1)
        # one insertion thread keeps the graph identical for a fixed seed
        self._hnsw.set_num_threads(1)
        self._hnsw.add_items(points, np.arange(self._n))
        self._hnsw.set_num_threads(self._threads)

    def _similarities(self, vectors, ids):
        # float64 dot / D of every vector against its own id list, gathered
        # in blocks of at most EXPORT_CELLS values
        sims = np.empty(ids.shape, dtype=np.float64)
        step = max(1, EXPORT_CELLS // max(1, ids.shape[1] * self._d))
        for start in range(0, len(ids), step):
            stop = start + step
            rows = self._rows[ids[start:stop]].astype(np.float64)
            sims[start:stop] = np.matmul(rows,
                                         vectors[start:stop, :, None])[..., 0]
        return sims / self._d

    def _scan(self, vectors, k: int):
        live = np.flatnonzero(~self.deleted)
        rows = self._rows[live].astype(np.float64).T
        step = max(1, EXPORT_CELLS // len(live))
        found = []
        for start in range(0, len(vectors), step):
            sims = (vectors[start:start + step] @ rows) / self._d
            found.extend(self._top(live, s, k) for s in sims)
        return found

    def _search(self, vectors, k: int):
        fetch = min(self._fetch(k), self._live)
        ef = self.ef_search or max(DEFAULT_EF_SEARCH_FLOOR, 2 * k)
        self._hnsw.set_ef(max(ef, fetch))
        try:
            labels, _ = self._hnsw.knn_query(self._navigation(vectors),
                                             k=fetch)
        except RuntimeError:
            # too many deletions for ef: serve the batch by full scan
            console.info('HNSW query could not return %d live neighbors, '
                         'falling back to a scan', fetch)
            file.info('HNSW fallback scan (k=%d, live=%d)', fetch, self._live)
            return self._scan(vectors, k)
        labels = labels.astype(np.int64)
        sims = self._similarities(vectors, labels)
        return [self._top(ids, s, k) for ids, s in zip(labels, sims)]

    def _hnsw_labels(self, rows, k: int, fetch: int):
        self._hnsw.set_ef(max(self.ef_search or 0, DEFAULT_EF_SEARCH_FLOOR,
                              2 * k, fetch))
        try:
            labels, _ = self._hnsw.knn_query(self._navigation(
                self._rows[rows]), k=fetch)
        except RuntimeError:
            return np.broadcast_to(np.arange(self._n), (len(rows), self._n))
        return labels.astype(np.int64)

    def _rank_rows(self, rows, cand, k: int):
        ids = np.empty((len(rows), k), dtype=np.int64)
        sims = np.empty((len(rows), k), dtype=np.float64)
        vectors = self._rows[rows].astype(np.float64)
        if cand.shape[1] == self._n:
            full = (vectors @ self._rows.astype(np.float64).T) / self._d
            scores = np.take_along_axis(full, cand, axis=1)
        else:
            scores = self._similarities(vectors, cand)
        for r, row in enumerate(rows):
            keep = cand[r] != row
            top = self._top(cand[r][keep], scores[r][keep], k)
            if len(top) < k:
                raise IndexStateError('Row %d has fewer than %d neighbors'
                                      % (row, k))
            ids[r] = [i for i, _ in top]
            sims[r] = [s for _, s in top]
        return ids, np.clip(sims, -1.0, 1.0)

    @staticmethod
    def _top(ids, sims, k: int):
        if len(ids) == 0:
            return []
        k = min(k, len(ids))
        if k < len(ids):
            kth = np.partition(sims, len(sims) - k)[len(sims) - k]
            cand = np.flatnonzero(sims >= kth)
        else:
            cand = np.arange(len(ids))
        order = cand[np.lexsort((ids[cand], -sims[cand]))][:k]
        return [(int(ids[i]), float(sims[i])) for i in order]


def build_index(m: DataMatrix, **params):
    '''
        Build an AnnIndex over m (see AnnIndex for the parameters).
    '''

    return AnnIndex(m, **params)


def query(idx: AnnIndex, vector, k: int):
    return idx.query(vector, k)


def batch_query(idx: AnnIndex, vectors, k: int):
    return idx.batch_query(vectors, k)


def mark_deleted(idx: AnnIndex, id: int):
    idx.mark_deleted(id)


def export_knn_graph(idx: AnnIndex, m: DataMatrix, k: int):
    if m.n_rows != idx.deleted.shape[0]:
        raise DimensionError('Matrix and index sizes differ')
    return idx.export_knn_graph(k)
