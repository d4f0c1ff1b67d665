'''
    Synthetic data with a known structure: the 1-factor Gaussian mixture
    (block correlation), random maximal planar ground-truth graphs and the
    GMRF sampler Y = (I + (alpha / 2) A) X, whose columns have covariance
    I + alpha A + (alpha^2 / 4) A^2.

    Every generator is a pure function of its parameters and seed.

    Methods:
    --------
    gen_factor_model(p): Returns (DataMatrix, Partition).

    gen_planar_ground_truth(n, seed): Random Apollonian network (EdgeList).

    gen_gmrf(p): Returns the DataMatrix of n x T GMRF samples.

    gmrf_covariance(adjacency, alpha): Analytic covariance of gen_gmrf.

    adjacency_from_edges(e): Sparse 0/1 adjacency of an EdgeList.
'''


from math import ceil

import numpy as np
from numpy.random import default_rng
from scipy.sparse import identity, csr_matrix

from model import (DataMatrix, EdgeList, Partition, FactorModelParams,
                   GmrfParams)
from exception import SizeError
from consts import ALPHA_WARNING
from logger import console, file


def gen_factor_model(p: FactorModelParams):
    '''
        Rows X_i = g_s eta_s + sqrt(1 - g_s^2) eps_i, with one standard
        normal path eta_s per cluster and independent noise eps_i. Clusters
        are contiguous blocks of ceil(n / K) nodes.
    '''

    p.validate()
    rng = default_rng(p.seed)
    block = ceil(p.n / p.n_clusters)
    labels = np.arange(p.n) // block
    if labels[-1] + 1 < p.n_clusters:
        console.warning('Blocks of %d nodes only fill %d of %d clusters',
                        block, labels[-1] + 1, p.n_clusters)

    g = p.loadings()[labels][:, None]
    eta = rng.standard_normal((p.n_clusters, p.n_samples))
    eps = rng.standard_normal((p.n, p.n_samples))
    x = g * eta[labels] + np.sqrt(1 - g ** 2) * eps
    file.info('Generated factor data: %s', str(p.as_dict()))
    return DataMatrix(x.astype(np.float32)), Partition(labels)


def gen_planar_ground_truth(n: int, seed: int = 0):
    '''
        Random Apollonian network: K4 over nodes 0..3, then node t (t >= 4)
        is attached to a uniformly random face, which is replaced by its
        three subdivisions. All weights are 1.
    '''

    if n < 4:
        raise SizeError('A maximal planar graph needs n >= 4, got %d' % n)
    rng = default_rng(seed)
    e = EdgeList(n)
    for u in range(4):
        for v in range(u + 1, 4):
            e.add(u, v)
    faces = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
    for v in range(4, n):
        i = int(rng.integers(len(faces)))
        a, b, c = faces[i]
        faces[i] = faces[-1]
        faces.pop()
        e.add(a, v)
        e.add(b, v)
        e.add(c, v)
        faces.extend(((v, b, c), (a, v, c), (a, b, v)))
    return e


def gen_gmrf(p: GmrfParams):
    '''
        Draws X (n x T standard normal) and returns Y = X + (alpha / 2) A X,
        computed with the sparse adjacency.
    '''

    p.validate()
    if p.alpha > ALPHA_WARNING:
        console.warning('alpha=%.3f is above %.1f: 2-hop terms dominate',
                        p.alpha, ALPHA_WARNING)
        file.warning('GMRF alpha %.3f above 2-hop threshold', p.alpha)
    rng = default_rng(p.seed)
    x = rng.standard_normal((p.n, p.n_samples))
    y = x + (p.alpha / 2) * (p.adjacency @ x)
    file.info('Generated GMRF data: %s', str(p.as_dict()))
    return DataMatrix(np.asarray(y, dtype=np.float32))


def gmrf_covariance(adjacency, alpha: float):
    '''
        Returns I + alpha A + (alpha^2 / 4) A^2 as a dense array.
    '''

    a = csr_matrix(adjacency, dtype=np.float64)
    eye = identity(a.shape[0], dtype=np.float64, format='csr')
    return (eye + alpha * a + (alpha ** 2 / 4) * (a @ a)).toarray()


def adjacency_from_edges(e: EdgeList):
    return e.adjacency()
