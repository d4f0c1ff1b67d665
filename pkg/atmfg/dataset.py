'''
    Ingestion and normalization of feature matrices. Once rows are
    z-normalized with the population standard deviation, the Pearson
    correlation of two rows is their inner product divided by D.

    Methods:
    --------
    load_matrix(path, fmt, dtype): Read an unnormalized DataMatrix.

    znormalize(m): Returns the row-wise z-normalized copy of m.

    correlation(m, i, j): Correlation of rows i and j of a normalized m.

    correlation_matrix(m): Dense N x N correlation matrix of a normalized m.
'''


import numpy as np

from iolib import read_matrix
from model import DataMatrix
from exception import BoundsError, ParameterError
from consts import DENSE_FLOAT64_LIMIT
from logger import console, file


# relative tolerance under which a row counts as constant
DEGENERATE_RTOL = 1e-12


def load_matrix(path: str, fmt: str = None, dtype=np.float32):
    '''
        Read a DataMatrix from a CSV or binary matrix file (see iolib).
    '''

    return read_matrix(path, fmt, dtype)


def znormalize(m: DataMatrix):
    '''
        Returns a normalized copy of m: every row becomes (x - mean) / std
        with the population std. Constant rows become all zeros and are
        listed in the degenerate attribute. The output keeps the floating
        point type of m. An already normalized matrix is returned as is.
    '''

    if m.normalized:
        return m
    x = m.values.astype(np.float64)
    mean = x.mean(axis=1, keepdims=True)
    std = x.std(axis=1, keepdims=True)
    degenerate = np.flatnonzero(
        std[:, 0] <= DEGENERATE_RTOL * np.maximum(1.0, np.abs(mean[:, 0])))
    std[degenerate] = 1.0
    z = (x - mean) / std
    z[degenerate] = 0.0
    if len(degenerate):
        console.warning('%d constant row(s) mapped to zero vectors',
                        len(degenerate))
        file.warning('Degenerate rows: %s', str(degenerate[:50].tolist()))
    values = z.astype(m.values.dtype)
    values.setflags(write=False)
    return DataMatrix(values, normalized=True,
                      degenerate=degenerate.tolist())


def correlation(m: DataMatrix, i: int, j: int):
    '''
        Returns dot(row_i, row_j) / D on a normalized matrix, accumulated in
        float64 and clipped to [-1, 1]. Degenerate rows give 0.
    '''

    if not m.normalized:
        raise ParameterError('Correlation requires a normalized matrix')
    for node in (i, j):
        if node < 0 or node >= m.n_rows:
            raise BoundsError('Node %d out of range [0, %d)'
                              % (node, m.n_rows))
    c = np.dot(m.values[i].astype(np.float64),
               m.values[j].astype(np.float64)) / m.n_cols
    return float(np.clip(c, -1.0, 1.0))


def correlation_matrix(m: DataMatrix):
    '''
        Returns the dense correlation matrix of a normalized matrix. float64
        up to DENSE_FLOAT64_LIMIT rows, float32 beyond (memory bound).
    '''

    if not m.normalized:
        raise ParameterError('Correlation requires a normalized matrix')
    dtype = np.float64 if m.n_rows <= DENSE_FLOAT64_LIMIT else np.float32
    x = m.values.astype(dtype)
    c = x @ x.T
    c /= m.n_cols
    return c
