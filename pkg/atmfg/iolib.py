'''
    General purpose library for file operations, providing methods that
    serve as a facade to hide the details of every on-disk format used by
    the toolkit.

    Methods:
    --------
    read_matrix(path, fmt, dtype): Read a DataMatrix from a CSV or binary
    matrix file.

    write_matrix(m, path, fmt): Write a DataMatrix as CSV or binary.

    read_edgelist(path, n_nodes): Read a TSV edge list.

    write_edgelist(e, path): Write an EdgeList as sorted TSV.

    write_trace(trace, path): Write a ConstructionTrace as CSV.

    write_histogram(rows, path): Write (bin, count) rows as CSV.

    write_insertions(insertions, path): Write an a-TMFG expansion log.

    write_table(df, path): Write a DataFrame as CSV.

    read_labels(path): Read newline-delimited cluster labels.

    write_labels(labels, path): Write cluster labels.

    write_json(doc, path): Write a JSON document.

    write_manifest(path, command, params): Write a run manifest.
'''


from re import search
from json import dump
from os import makedirs
from os.path import dirname, splitext, abspath

import numpy as np
from pandas import read_csv, to_numeric, DataFrame
from pandas.errors import ParserError, EmptyDataError

from model import DataMatrix, EdgeList, Partition
from exception import AtmfgError, ParseError
from consts import (MATRIX_MAGIC, MATRIX_VERSION, FORMAT_CSV, FORMAT_BINARY,
                    BINARY_SUFFIXES, WEIGHT_DECIMALS)
from logger import console, file


# binary matrix header: magic, version (u32 LE), N (u64 LE), D (u64 LE)
HEADER = np.dtype([('magic', 'S4'), ('version', '<u4'), ('n', '<u8'),
                   ('d', '<u8')])


# ====================
#     MAIN METHODS
# ====================


def infer_format(path: str):
    '''
        Returns the matrix format implied by the file suffix.
    '''

    if splitext(path)[1].lower() in BINARY_SUFFIXES:
        return FORMAT_BINARY
    return FORMAT_CSV


def read_matrix(path: str, fmt: str = None, dtype=np.float32):
    '''
        Read a DataMatrix from path. fmt is csv or binary (inferred from the
        suffix if None). The matrix is returned unnormalized.

        Raises ParseError on malformed files, DimensionError if the matrix
        has fewer than 2 columns.
    '''

    fmt = fmt or infer_format(path)
    if fmt == FORMAT_BINARY:
        values = _read_binary(path)
    elif fmt == FORMAT_CSV:
        values = _read_csv(path)
    else:
        raise ParseError('Unknown matrix format %s' % fmt)
    m = DataMatrix(values.astype(dtype, copy=False))
    file.info('Read %d x %d matrix from %s', m.n_rows, m.n_cols, path)
    return m


def write_matrix(m: DataMatrix, path: str, fmt: str = None):
    '''
        Write m to path as csv or binary (inferred from the suffix if None).
    '''

    fmt = fmt or infer_format(path)
    _makedirs(path)
    if fmt == FORMAT_BINARY:
        header = np.zeros(1, dtype=HEADER)
        header['magic'] = MATRIX_MAGIC
        header['version'] = MATRIX_VERSION
        header['n'] = m.n_rows
        header['d'] = m.n_cols
        with open(path, 'wb') as f:
            f.write(header.tobytes())
            f.write(np.ascontiguousarray(m.values, dtype='<f4').tobytes())
    else:
        DataFrame(m.values).to_csv(path, header=False, index=False,
                                   float_format='%.9g')
    file.info('Wrote %d x %d matrix to %s', m.n_rows, m.n_cols, path)


def read_edgelist(path: str, n_nodes: int = None):
    '''
        Read a TSV edge list (u<TAB>v<TAB>w). If n_nodes is None it is taken
        as the largest node id + 1.
    '''

    try:
        df = read_csv(path, sep='\t', header=None, names=('u', 'v', 'w'),
                      dtype={'u': np.int64, 'v': np.int64, 'w': np.float64})
    except EmptyDataError:
        df = DataFrame({'u': [], 'v': [], 'w': []})
    except (ParserError, ValueError) as e:
        raise ParseError('Malformed edge list %s: %s' % (path, str(e)),
                         line=_line_of(e))
    if df.isna().to_numpy().any():
        line = int(np.flatnonzero(df.isna().any(axis=1).to_numpy())[0]) + 1
        raise ParseError('Missing field in edge list %s' % path, line=line)
    if n_nodes is None:
        n_nodes = int(max(df['u'].max(), df['v'].max())) + 1 if len(df) else 0
    e = EdgeList(n_nodes)
    for line, (u, v, w) in enumerate(zip(df['u'], df['v'], df['w']), 1):
        try:
            e.add(u, v, w)
        except AtmfgError as err:
            raise ParseError(str(err), line=line)
    return e


def write_edgelist(e: EdgeList, path: str):
    '''
        Write e as TSV lines u<TAB>v<TAB>w, u < v, sorted by (u, v), weights
        with 6 decimals.
    '''

    _makedirs(path)
    fmt = '%d\t%d\t%.' + str(WEIGHT_DECIMALS) + 'f\n'
    with open(path, 'w') as f:
        for u, v, w in e.edges():
            f.write(fmt % (u, v, w))
    file.info('Wrote %d edges to %s', len(e), path)


def write_trace(trace, path: str):
    '''
        Write a ConstructionTrace as CSV with columns
        step,j,universe_size,node,gain.
    '''

    _makedirs(path)
    df = DataFrame(trace.steps, columns=('j', 'universe_size', 'node',
                                         'gain'))
    df.insert(0, 'step', range(len(df)))
    df.to_csv(path, index=False)


def write_histogram(rows: list, path: str, columns=('bin', 'count')):
    '''
        Write (bin, count) rows as CSV.
    '''

    _makedirs(path)
    DataFrame(rows, columns=columns).to_csv(path, index=False)


def write_insertions(insertions: list, path: str):
    '''
        Write the expansion log of an a-TMFG build as CSV with columns
        step,face_a,face_b,face_c,node,gain.
    '''

    _makedirs(path)
    rows = [(step, *vertices, node, gain)
            for step, (vertices, node, gain) in enumerate(insertions)]
    DataFrame(rows, columns=('step', 'face_a', 'face_b', 'face_c', 'node',
                             'gain')).to_csv(path, index=False)


def write_table(df: DataFrame, path: str):
    _makedirs(path)
    df.to_csv(path, index=False)
    file.info('Wrote %d rows to %s', len(df), path)


def read_labels(path: str):
    '''
        Read newline-delimited integer labels into a Partition.
    '''

    try:
        df = read_csv(path, header=None, dtype=np.int64)
    except (ParserError, EmptyDataError, ValueError) as e:
        raise ParseError('Malformed labels file %s: %s' % (path, str(e)),
                         line=_line_of(e))
    return Partition(df.iloc[:, 0].to_numpy())


def write_labels(labels, path: str):
    _makedirs(path)
    np.savetxt(path, np.asarray(labels, dtype=np.int64), fmt='%d')


def write_json(doc: dict, path: str):
    _makedirs(path)
    with open(path, 'w') as f:
        dump(doc, f, indent=2, default=_jsonable)
        f.write('\n')


def write_manifest(path: str, command: str, params: dict):
    '''
        Write the manifest of a run: the command, every resolved parameter
        and seed, the environment settings and runtime versions.
    '''

    from settings import as_dict as settings_dict
    from utils import runtime_info, rss_mb
    write_json({'command': command, 'params': params,
                'settings': settings_dict(), 'runtime': runtime_info(),
                'rss_mb': round(rss_mb(), 1)}, path)
    console.info('Manifest written to %s', path)


# ====================
#    OTHER METHODS
# ====================


def _read_binary(path: str):
    with open(path, 'rb') as f:
        raw = f.read()
    if len(raw) < HEADER.itemsize:
        raise ParseError('Truncated header in %s' % path, offset=len(raw))
    header = np.frombuffer(raw, dtype=HEADER, count=1)[0]
    if header['magic'] != MATRIX_MAGIC:
        raise ParseError('Bad magic bytes in %s' % path, offset=0)
    if header['version'] != MATRIX_VERSION:
        raise ParseError('Unsupported version %d in %s'
                         % (header['version'], path), offset=4)
    n, d = int(header['n']), int(header['d'])
    expected = HEADER.itemsize + 4 * n * d
    if len(raw) != expected:
        raise ParseError('Expected %d bytes for a %d x %d matrix in %s, '
                         'found %d' % (expected, n, d, path, len(raw)),
                         offset=min(len(raw), expected))
    return np.frombuffer(raw, dtype='<f4', count=n * d,
                         offset=HEADER.itemsize).reshape(n, d)


def _read_csv(path: str):
    with open(path, 'r') as f:
        first = f.readline()
    if not first.strip():
        raise ParseError('Empty matrix file %s' % path, line=1)
    has_header = not _is_numeric_line(first)
    try:
        df = read_csv(path, header=0 if has_header else None, dtype=str,
                      keep_default_na=False, skip_blank_lines=False)
    except EmptyDataError:
        raise ParseError('No data rows in %s' % path,
                         line=2 if has_header else 1)
    except ParserError as e:
        raise ParseError('Malformed CSV %s: %s' % (path, str(e)),
                         line=_line_of(e))
    # blank lines are errors only between data rows
    blank = df.apply(lambda col: col.fillna('').str.strip() == '').all(
        axis=1).to_numpy()
    filled = np.flatnonzero(~blank)
    df = df.iloc[:filled[-1] + 1 if len(filled) else 0]
    if len(df) == 0:
        raise ParseError('No data rows in %s' % path,
                         line=2 if has_header else 1)
    values = df.apply(lambda col: to_numeric(col.str.strip(),
                                             errors='coerce'))
    bad = values.isna().any(axis=1).to_numpy()
    if bad.any():
        line = int(np.flatnonzero(bad)[0]) + 1 + int(has_header)
        raise ParseError('Missing or non-numeric field in %s' % path,
                         line=line)
    return values.to_numpy(dtype=np.float64)


def _is_numeric_line(line: str):
    try:
        [float(field) for field in line.strip().split(',')]
        return True
    except ValueError:
        return False


def _line_of(e: Exception):
    found = search(r'line (\d+)', str(e))
    return int(found.group(1)) if found else None


def _makedirs(path: str):
    folder = dirname(abspath(path))
    makedirs(folder, exist_ok=True)


def _jsonable(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, tuple)):
        return list(obj)
    raise TypeError('Object of type %s is not JSON serializable'
                    % obj.__class__.__name__)
