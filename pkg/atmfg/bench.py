'''
    Benchmark presets. Each preset expands into a grid of cells; every cell
    generates a random planar ground truth and GMRF data over it, builds the
    graph and scores it against the truth. Cells are independent and run in
    parallel worker slots (one slot for the runtime preset, so timings are
    not disturbed); rows are sorted before they are returned.

    Presets:
    --------
    alpha-heatmap: sizes x alphas, a-TMFG with the default configuration.

    k-sweep: sizes x ks (clipped to N - 1) at a fixed alpha.

    universe-sweep: sizes x universe limits, plus an unbounded row.

    runtime: sizes with k=50 and U=0.3N, and the exact baseline while N is
    within the exact size guard.

    Methods:
    --------
    run_bench(preset, **grid): Returns a DataFrame with the columns of
    COLUMNS.
'''


from math import ceil, inf, isinf
from time import perf_counter
from concurrent.futures import ThreadPoolExecutor

from pandas import DataFrame

from engine import build_atmfg
from exact_tmfg import build_exact_tmfg
from synthgen import gen_planar_ground_truth, gen_gmrf
from metrics import jaccard
from dataset import znormalize
from model import AtmfgConfig, GmrfParams
from exception import ParameterError
from consts import (BUILDER_ATMFG, BUILDER_EXACT, DEFAULT_K, DEFAULT_SAMPLES,
                    MODE_AUTO, MIN_UNIVERSE_LIMIT, UNBOUNDED)
from settings import EXACT_LIMIT
from utils import derive_seed, workers
from logger import console, file


COLUMNS = ('builder', 'N', 'k', 'U', 'alpha', 'jaccard', 'wall_seconds',
           'peak_universe', 'repeat')

PRESETS = ('alpha-heatmap', 'k-sweep', 'universe-sweep', 'runtime')

DEFAULT_SIZES = {'alpha-heatmap': (1000, 2000),
                 'k-sweep': (1000,),
                 'universe-sweep': (2000,),
                 'runtime': (1000, 2000, 5000, 10000, 20000)}
DEFAULT_ALPHAS = (0.1, 0.2, 0.25, 0.3, 0.5, 1.0)
DEFAULT_ALPHA = 0.25
DEFAULT_KS = (3, 15, 25, 50, 100, 150, 200)
DEFAULT_LIMITS = (0.1, 0.2, 0.3, 0.5)
RUNTIME_FRACTION = 0.3

# component keys of the seed tree
_TRUTH, _DATA, _BUILD = 0, 1, 2


def run_bench(preset: str, sizes: list = None, alphas: list = None,
              ks: list = None, limits: list = None, repeats: int = 1,
              seed: int = 0, samples: int = DEFAULT_SAMPLES,
              threads: int = None, index_mode: str = MODE_AUTO):
    '''
        Run a preset and return its rows as a DataFrame.

        limits are absolute face counts, or fractions of N when <= 1.
        The same (N, alpha, repeat) always yields the same truth and data,
        whatever the preset or the swept parameter.
    '''

    if preset not in PRESETS:
        raise ParameterError('Unknown preset %s (one of %s)'
                             % (preset, ', '.join(PRESETS)))
    if repeats < 1:
        raise ParameterError('repeats must be >= 1')
    sizes = list(sizes or DEFAULT_SIZES[preset])
    if any(n < 4 for n in sizes):
        raise ParameterError('Sizes must be >= 4')

    cells = _cells(preset, sizes, alphas, ks, limits, repeats, index_mode)
    slots = 1 if preset == 'runtime' else workers(threads)
    console.info('Bench %s: %d cells on %d worker slot(s)', preset,
                 len(cells), slots)
    with ThreadPoolExecutor(max_workers=slots) as pool:
        rows = list(pool.map(lambda cell: _run_cell(cell, seed, samples),
                             cells))

    df = DataFrame(rows, columns=COLUMNS + ('_u',))
    df = df.sort_values(['builder', 'N', 'alpha', 'k', '_u', 'repeat'],
                        kind='mergesort').drop(columns='_u')
    return df.reset_index(drop=True)


def resolve_limit(limit, n: int):
    '''
        Returns the universe limit for n nodes: inf for unbounded, an
        absolute count, or a fraction of n when limit <= 1.
    '''

    if limit is None or limit == UNBOUNDED or isinf(limit):
        return inf
    limit = float(limit)
    if limit <= 1:
        return max(MIN_UNIVERSE_LIMIT, ceil(limit * n))
    return int(limit)


# the following methods are internal


def _cells(preset, sizes, alphas, ks, limits, repeats, index_mode):
    alphas = list(alphas or (DEFAULT_ALPHAS if preset == 'alpha-heatmap'
                             else (DEFAULT_ALPHA,)))
    cells = []
    for n in sizes:
        for alpha in alphas:
            if preset == 'alpha-heatmap':
                configs = [(BUILDER_ATMFG, DEFAULT_K, None)]
            elif preset == 'k-sweep':
                clipped = sorted({min(k, n - 1) for k in (ks or DEFAULT_KS)
                                  if k >= 3})
                if not clipped:
                    raise ParameterError('k-sweep needs some k >= 3')
                configs = [(BUILDER_ATMFG, k, None) for k in clipped]
            elif preset == 'universe-sweep':
                configs = [(BUILDER_ATMFG, DEFAULT_K, resolve_limit(u, n))
                           for u in (limits or DEFAULT_LIMITS)]
                if all(not isinf(u) for _, _, u in configs):
                    configs.append((BUILDER_ATMFG, DEFAULT_K, inf))
            else:
                configs = [(BUILDER_ATMFG, DEFAULT_K,
                            resolve_limit(RUNTIME_FRACTION, n))]
                if n <= EXACT_LIMIT:
                    configs.append((BUILDER_EXACT, n - 1, inf))
            for repeat in range(repeats):
                for builder, k, limit in configs:
                    cells.append((builder, n, k, limit, alpha, repeat,
                                  index_mode))
    return cells


def _run_cell(cell, seed: int, samples: int):
    builder, n, k, limit, alpha, repeat, index_mode = cell
    key = (n, int(round(alpha * 1e6)), repeat)
    truth = gen_planar_ground_truth(n, derive_seed(seed, _TRUTH, *key))
    data = znormalize(gen_gmrf(GmrfParams(
        truth.adjacency(), alpha, samples, derive_seed(seed, _DATA, *key))))

    if builder == BUILDER_EXACT:
        start = perf_counter()
        edges, _ = build_exact_tmfg(data, force=True)
        wall = round(perf_counter() - start, 6)
        peak = 2 * n - 4
        k_used = n - 1
    else:
        cfg = AtmfgConfig(k=k, universe_limit=limit,
                          seed=derive_seed(seed, _BUILD, *key),
                          index_mode=index_mode)
        edges, stats = build_atmfg(data, cfg)
        wall, peak = stats.wall_seconds, stats.peak_universe
        k_used = min(k, n - 1)

    score = jaccard(edges, truth)
    file.info('Cell %s: jaccard=%.4f wall=%.3fs', str(cell[:6]), score, wall)
    resolved = AtmfgConfig(universe_limit=limit).limit_for(n)
    u = UNBOUNDED if isinf(resolved) else int(resolved)
    return (builder, n, k_used, u, alpha, round(score, 6), wall, peak,
            repeat, resolved)
