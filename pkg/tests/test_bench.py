from math import inf

import pytest

from . import context  # noqa: F401
from bench import run_bench, resolve_limit, COLUMNS, DEFAULT_ALPHAS
from exception import ParameterError


def test_resolve_limit():
    assert resolve_limit(None, 100) == inf
    assert resolve_limit('inf', 100) == inf
    assert resolve_limit(inf, 100) == inf
    assert resolve_limit(0.3, 1000) == 300
    assert resolve_limit(0.1, 20) == 4
    assert resolve_limit(250, 1000) == 250


def test_alpha_heatmap_grid():
    df = run_bench('alpha-heatmap', sizes=[20, 30, 40], samples=300)
    assert tuple(df.columns) == COLUMNS
    assert len(df) == 3 * len(DEFAULT_ALPHAS)
    assert set(df['builder']) == {'atmfg'}
    assert df['jaccard'].between(0, 1).all()
    assert (df[df['N'] == 20]['k'] == 19).all()


def test_k_sweep_clips_and_dedupes():
    df = run_bench('k-sweep', sizes=[20], samples=200)
    assert df['k'].tolist() == [3, 15, 19]
    assert (df['alpha'] == 0.25).all()


def test_universe_sweep_adds_unbounded_row():
    df = run_bench('universe-sweep', sizes=[30], samples=200)
    assert [str(u) for u in df['U']] == ['4', '6', '9', '15', 'inf']
    unbounded = df[df['U'] == 'inf'].iloc[0]
    assert unbounded['peak_universe'] == 2 * 30 - 4
    assert (df['peak_universe'][:4] <= [4, 6, 9, 15]).all()


def test_runtime_includes_exact_baseline():
    df = run_bench('runtime', sizes=[20, 30], samples=200)
    assert len(df) == 4
    exact = df[df['builder'] == 'exact']
    assert exact['N'].tolist() == [20, 30]
    assert exact['k'].tolist() == [19, 29]
    assert exact['peak_universe'].tolist() == [36, 56]
    assert (df['wall_seconds'] >= 0).all()


def test_same_cell_same_data_across_presets():
    heatmap = run_bench('alpha-heatmap', sizes=[25], alphas=[0.25],
                        samples=200)
    sweep = run_bench('k-sweep', sizes=[25], ks=[50], samples=200)
    assert heatmap['jaccard'].tolist() == sweep['jaccard'].tolist()


def test_rows_do_not_depend_on_threads():
    grid = dict(sizes=[20, 24], alphas=[0.25, 0.5], repeats=2, samples=200,
                seed=5)
    one = run_bench('alpha-heatmap', threads=1, **grid)
    many = run_bench('alpha-heatmap', threads=4, **grid)
    assert one.drop(columns='wall_seconds').equals(
        many.drop(columns='wall_seconds'))
    assert one['repeat'].tolist() == [0, 1] * 4


@pytest.mark.parametrize('kwargs', [{'preset': 'nope'},
                                    {'preset': 'k-sweep', 'repeats': 0},
                                    {'preset': 'k-sweep', 'sizes': [3]},
                                    {'preset': 'k-sweep', 'ks': [1, 2]}])
def test_bench_errors(kwargs):
    with pytest.raises(ParameterError):
        run_bench(**kwargs)
