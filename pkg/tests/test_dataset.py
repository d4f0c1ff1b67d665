import numpy as np
import pytest

from . import context  # noqa: F401
from .samples import random_matrix
from model import DataMatrix
from dataset import load_matrix, znormalize, correlation, correlation_matrix
from iolib import write_matrix, HEADER
from exception import (ParseError, DimensionError, BoundsError,
                       ParameterError)
from consts import EXIT_INPUT


def test_znormalize_rows():
    m = DataMatrix(np.arange(12, dtype=np.float64).reshape(3, 4) ** 2)
    z = znormalize(m)
    assert z.normalized
    assert np.allclose(z.values.mean(axis=1), 0, atol=1e-12)
    assert np.allclose(z.values.std(axis=1), 1, atol=1e-12)
    assert z.values.dtype == np.float64


def test_znormalize_keeps_float32():
    m = DataMatrix(np.random.default_rng(0).standard_normal((5, 8)))
    m32 = DataMatrix(m.values.astype(np.float32))
    assert znormalize(m32).values.dtype == np.float32


def test_znormalize_is_idempotent():
    z = random_matrix(6, 10)
    assert znormalize(z) is z
    again = znormalize(DataMatrix(z.values.copy()))
    assert np.allclose(again.values, z.values, atol=1e-12)


def test_constant_row_becomes_zero():
    values = np.array([[1.0, 2.0, 3.0, 4.0], [5.0, 5.0, 5.0, 5.0]])
    z = znormalize(DataMatrix(values))
    assert z.degenerate == [1]
    assert np.all(z.values[1] == 0)
    assert correlation(z, 0, 1) == 0.0


def test_correlation_matches_pearson():
    rng = np.random.default_rng(3)
    raw = rng.standard_normal((4, 50))
    z = znormalize(DataMatrix(raw))
    expected = np.corrcoef(raw)
    for i in range(4):
        for j in range(4):
            assert abs(correlation(z, i, j) - expected[i, j]) < 1e-9
    assert np.allclose(correlation_matrix(z), expected, atol=1e-9)


def test_correlation_is_clipped():
    z = znormalize(DataMatrix(np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])))
    assert correlation(z, 0, 1) <= 1.0
    assert correlation(z, 0, 0) == pytest.approx(1.0)


def test_correlation_errors():
    z = random_matrix(3, 5)
    with pytest.raises(BoundsError):
        correlation(z, 0, 3)
    with pytest.raises(ParameterError):
        correlation(DataMatrix(np.ones((2, 3)) * [1, 2, 3]), 0, 1)


def test_matrix_needs_two_columns():
    with pytest.raises(DimensionError):
        DataMatrix(np.ones((3, 1)))
    with pytest.raises(DimensionError):
        DataMatrix(np.ones(3))


def test_csv_with_header(tmp_path):
    path = tmp_path / 'm.csv'
    path.write_text('a,b,c\n1,2,3\n4,5,6.5\n')
    m = load_matrix(str(path))
    assert m.values.shape == (2, 3)
    assert m.values.dtype == np.float32
    assert m.values[1, 2] == pytest.approx(6.5)
    assert not m.normalized


def test_csv_without_header(tmp_path):
    path = tmp_path / 'm.csv'
    path.write_text('1,2,3\n4,5,6\n')
    assert load_matrix(str(path)).n_rows == 2


def test_csv_bad_field_reports_line(tmp_path):
    path = tmp_path / 'm.csv'
    path.write_text('x,y\n1,2\n3,oops\n')
    with pytest.raises(ParseError) as info:
        load_matrix(str(path))
    assert info.value.line == 3
    assert info.value.exit_code == EXIT_INPUT


def test_csv_missing_field_reports_line(tmp_path):
    path = tmp_path / 'm.csv'
    path.write_text('1,2,3\n4,,6\n')
    with pytest.raises(ParseError) as info:
        load_matrix(str(path))
    assert info.value.line == 2


@pytest.mark.parametrize('tail', ['\n', '\n\n', '\n  \n\n'])
def test_csv_trailing_blank_lines(tmp_path, tail):
    path = tmp_path / 'm.csv'
    path.write_text('1,2\n3,4\n5,6' + tail)
    m = load_matrix(str(path))
    assert m.values.shape == (3, 2)
    assert m.values[2, 1] == 6


def test_csv_interior_blank_line_reports_line(tmp_path):
    path = tmp_path / 'm.csv'
    path.write_text('1,2\n\n3,4\n\n')
    with pytest.raises(ParseError) as info:
        load_matrix(str(path))
    assert info.value.line == 2


def test_csv_single_column_rejected(tmp_path):
    path = tmp_path / 'm.csv'
    path.write_text('1\n2\n3\n')
    with pytest.raises(DimensionError):
        load_matrix(str(path))


def test_binary_file(tmp_path):
    path = str(tmp_path / 'm.atmf')
    values = np.random.default_rng(1).standard_normal((7, 3)).astype(
        np.float32)
    write_matrix(DataMatrix(values), path)
    with open(path, 'rb') as f:
        raw = f.read()
    assert raw[:4] == b'ATMF'
    assert len(raw) == HEADER.itemsize + 4 * 7 * 3
    assert np.array_equal(load_matrix(path).values, values)


def test_binary_bad_magic(tmp_path):
    path = str(tmp_path / 'm.atmf')
    write_matrix(DataMatrix(np.ones((2, 2), dtype=np.float32)), path)
    with open(path, 'r+b') as f:
        f.write(b'XXXX')
    with pytest.raises(ParseError) as info:
        load_matrix(path)
    assert info.value.offset == 0


def test_binary_truncated(tmp_path):
    path = str(tmp_path / 'm.atmf')
    write_matrix(DataMatrix(np.ones((4, 4), dtype=np.float32)), path)
    with open(path, 'rb') as f:
        raw = f.read()
    with open(path, 'wb') as f:
        f.write(raw[:-3])
    with pytest.raises(ParseError):
        load_matrix(path)
