import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cdkit.data import Dataset, load_csv, standardize, summary_stats, write_csv
from cdkit.errors import ConstantColumn, DataIOError, DuplicateName, ParseError, TooFewRows


def write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_basic(self, tmp_path):
        d = load_csv(write(tmp_path, "a,b\n1,2\n3,4\n5,6\n"))
        assert (d.n, d.p, d.names) == (3, 2, ("a", "b"))
        np.testing.assert_array_equal(d.values, [[1, 2], [3, 4], [5, 6]])

    def test_crlf(self, tmp_path):
        path = tmp_path / "crlf.csv"
        path.write_bytes(b"a,b\r\n1,2\r\n3,4\r\n")
        assert load_csv(path).n == 2

    def test_non_numeric_cell(self, tmp_path):
        with pytest.raises(ParseError) as info:
            load_csv(write(tmp_path, "a,b\n1,2\nx,4\n"))
        assert (info.value.row, info.value.col) == (2, 1)

    @pytest.mark.parametrize("cell", ["", "nan", "inf", "NA"])
    def test_missing_values_rejected(self, tmp_path, cell):
        with pytest.raises(ParseError):
            load_csv(write(tmp_path, f"a,b\n1,2\n{cell},4\n"))

    def test_ragged_row(self, tmp_path):
        with pytest.raises(ParseError):
            load_csv(write(tmp_path, "a,b\n1,2\n3\n"))

    def test_duplicate_name(self, tmp_path):
        with pytest.raises(DuplicateName):
            load_csv(write(tmp_path, "a,a\n1,2\n3,4\n"))

    def test_too_few_rows(self, tmp_path):
        with pytest.raises(TooFewRows):
            load_csv(write(tmp_path, "a,b\n1,2\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataIOError):
            load_csv(tmp_path / "nope.csv")


class TestStandardize:
    def test_moments(self):
        d = standardize(Dataset.from_array([[1.0], [2.0], [3.0]]))
        col = d.values[:, 0]
        assert abs(col.mean()) < 1e-12
        assert abs(col.var() - 1) < 1e-12
        np.testing.assert_allclose(col, np.array([-1, 0, 1]) * np.sqrt(1.5), atol=1e-12)

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        once = standardize(Dataset.from_array(rng.normal(3, 7, (50, 4))))
        np.testing.assert_allclose(standardize(once).values, once.values, atol=1e-12)

    def test_constant_column(self):
        with pytest.raises(ConstantColumn) as info:
            standardize(Dataset.from_array([[1.0, 0.1], [2.0, 0.1], [3.0, 0.1]]))
        assert info.value.index == 1


class TestSummaryStats:
    def test_identical_columns(self):
        x = np.arange(10.0)
        s = summary_stats(Dataset.from_array(np.c_[x, x]))
        assert s.correlation[0, 1] == pytest.approx(1.0)

    def test_negated_column(self):
        x = np.arange(10.0) ** 1.5
        s = summary_stats(Dataset.from_array(np.c_[x, -x]))
        assert s.correlation[0, 1] == pytest.approx(-1.0)

    def test_independent_samples(self):
        rng = np.random.default_rng(42)
        c = summary_stats(Dataset.from_array(rng.standard_normal((10000, 3)))).correlation
        off = c[~np.eye(3, dtype=bool)]
        assert np.all(np.abs(off) < 0.05)

    def test_population_std(self):
        s = summary_stats(Dataset.from_array([[1.0], [3.0]]))
        assert s.std_devs[0] == 1.0 and s.means[0] == 2.0

    def test_constant_column(self):
        with pytest.raises(ConstantColumn):
            summary_stats(Dataset.from_array([[1.0, 5.0], [2.0, 5.0]]))


datasets = arrays(
    np.float64,
    st.tuples(st.integers(3, 30), st.integers(1, 5)),
    elements=st.floats(-1e6, 1e6, allow_nan=False, width=64),
)


def _varied(a):
    return np.all(a.std(axis=0) > 1e-3 * np.maximum(1, np.abs(a).max(axis=0)))


@settings(max_examples=200, deadline=None)
@given(datasets)
def test_correlation_affine_invariant(a):
    if not _varied(a):
        return
    d = Dataset.from_array(a)
    np.testing.assert_allclose(summary_stats(standardize(d)).correlation, summary_stats(d).correlation, atol=1e-10)


@settings(max_examples=200, deadline=None)
@given(datasets)
def test_correlation_psd_symmetric_unit_diagonal(a):
    if not _varied(a):
        return
    c = summary_stats(Dataset.from_array(a)).correlation
    assert np.array_equal(c, c.T)
    assert np.all(np.diag(c) == 1.0)
    assert np.all(np.abs(c) <= 1.0)
    assert np.linalg.eigvalsh(c).min() >= -1e-8


@settings(max_examples=200, deadline=None)
@given(datasets)
def test_csv_roundtrip(tmp_path_factory, a):
    d = Dataset.from_array(a, [f"v{i}" for i in range(a.shape[1])])
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    write_csv(d, path)
    back = load_csv(path)
    assert back.names == d.names
    np.testing.assert_allclose(back.values, d.values, atol=1e-12, rtol=0)
