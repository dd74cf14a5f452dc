import numpy as np
import pytest

from dksom.dismat import (
    DissimilarityMatrix,
    KernelMatrix,
    MatrixFormatError,
    MatrixValidationError,
    VectorDataset,
    kernel_to_dissimilarity,
    load_matrix,
    load_vectors,
    save_matrix,
    save_vector,
    squared_euclidean,
    validate,
)


def test_squared_euclidean_scalar_points():
    ds = VectorDataset.from_array([0.0, 1.0, 3.0])
    d = squared_euclidean(ds)
    expected = np.array([[0.0, 1.0, 9.0], [1.0, 0.0, 4.0], [9.0, 4.0, 0.0]])
    np.testing.assert_array_equal(d.values, expected)
    assert d.zero_diag


def test_kernel_to_dissimilarity_two_point():
    k = KernelMatrix.from_array([[1.0, 0.5], [0.5, 1.0]])
    d = kernel_to_dissimilarity(k)
    np.testing.assert_array_equal(d.values, [[0.0, 1.0], [1.0, 0.0]])
    assert np.all(np.diag(d.values) == 0.0)


def test_kernel_to_dissimilarity_matches_feature_space():
    rng = np.random.default_rng(10)
    x = rng.normal(size=(30, 4))
    k = KernelMatrix.from_array(x @ x.T)
    d = kernel_to_dissimilarity(k)
    ref = squared_euclidean(VectorDataset.from_array(x))
    assert np.max(np.abs(d.values - ref.values)) < 1e-10


def test_kernel_to_dissimilarity_rejects_strong_negativity():
    # an indefinite "kernel" induces clearly negative squared distances
    k = KernelMatrix.from_array([[0.0, 2.0], [2.0, 0.0]])
    with pytest.raises(MatrixValidationError):
        kernel_to_dissimilarity(k)


def test_dissimilarity_rejects_negative_entries():
    with pytest.raises(MatrixValidationError, match="negative"):
        DissimilarityMatrix.from_array([[0.0, -1.0], [-1.0, 0.0]])


def test_nonsquare_matrix_rejected():
    with pytest.raises(MatrixFormatError):
        DissimilarityMatrix.from_array(np.zeros((2, 3)))


def test_asymmetry_beyond_tolerance_rejected():
    a = np.array([[0.0, 1.0], [1.5, 0.0]])
    with pytest.raises(MatrixValidationError, match="symmetr"):
        DissimilarityMatrix.from_array(a)


def test_tiny_asymmetry_is_symmetrized_and_recorded():
    a = np.array([[0.0, 1.0], [1.0 + 1e-12, 0.0]])
    d = DissimilarityMatrix.from_array(a)
    assert d.values[0, 1] == d.values[1, 0]
    assert 0.0 < d.max_asymmetry < 1e-11


def test_csv_round_trip_bit_identical(tmp_path):
    rng = np.random.default_rng(77)
    x = rng.normal(size=(12, 3))
    d = squared_euclidean(VectorDataset.from_array(x))
    path = tmp_path / "d.csv"
    save_matrix(d.values, path)
    back = load_matrix(path, "dissimilarity")
    assert np.array_equal(back.values, d.values)  # exact, not approximate


def test_csv_header_and_blank_lines(tmp_path):
    path = tmp_path / "k.csv"
    path.write_text("# a,b\n1.0,0.5\n\n0.5,1.0\n")
    k = load_matrix(path, "kernel")
    np.testing.assert_array_equal(k.values, [[1.0, 0.5], [0.5, 1.0]])


def test_csv_parse_error_reports_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1.0,2.0\n1.0,oops\n")
    with pytest.raises(MatrixFormatError, match="line 2"):
        load_matrix(path, "dissimilarity")


def test_csv_ragged_rows_rejected(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("1.0,2.0\n1.0\n")
    with pytest.raises(MatrixFormatError):
        load_matrix(path, "dissimilarity")


def test_save_vector_round_trip(tmp_path):
    path = tmp_path / "assign.txt"
    save_vector(np.array([3, 1, 4, 1, 5]), path)
    assert path.read_text().splitlines() == ["3", "1", "4", "1", "5"]


def test_load_vectors(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("# x,y\n0.0,1.0\n2.0,3.0\n")
    ds = load_vectors(path)
    assert (ds.n, ds.p) == (2, 2)
    np.testing.assert_array_equal(ds.points, [[0.0, 1.0], [2.0, 3.0]])


def test_validate_dissimilarity_report_fields():
    d = DissimilarityMatrix.from_array([[0.0, 1.0, 9.0], [1.0, 0.0, 4.0], [9.0, 4.0, 0.0]])
    rep = validate(d)
    assert rep.symmetric and rep.zero_diag
    assert rep.min_entry == 0.0
    # squared Euclidean on a line is not a metric: 9 > 1 + 4
    assert rep.metric_violations > 0
    assert rep.ordering_violations == 0
    assert rep.psd_margin is None
    assert set(rep.as_dict()) == {
        "symmetric", "max_asymmetry", "min_entry", "zero_diag",
        "metric_violations", "ordering_violations", "psd_margin",
    }


def test_validate_metric_matrix_clean():
    d = DissimilarityMatrix.from_array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]])
    rep = validate(d)
    assert rep.metric_violations == 0


def test_validate_kernel_reports_psd_margin():
    k = KernelMatrix.from_array([[2.0, 1.0], [1.0, 2.0]])
    rep = validate(k)
    assert rep.psd_margin == pytest.approx(1.0)
    k.check_psd()  # must not raise


def test_indefinite_kernel_fails_psd_check():
    k = KernelMatrix.from_array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(MatrixValidationError, match="positive semidefinite"):
        k.check_psd()
