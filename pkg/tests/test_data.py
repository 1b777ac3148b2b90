import numpy as np
import pytest

from lsefit import Dataset, SchemaError, read_dataset_csv, write_dataset_csv


def test_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    data = Dataset(rng.standard_normal((20, 3)), rng.standard_normal(20), "convex")
    path = tmp_path / "data.csv"
    write_dataset_csv(data, path)
    back = read_dataset_csv(path)
    assert back.space == "convex"
    assert np.array_equal(back.inputs, data.inputs)
    assert np.array_equal(back.targets, data.targets)


def test_csv_header_encodes_the_space(tmp_path):
    rng = np.random.default_rng(1)
    data = Dataset(rng.uniform(0.5, 2, (5, 2)), rng.uniform(0.5, 2, 5), "loglog")
    path = tmp_path / "data.csv"
    write_dataset_csv(data, path)
    text = path.read_text()
    assert text.splitlines()[0] == "z1,z2,w"
    assert read_dataset_csv(path).space == "loglog"
    with pytest.raises(SchemaError, match="requested"):
        read_dataset_csv(path, space="convex")


def test_rewriting_gives_identical_bytes(tmp_path):
    rng = np.random.default_rng(2)
    data = Dataset(rng.standard_normal((10, 2)), rng.standard_normal(10))
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    write_dataset_csv(data, first)
    write_dataset_csv(read_dataset_csv(first), second)
    assert first.read_bytes() == second.read_bytes()


def test_malformed_rows_report_line_numbers(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x1,x2,y\n1.0,2.0,3.0\n1.0,oops,3.0\n")
    with pytest.raises(SchemaError, match="row 3.*'oops'"):
        read_dataset_csv(path)
    path.write_text("x1,x2,y\n1.0,2.0\n")
    with pytest.raises(SchemaError, match="row 2 has 2 fields"):
        read_dataset_csv(path)


def test_bad_headers_are_schema_errors(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(SchemaError, match="expected 'x1' or 'z1'"):
        read_dataset_csv(path)
    path.write_text("x1,z2,y\n1,2,3\n")
    with pytest.raises(SchemaError, match="mixes"):
        read_dataset_csv(path)
    path.write_text("x1,x2,w\n1,2,3\n")
    with pytest.raises(SchemaError, match="target column"):
        read_dataset_csv(path)
    path.write_text("")
    with pytest.raises(SchemaError, match="empty"):
        read_dataset_csv(path)
    path.write_text("x1,y\n")
    with pytest.raises(SchemaError, match="no data rows"):
        read_dataset_csv(path)


def test_loglog_data_must_be_positive(tmp_path):
    with pytest.raises(ValueError, match="row 1"):
        Dataset([[1.0], [-1.0]], [1.0, 1.0], "loglog")
    with pytest.raises(ValueError, match="row 0"):
        Dataset([[1.0]], [0.0], "loglog")
    path = tmp_path / "bad.csv"
    path.write_text("z1,w\n1.0,1.0\n-2.0,1.0\n")
    with pytest.raises(SchemaError, match="positive"):
        read_dataset_csv(path)


def test_dataset_validation():
    with pytest.raises(ValueError, match="rows"):
        Dataset([[1.0], [2.0]], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError, match="space"):
        Dataset([[1.0]], [1.0], "euclidean")
    with pytest.raises(ValueError, match="non-finite"):
        Dataset([[np.inf]], [1.0])
    data = Dataset([[1.0, 2.0]], [3.0])
    assert data.n_samples == 1 and data.n_inputs == 2
    with pytest.raises(ValueError):
        data.inputs[0, 0] = 9.0


def test_log_transform():
    data = Dataset([[np.e]], [np.e**2], "loglog")
    logged = data.log_transformed()
    assert logged.space == "convex"
    assert logged.inputs[0, 0] == pytest.approx(1.0)
    assert logged.targets[0] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        Dataset([[1.0]], [1.0], "convex").log_transformed()
