"""Strict CSV parsing."""

import numpy as np
import pytest

from pksplot.records import read_records

from conftest import SCHEMA, write_csv


class TestReadRecords:
    def test_lossless_roundtrip(self, tmp_path):
        rows = [
            [0.1 + 0.2, 1e-300, -0.0, 6.02214076e23, float("nan")],
            [1.0 / 3.0, np.pi, -1e308, 2.2250738585072014e-308, 0.5],
        ]
        path = write_csv(tmp_path / "r.csv", ["t", "a", "b", "c", "d"], rows)
        cols, data = read_records(path)
        assert cols == ["t", "a", "b", "c", "d"]
        expected = np.array(rows)
        finite = np.isfinite(expected)
        np.testing.assert_array_equal(np.isnan(data), np.isnan(expected))
        assert np.array_equal(data[finite], expected[finite])

    def test_full_schema_header(self, tmp_path):
        path = write_csv(tmp_path / "r.csv", SCHEMA, [[0.0] * len(SCHEMA)])
        cols, data = read_records(path)
        assert cols == SCHEMA
        assert data.shape == (1, len(SCHEMA))

    def test_header_only_gives_zero_rows(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text(",".join(SCHEMA) + "\n")
        cols, data = read_records(str(path))
        assert cols == SCHEMA
        assert data.shape == (0, len(SCHEMA))

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="empty"):
            read_records(str(path))

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("t,a\n1.0,2.0\n3.0\n")
        with pytest.raises(ValueError, match="line 3"):
            read_records(str(path))

    def test_non_numeric_field_rejected(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("t,a\n1.0,fast\n")
        with pytest.raises(ValueError, match="line 2"):
            read_records(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            read_records(str(tmp_path / "nope.csv"))
