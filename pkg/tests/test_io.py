import math

import numpy as np
import pytest

from lolreg.io import (CsvFormatError, dumps_report, fmt, format_table, read_numeric_csv, read_table,
                       write_text)


def test_fmt_six_significant_digits():
    assert fmt(1 / 3) == "0.333333"
    assert fmt(123456789.0) == "1.23457e+08"
    assert fmt(7) == "7" and fmt(np.int64(3)) == "3"
    assert fmt(float("nan")) == "nan" and fmt(None) == "" and fmt(True) == "1"


def test_table_roundtrip(tmp_path):
    rows = [{"a": 1, "b": 0.5, "c": "x"}, {"a": 2, "b": 1 / 3, "c": "y,z"}]
    path = tmp_path / "t.csv"
    write_text(path, format_table(("a", "b", "c"), rows, {"seed": 4, "command": "test"}))
    meta, header, body = read_table(path)
    assert meta == {"seed": "4", "command": "test"}
    assert header == ["a", "b", "c"]
    assert body == [["1", "0.5", "x"], ["2", "0.333333", "y,z"]]


def test_numeric_csv(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("# note=1\nu,v\n1,2\n3.5,-4e-3\n")
    header, arr = read_numeric_csv(p)
    assert header == ["u", "v"]
    np.testing.assert_array_equal(arr, [[1, 2], [3.5, -0.004]])


@pytest.mark.parametrize("text,needle", [
    ("1,2\n3,4\n", "header row is mandatory"),
    ("u,v\n1,2\n3\n", ":3: expected 2 fields"),
    ("u,v\n1,abc\n", ":2:"),
    ("u,v\n1,nan\n", "non-finite"),
    ("u,v\n", "no data rows"),
    ("", "missing header"),
])
def test_numeric_csv_errors(tmp_path, text, needle):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(CsvFormatError, match=needle):
        read_numeric_csv(p)


def test_report_is_sorted_and_nan_free():
    text = dumps_report({"b": np.float64(math.nan), "a": np.arange(2)})
    assert text.index('"a"') < text.index('"b"')
    assert "null" in text and "NaN" not in text
