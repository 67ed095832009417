import numpy as np
import pytest

from gauge_lab import ParseError
from gauge_lab.fileio import detect_format, format_g17, read_embeddings, write_embeddings


@pytest.mark.parametrize("ext", ["csv", "jsonl"])
def test_round_trip(tmp_path, ext):
    X = np.random.default_rng(0).standard_normal((5, 3))
    path = tmp_path / f"emb.{ext}"
    write_embeddings(path, X, ids=[f"item{i}" for i in range(5)])
    ids, Y = read_embeddings(path)
    assert ids == [f"item{i}" for i in range(5)]
    np.testing.assert_array_equal(X, Y)


def test_format_override(tmp_path):
    path = tmp_path / "emb.txt"
    path.write_text('{"id": "a", "vector": [1, 2]}\n')
    with pytest.raises(ValueError):
        detect_format(path)
    ids, X = read_embeddings(path, fmt="jsonl")
    assert ids == ["a"] and X.tolist() == [[1.0, 2.0]]


@pytest.mark.parametrize(
    "text, line",
    [
        ("id,c0,c1\n0,1,2\n1,3\n", 3),
        ("id,c0\n0,abc\n", 2),
        ("x,c0\n0,1\n", 1),
        ("id,c0\n0,nan\n", 2),
    ],
)
def test_csv_errors_carry_line(tmp_path, text, line):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(ParseError) as info:
        read_embeddings(path)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


@pytest.mark.parametrize(
    "text, line",
    [
        ('{"id": 0, "vector": [1, 2]}\n{"id": 1, "vector": [1]}\n', 2),
        ('{"id": 0, "vector": [1, 2]}\nnot json\n', 2),
        ('{"id": 0}\n', 1),
        ('{"id": 0, "vector": [true, 1]}\n', 1),
    ],
)
def test_jsonl_errors_carry_line(tmp_path, text, line):
    path = tmp_path / "bad.jsonl"
    path.write_text(text)
    with pytest.raises(ParseError) as info:
        read_embeddings(path)
    assert info.value.line == line


def test_g17():
    assert format_g17(90.0) == "90"
    assert format_g17(1.0) == "1"
    assert format_g17(0.1) == "0.10000000000000001"
