import json

import numpy as np
import pytest

from vte.embeddings import EmbeddingTable, load_embeddings, write_embeddings
from vte.errors import DimensionMismatchError, NonFiniteError, ParseError


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def test_load_two_records(tmp_path):
    path = tmp_path / "t.jsonl"
    write_lines(path, [
        '{"key": "apple", "kind": "text", "vector": [1.0, 2.0, 3.0, 4.0]}',
        '{"key": "pear", "kind": "text", "vector": [0.5, 0.5, 0.5, 0.5]}',
    ])
    table, dups = load_embeddings(path, "text")
    assert dups == 0
    assert table.text_dim == 4
    assert set(table.text) == {"apple", "pear"}


def test_dimension_mismatch_line_number(tmp_path):
    path = tmp_path / "t.jsonl"
    write_lines(path, [
        '{"key": "a", "kind": "text", "vector": [1.0, 2.0, 3.0, 4.0]}',
        '{"key": "b", "kind": "text", "vector": [1.0, 2.0, 3.0]}',
    ])
    with pytest.raises(DimensionMismatchError) as err:
        load_embeddings(path, "text")
    assert err.value.line == 2


def test_nan_component_rejected(tmp_path):
    path = tmp_path / "t.jsonl"
    write_lines(path, ['{"key": "a", "kind": "text", "vector": [1.0, NaN]}'])
    with pytest.raises(NonFiniteError):
        load_embeddings(path, "text")


def test_bad_json_reports_line(tmp_path):
    path = tmp_path / "t.jsonl"
    write_lines(path, ['{"key": "a", "kind": "text", "vector": [1.0]}', "{nope"])
    with pytest.raises(ParseError) as err:
        load_embeddings(path, "text")
    assert err.value.line == 2


def test_kind_mismatch_rejected(tmp_path):
    path = tmp_path / "t.jsonl"
    write_lines(path, ['{"key": "a", "kind": "image", "vector": [1.0]}'])
    with pytest.raises(ParseError):
        load_embeddings(path, "text")


def test_duplicates_last_wins_with_warning_count(tmp_path):
    path = tmp_path / "t.jsonl"
    write_lines(path, [
        '{"key": "a", "kind": "text", "vector": [1.0, 1.0]}',
        '{"key": "a", "kind": "text", "vector": [2.0, 2.0]}',
    ])
    table, dups = load_embeddings(path, "text")
    assert dups == 1
    assert np.array_equal(table.text["a"], [2.0, 2.0])


def test_token_matrix_entry(tmp_path):
    path = tmp_path / "t.jsonl"
    write_lines(path, [
        '{"key": "a", "kind": "text", "tokens": [[1.0, 0.0], [0.0, 1.0], [2.0, 2.0]]}',
    ])
    table, _ = load_embeddings(path, "text")
    assert table.text["a"].shape == (3, 2)
    assert table.text_dim == 2


def test_header_comment_skipped(tmp_path):
    path = tmp_path / "t.jsonl"
    write_lines(path, [
        "# model=whatever pooling=with-special-tokens",
        '{"key": "a", "kind": "text", "vector": [1.0]}',
    ])
    table, dups = load_embeddings(path, "text")
    assert dups == 0 and set(table.text) == {"a"}


def test_lookup_hit_miss_and_signal():
    table = EmbeddingTable(text_dim=2, text={"a": np.array([1.0, 2.0])})
    hit = table.lookup("a", "text")
    assert hit is table.text["a"]  # stored value, bit-identical
    assert table.lookup("unknown", "text") is None
    assert table.lookup("a", "image") is None


def test_roundtrip_17_significant_digits(tmp_path):
    rng = np.random.default_rng(0)
    entries = {
        f"k{i}": rng.standard_normal(8) * 10.0 ** rng.integers(-12, 12)
        for i in range(50)
    }
    entries["tok"] = rng.standard_normal((3, 8))
    path = tmp_path / "t.jsonl"
    write_embeddings(path, "text", entries.items(), header="writer policy note")
    table, dups = load_embeddings(path, "text")
    assert dups == 0
    for key, value in entries.items():
        assert np.array_equal(table.text[key], np.asarray(value)), key


def test_update_merges_and_checks_dims(tmp_path):
    a = EmbeddingTable(text_dim=2, text={"x": np.zeros(2)})
    b = EmbeddingTable(image_dim=3, images={"y": np.zeros(3)})
    a.update(b)
    assert a.text_dim == 2 and a.image_dim == 3
    c = EmbeddingTable(text_dim=5, text={"z": np.zeros(5)})
    with pytest.raises(DimensionMismatchError):
        a.update(c)


def test_written_file_is_plain_jsonl(tmp_path):
    path = tmp_path / "t.jsonl"
    write_embeddings(path, "image", [("a", np.array([0.1, -2.5e-7]))])
    line = path.read_text(encoding="utf-8").strip()
    rec = json.loads(line)
    assert rec["kind"] == "image" and rec["key"] == "a"
