"""File-format round trips and rejection messages."""
from __future__ import annotations

import random

import pytest

from jointparse.conll_io import (
    ConllFormatError,
    ConllRow,
    FileFormatError,
    LatticeFormatError,
    ModelFormatError,
    TokenFormatError,
    format_conll,
    format_lattices,
    format_paths,
    format_segments,
    format_tokens,
    load_model,
    model_from_json,
    model_to_json,
    parse_conll_text,
    parse_lattice_text,
    parse_token_text,
    read_conll,
    read_lattice,
    read_tokens,
    rows_from_parse,
    save_model,
    write_conll,
    write_lattice,
    write_segments,
)
from jointparse.core import DEFAULT_TAGSET, DepTree, MorphPath, Tagset
from jointparse.features import new_model
from jointparse.transition import MODE_JOINT

from helpers import arc, diamond_lattice, random_valid_lattice


def diamond_parse():
    lattice = diamond_lattice()
    path = MorphPath((lattice.arcs[0], lattice.arcs[2], lattice.arcs[3]))
    tree = DepTree(
        nodes=path.arcs,
        edges=((0, 3, "ROOT"), (3, 2, "subj"), (2, 1, "det")))
    return lattice, path, tree


# ------------------------------------------------------------------ tokens

def test_tokens_round_trip():
    sentences = [["hbn", "/snm", "b.sl"], ["hlk", "lbyt", "."]]
    text = format_tokens(sentences)
    assert parse_token_text(text) == sentences
    assert format_tokens(parse_token_text(text)) == text


def test_tokens_file_round_trip(tmp_path):
    path = tmp_path / "input.tokens"
    path.write_text(format_tokens([["a", "b"]]), encoding="utf-8")
    assert read_tokens(str(path)) == [["a", "b"]]


def test_token_with_inner_space_rejected():
    with pytest.raises(TokenFormatError, match="whitespace"):
        parse_token_text("a b\n\n")


def test_bom_rejected_with_fix(tmp_path):
    path = tmp_path / "bom.tokens"
    path.write_bytes(b"\xef\xbb\xbfa\n\n")
    with pytest.raises(FileFormatError, match="without a BOM"):
        read_tokens(str(path))


def test_carriage_returns_rejected_with_fix(tmp_path):
    path = tmp_path / "crlf.tokens"
    path.write_bytes(b"a\r\n\r\n")
    with pytest.raises(FileFormatError, match="CRLF"):
        read_tokens(str(path))


def test_missing_final_blank_line_rejected():
    with pytest.raises(FileFormatError, match="blank line"):
        parse_token_text("a\nb\n")


# ----------------------------------------------------------------- lattice

def test_lattice_round_trip_is_byte_stable(tmp_path):
    lattices = [diamond_lattice()]
    rng = random.Random(7)
    lattices.extend(random_valid_lattice(rng) for _ in range(10))
    path = tmp_path / "corpus.ma"
    write_lattice(lattices, str(path))
    first = path.read_text(encoding="utf-8")
    back = read_lattice(str(path))
    assert format_lattices(back) == first
    for original, reread in zip(lattices, back):
        assert reread.arcs == tuple(
            sorted(original.arcs, key=lambda a: (a.from_node, a.to_node)))
        assert reread.end_node == original.end_node


def test_lattice_pos_written_to_both_tag_columns():
    text = format_lattices([diamond_lattice()])
    for line in text.strip().split("\n"):
        cols = line.split("\t")
        assert cols[4] == cols[5]


def test_lattice_token_surface_reconstructed():
    text = format_lattices([diamond_lattice()])
    lattice = parse_lattice_text(text)[0]
    assert lattice.tokens == ("hbn", "ql")


def test_lattice_wrong_column_count():
    with pytest.raises(LatticeFormatError, match="8 columns"):
        parse_lattice_text("0\t1\th\th\tDEF\tDEF\t_\n\n")


def test_lattice_tag_column_mismatch():
    row = "0\t1\th\th\tDEF\tNN\t_\t1"
    with pytest.raises(LatticeFormatError, match="differs"):
        parse_lattice_text(row + "\n\n")


def test_lattice_non_integer_node():
    row = "0\tx\th\th\tDEF\tDEF\t_\t1"
    with pytest.raises(LatticeFormatError, match="integers"):
        parse_lattice_text(row + "\n\n")


def test_lattice_with_gap_rejected():
    rows = ["0\t1\ta\ta\tNN\tNN\t_\t1", "2\t3\tb\tb\tNN\tNN\t_\t2"]
    with pytest.raises(LatticeFormatError, match="invalid lattice"):
        parse_lattice_text("\n".join(rows) + "\n\n")


# ------------------------------------------------------------------- conll

def test_conll_round_trip(tmp_path):
    _, path, tree = diamond_parse()
    rows = rows_from_parse(path, tree)
    file_path = tmp_path / "gold.conll"
    write_conll([rows], str(file_path))
    text = file_path.read_text(encoding="utf-8")
    assert read_conll(str(file_path)) == [rows]
    assert format_conll([rows]) == text


def test_conll_rows_carry_tree_structure():
    _, path, tree = diamond_parse()
    rows = rows_from_parse(path, tree)
    assert [(r.head, r.deprel) for r in rows] == [
        (2, "det"), (3, "subj"), (0, "ROOT")]
    assert [r.form for r in rows] == ["h", "bn", "ql"]


def test_conll_wrong_column_count():
    with pytest.raises(ConllFormatError, match="10 columns"):
        parse_conll_text("1\ta\ta\tNN\tNN\t_\t0\tROOT\t_\n\n")


def test_conll_ids_must_be_sequential():
    rows = ["1\ta\ta\tNN\tNN\t_\t0\tROOT\t_\t_",
            "3\tb\tb\tNN\tNN\t_\t1\tdet\t_\t_"]
    with pytest.raises(ConllFormatError, match="count 1"):
        parse_conll_text("\n".join(rows) + "\n\n")


def test_conll_head_out_of_range():
    row = "1\ta\ta\tNN\tNN\t_\t4\tROOT\t_\t_"
    with pytest.raises(ConllFormatError, match="out of range"):
        parse_conll_text(row + "\n\n")


def test_conll_self_head_rejected():
    rows = ["1\ta\ta\tNN\tNN\t_\t1\tdet\t_\t_",
            "2\tb\tb\tNN\tNN\t_\t0\tROOT\t_\t_"]
    with pytest.raises(ConllFormatError, match="own head"):
        parse_conll_text("\n".join(rows) + "\n\n")


def test_conll_empty_deprel_rejected():
    row = "1\ta\ta\tNN\tNN\t_\t0\t\t_\t_"
    with pytest.raises(ConllFormatError, match="DEPREL"):
        parse_conll_text(row + "\n\n")


def test_conll_tag_column_mismatch():
    row = "1\ta\ta\tNN\tVB\t_\t0\tROOT\t_\t_"
    with pytest.raises(ConllFormatError, match="differs"):
        parse_conll_text(row + "\n\n")


# ------------------------------------------- disambiguated paths, segments

def test_format_paths_keeps_source_node_ids():
    lattice, path, _ = diamond_parse()
    text = format_paths([path])
    lines = text.strip().split("\n")
    assert len(lines) == 3
    starts = [line.split("\t")[:2] for line in lines]
    assert starts == [["0", "1"], ["1", "2"], ["2", "3"]]
    reread = parse_lattice_text(text)[0]
    assert [a.form for a in reread.arcs] == ["h", "bn", "ql"]
    # Every path row is literally one of the full lattice's rows.
    assert set(lines) <= set(format_lattices([lattice]).strip().split("\n"))


def test_format_paths_tolerates_node_gaps():
    from jointparse.core import LatticeArc, MorphFeatures, MorphPath
    feats = MorphFeatures()
    path = MorphPath((
        LatticeArc(0, 1, "h", "h", "DEF", feats, 1),
        LatticeArc(1, 5, "bn", "bn", "NN", feats, 1),
        LatticeArc(5, 6, "ql", "ql", "VB", feats, 2),
    ))
    text = format_paths([path])
    starts = [line.split("\t")[:2] for line in text.strip().split("\n")]
    assert starts == [["0", "1"], ["1", "5"], ["5", "6"]]
    reread = parse_lattice_text(text)[0]
    assert reread.end_node == 6
    assert reread.token_boundaries == ((0, 5), (5, 6))
    assert reread.tokens == ("hbn", "ql")


def test_format_segments():
    _, path, _ = diamond_parse()
    assert format_segments([path]) == "h\nbn\nql\n\n"


def test_write_segments(tmp_path):
    _, path, _ = diamond_parse()
    file_path = tmp_path / "out.segments"
    write_segments([path], str(file_path))
    assert file_path.read_text(encoding="utf-8") == "h\nbn\nql\n\n"


def test_empty_sentence_writes_bare_blank_line():
    assert format_segments([MorphPath(())]) == "\n"
    assert format_lattices([]) == ""


# ------------------------------------------------------------------- model

def small_model():
    model = new_model(DEFAULT_TAGSET, labels=("ROOT", "subj", "det"),
                      mode=MODE_JOINT, beam_width=4, seed=9)
    model.update(11, 1.5)
    model.update(22, -2.0)
    model.tick()
    model.update(11, 0.5)
    model.tick()
    model.meta["epochs"] = 3
    return model


def test_model_round_trip(tmp_path):
    model = small_model()
    model.finalize_average()
    path = tmp_path / "toy.model.json"
    save_model(model, str(path))
    back = load_model(str(path), DEFAULT_TAGSET)
    assert back.weights == model.weights
    assert back.averaged == model.averaged
    assert back.labels == model.labels
    assert back.mode == model.mode
    assert back.beam_width == model.beam_width
    assert back.seed == model.seed
    assert back.ticks == model.ticks
    assert back.finalized is True
    assert back.meta == {"epochs": 3}
    assert [t.name for t in back.templates] == [
        t.name for t in model.templates]
    assert model_to_json(back) == model_to_json(model)


def test_model_json_deterministic():
    first = model_to_json(small_model())
    second = model_to_json(small_model())
    assert first == second
    assert first.endswith("\n")
    assert '"format":"lattice-joint-model"' in first


def test_model_wrong_format_rejected():
    with pytest.raises(ModelFormatError, match="lattice-joint-model"):
        model_from_json('{"format":"something-else"}', DEFAULT_TAGSET)


def test_model_wrong_version_rejected():
    text = model_to_json(small_model()).replace(
        '"version":1', '"version":99')
    with pytest.raises(ModelFormatError, match="version"):
        model_from_json(text, DEFAULT_TAGSET)


def test_model_tagset_mismatch_is_hard_error():
    text = model_to_json(small_model())
    shrunk = Tagset(pos_tags=("NN", "VB"), dep_labels=("ROOT", "subj", "det"))
    with pytest.raises(ModelFormatError, match="tagset"):
        model_from_json(text, shrunk)


def test_model_unknown_label_rejected():
    model = small_model()
    text = model_to_json(model)
    # Same tagset hash but a label list that escapes it.
    text = text.replace('"det"', '"NOT_A_LABEL"')
    with pytest.raises(ModelFormatError, match="labels"):
        model_from_json(text, DEFAULT_TAGSET)


def test_model_not_json():
    with pytest.raises(ModelFormatError, match="JSON"):
        model_from_json("{broken", DEFAULT_TAGSET)
