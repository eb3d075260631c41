"""Lexicon parsing, tokenization, and lattice construction."""
from __future__ import annotations

import logging
import random

import pytest

from jointparse.conll_io import format_lattices
from jointparse.core import (
    DEFAULT_TAGSET,
    MorphFeatures,
    Tagset,
    count_paths,
    validate_lattice,
)
from jointparse.lexicon import (
    EMPTY_OOV,
    Lexicon,
    LexiconAnalysis,
    LexiconFormatError,
    OovTable,
    Segment,
    add_lexicon_entries,
    analyze_token,
    build_lattice,
    build_oov_table,
    default_lexicon_path,
    is_oov,
    load_lexicon,
    oov_token_indices,
    parse_lexicon_line,
    parse_lexicon_text,
    tokenize_raw,
)

# The full analysis table for the demo sentence, transcribed row by row
# from the reference analyses the bundled lexicon encodes.
DEMO_SENTENCE_ROWS = """\
0	1	h	h	DEF	DEF	_	1
0	3	h	h	REL	REL	_	1
0	5	hbn	hbyn	VB	VB	gen=M|num=S|per=2|tense=IMPERATIVE	1
1	2	b	b	IN	IN	_	1
1	5	bn	bn	NNP	NNP	gen=M|num=S	1
1	5	bn	bn	NNT	NNT	gen=M|num=S	1
1	5	bn	bn	NN	NN	gen=M|num=S	1
2	5	hn	hn	S_PRN	S_PRN	gen=F|num=P|per=3	1
3	4	b	b	IN	IN	_	1
3	5	bn	bn	NNP	NNP	gen=M|num=S	1
3	5	bn	bn	NNT	NNT	gen=M|num=S	1
3	5	bn	bn	NN	NN	gen=M|num=S	1
4	5	hn	hn	S_PRN	S_PRN	gen=F|num=P|per=3	1
5	6	/s	/s	REL	REL	_	2
5	7	/snm	/sn	NN	NN	gen=F|num=S|suf_gen=M|suf_num=P|suf_per=3	2
6	7	nm	nm	VB	VB	gen=M|num=S|per=A|tense=BEINONI	2
6	7	nm	nm	BNT	BNT	gen=M|num=S|per=A	2
6	7	nm	nm	BN	BN	gen=M|num=S|per=A	2
6	7	nm	nm	VB	VB	gen=M|num=S|per=3|tense=PAST	2
7	8	b	b	PREPOSITION	PREPOSITION	_	3
7	10	b.sl	b.sl	NN	NN	gen=M|num=S	3
7	10	b.sl	b.sl	NNT	NNT	gen=M|num=S	3
8	9	h	h	DEF	DEF	_	3
8	10	.sl	.sl	NN	NN	gen=M|num=S	3
8	10	.sl	.sl	NNT	NNT	gen=M|num=S	3
9	10	.sl	.sl	NNT	NNT	gen=M|num=S	3
9	10	.sl	.sl	NN	NN	gen=M|num=S	3
"""


@pytest.fixture(scope="module")
def demo():
    return load_lexicon(default_lexicon_path(), DEFAULT_TAGSET)


# ----------------------------------------------------------- golden lattice

def test_demo_sentence_reproduces_reference_table(demo):
    tokens = tokenize_raw("hbn /snm b.sl")
    assert tokens == ["hbn", "/snm", "b.sl"]
    lattice = build_lattice(demo, EMPTY_OOV, tokens)
    assert format_lattices([lattice]) == DEMO_SENTENCE_ROWS + "\n"
    assert len(lattice.arcs) == 27
    assert validate_lattice(lattice, DEFAULT_TAGSET) == []


def test_demo_sentence_path_counts(demo):
    lattice = build_lattice(demo, EMPTY_OOV, ["hbn", "/snm", "b.sl"])
    assert count_paths(lattice) == 270
    sub = build_lattice(demo, EMPTY_OOV, ["b.sl"])
    assert count_paths(sub) == 6


def test_token_boundaries_and_exit_nodes(demo):
    lattice = build_lattice(demo, EMPTY_OOV, ["hbn", "/snm", "b.sl"])
    assert lattice.token_boundaries == ((0, 5), (5, 7), (7, 10))
    assert lattice.end_node == 10


# ------------------------------------------------------------- entry parsing

def test_implicit_host_form_subtracts_overt_prefixes():
    token, analyses = parse_lexicon_line("bbyt b=IN+(h)=DEF:NN-M-S: byt")
    assert token == "bbyt"
    (analysis,) = analyses
    assert analysis.host_index == 2
    forms = [(s.form, s.pos, s.covert) for s in analysis.segments]
    assert forms == [("b", "IN", False), ("h", "DEF", True),
                     ("byt", "NN", False)]
    host = analysis.segments[2]
    assert host.lemma == "byt"
    assert host.feats.serialize() == "gen=M|num=S"


def test_suffixed_analysis_keeps_underlying_forms():
    _, analyses = parse_lexicon_line("hbn h=DEF:b=IN:hn=S_PRN-F-P-3 b")
    (analysis,) = analyses
    assert [s.form for s in analysis.segments] == ["h", "b", "hn"]
    assert analysis.host_index == 1
    assert analysis.segments[1].lemma == "b"
    suffix = analysis.segments[2]
    assert suffix.lemma == "hn"
    assert suffix.feats.serialize() == "gen=F|num=P|per=3"


def test_bare_host_with_suffix_attributes():
    _, analyses = parse_lexicon_line(
        "/snm :NN-F-S-suf_gen=M-suf_num=P-suf_per=3: /sn")
    (analysis,) = analyses
    host = analysis.segments[0]
    assert host.form == "/snm"
    assert host.lemma == "/sn"
    assert host.feats.serialize() == "gen=F|num=S|suf_gen=M|suf_num=P|suf_per=3"


def test_dual_gender_and_extra_flags():
    _, analyses = parse_lexicon_line("xlm :VB-MF-S-1-FUTURE-NIFAL: xlm")
    (analysis,) = analyses
    host = analysis.segments[0]
    assert host.feats.gender == "FM"
    assert host.feats.extra == (("NIFAL", ""),)
    assert host.feats.serialize() == "gen=F,M|num=S|per=1|tense=FUTURE|NIFAL"


def test_equal_analyses_deduplicated():
    _, analyses = parse_lexicon_line("ab :NN-M-S: ab :NN-M-S: ab")
    assert len(analyses) == 1


@pytest.mark.parametrize("line,message", [
    ("tok", "analysis-lemma pair"),
    ("tok :NN-M-S: lem h=DEF:NN:", "without a lemma"),
    ("tok h=DEF:b=IN:c=AT:d=AT lem", "prefixes:host:suffix"),
    ("tok x=DEF:NN-M-S: lem", "do not start the token"),
    ("tok tok=DEF:NN-M-S: lem", "consume all of token"),
    ("tok h=DEF:NN-M-S:hn=S_PRN lem", "explicit host form"),
    ("tok :(h)=DEF: lem", "only supported as prefixes"),
    ("tok :NN-gen=X: lem", "bad value"),
    ("tok :NN-M-F: lem", "duplicate gender"),
    ("tok DEF:NN-M-S: lem", "form=POS-FEATS"),
    ("tok =DEF:NN-M-S: lem", "empty form"),
    ("tok h=DEF:=NN-M-S: lem", "empty host form"),
    ("tok h=:NN-M-S: lem", "missing POS"),
])
def test_malformed_lines_rejected(line, message):
    with pytest.raises(LexiconFormatError, match=message):
        parse_lexicon_line(line.replace("tok", "tok"), DEFAULT_TAGSET)


def test_unknown_pos_closed_tagset_errors():
    closed = Tagset(pos_tags=("NN",), dep_labels=("ROOT",), closed=True)
    with pytest.raises(LexiconFormatError, match="unknown POS"):
        parse_lexicon_line("a :VB: a", closed)


def test_unknown_pos_open_tagset_warns(caplog):
    open_set = Tagset(pos_tags=("NN",), dep_labels=("ROOT",))
    with caplog.at_level(logging.WARNING, logger="jointparse.lexicon"):
        _, analyses = parse_lexicon_line("a :VB: a", open_set)
    assert analyses[0].segments[0].pos == "VB"
    assert any("VB" in record.message for record in caplog.records)


def test_duplicate_token_line_rejected():
    text = "a :NN: a\na :VB: a\n"
    with pytest.raises(LexiconFormatError, match="duplicate entry"):
        parse_lexicon_text(text)


def test_comments_and_blanks_skipped():
    lexicon = parse_lexicon_text("# note\n\na :NN: a\n")
    assert len(lexicon) == 1


# --------------------------------------------------------- prefix directives

def test_prefix_directive_parsed(demo):
    surfaces = [surface for surface, _ in demo.prefixes]
    assert surfaces == ["wb", "w", "b", "h"]
    wb = dict(demo.prefixes)["wb"]
    assert [(s.form, s.pos) for s in wb] == [("w", "CC"), ("b", "IN")]


def test_prefix_directive_surface_mismatch():
    with pytest.raises(LexiconFormatError, match="do not spell"):
        parse_lexicon_text("#!prefix w b=IN\n")


def test_prefix_directive_usage():
    with pytest.raises(LexiconFormatError, match="usage"):
        parse_lexicon_text("#!prefix w\n")


def test_prefix_directive_covert_items():
    lexicon = parse_lexicon_text("#!prefix b b=IN+(h)=DEF\nx :NN: x\n")
    (surface, segments) = lexicon.prefixes[0]
    assert surface == "b"
    assert [s.covert for s in segments] == [False, True]


# ----------------------------------------------------------- prefix splitting

def test_prefix_split_composes_analyses(demo):
    analyses = analyze_token(demo, EMPTY_OOV, "whgn")
    assert len(analyses) == 2
    for analysis in analyses:
        assert analysis.segments[0].form == "w"
        assert analysis.segments[0].pos == "CC"
    split = analyses[0]
    assert [s.form for s in split.segments] == ["w", "h", "gn"]
    assert split.host_index == 2


def test_prefix_split_prefers_longest_but_collects_all(demo):
    # "wb" peels first but its remainder "gn" has no entry; the shorter
    # "w" peel reaches the bgn entry.
    analyses = analyze_token(demo, EMPTY_OOV, "wbgn")
    assert {a.segments[0].form for a in analyses} == {"w"}
    assert len(analyses) == 2
    assert not is_oov(demo, "wbgn")


def test_exact_entry_wins_over_splitting(demo):
    analyses = analyze_token(demo, EMPTY_OOV, "bgn")
    assert len(analyses) == 2
    assert all(a.segments[0].pos == "IN" for a in analyses)


def test_prefix_split_can_be_disabled(demo):
    assert is_oov(demo, "whgn", prefix_split=False)
    analyses = analyze_token(demo, EMPTY_OOV, "whgn", prefix_split=False)
    assert analyses[0].segments[0].pos == "NNP"


# ------------------------------------------------------------ out of lexicon

def test_empty_oov_table_defaults_to_proper_noun(demo):
    analyses = analyze_token(demo, EMPTY_OOV, "dn")
    (analysis,) = analyses
    segment = analysis.segments[0]
    assert (segment.form, segment.pos, segment.lemma) == ("dn", "NNP", "dn")
    assert segment.feats == MorphFeatures()
    assert is_oov(demo, "dn")
    assert oov_token_indices(demo, ["hbn", "dn", "rwt"]) == [2, 3]


def segs(*items):
    return tuple(Segment(form, pos, MorphFeatures(), form)
                 for form, pos in items)


def test_oov_table_abstracts_host_and_ranks_by_frequency():
    corpus = []
    corpus.extend([("xyz", segs(("h", "DEF"), ("xyz", "NN")))] * 2)
    corpus.append(("qrs", segs(("qrs", "VB"),)))
    corpus.extend([("common", segs(("common", "NN"),))] * 5)
    table = build_oov_table(corpus, rare_threshold=2, max_templates=10)
    assert len(table.templates) == 2
    (first_shape, first_n), (second_shape, second_n) = table.templates
    assert first_n == 2 and second_n == 1
    # Host of the two-segment shape is the longer form, abstracted away.
    assert [s.form for s in first_shape.segments] == ["h", ""]
    assert first_shape.host_index == 1
    analyses = table.analyses_for("new")
    assert [s.form for s in analyses[0].segments] == ["h", "new"]
    assert analyses[0].segments[1].lemma == "new"
    assert [s.form for s in analyses[1].segments] == ["new"]


def test_oov_host_tie_breaks_to_last_segment():
    shape = build_oov_table(
        [("ab", segs(("a", "DEF"), ("b", "NN")))]).templates[0][0]
    assert shape.host_index == 1


def test_oov_table_cap():
    corpus = [(f"t{i}", segs((f"t{i}", tag),))
              for i, tag in enumerate(["NN", "VB", "JJ", "CD"])]
    table = build_oov_table(corpus, max_templates=2)
    assert len(table.templates) == 2


# ------------------------------------------------------------- tokenization

@pytest.mark.parametrize("text,expected", [
    ("hlk lbyt.", ["hlk", "lbyt", "."]),
    ('"slwm"', ['"', "slwm", '"']),
    ("b\"'rh", ["b\"'rh"]),
    ('mnk"l.', ['mnk"l', "."]),
    ('hbn, /snm!', ["hbn", ",", "/snm", "!"]),
    ("(hbn)", ["(", "hbn", ")"]),
    ("b.sl", ["b.sl"]),
    ("...", [".", ".", "."]),
    ('"a', ['"a']),
    ("", []),
])
def test_tokenizer_cases(text, expected):
    assert tokenize_raw(text) == expected


def test_tokenizer_idempotent():
    rng = random.Random(31)
    letters = "ab/'h\""
    puncts = '.,;:!?()"'
    for _ in range(200):
        word = "".join(rng.choice(letters + puncts)
                       for _ in range(rng.randint(1, 7)))
        once = tokenize_raw(word)
        again = tokenize_raw(" ".join(once))
        assert once == again


# ------------------------------------------------------------ lattice shape

def test_random_sentences_build_valid_lattices(demo):
    vocabulary = sorted(demo.entries) + ["dn", "rwt", "whgn"]
    rng = random.Random(5)
    for _ in range(40):
        tokens = [rng.choice(vocabulary) for _ in range(rng.randint(1, 5))]
        lattice = build_lattice(demo, EMPTY_OOV, tokens)
        assert validate_lattice(lattice) == []
        assert lattice.tokens == tuple(tokens)
        assert count_paths(lattice) >= 1


def test_shared_prefix_arcs_merged(demo):
    lattice = build_lattice(demo, EMPTY_OOV, ["bgn"])
    rows = [(a.from_node, a.to_node, a.form) for a in lattice.arcs]
    assert rows.count((0, 1, "b")) == 1
    assert count_paths(lattice) == 2


# ------------------------------------------------------------ entry updates

def test_add_entries_new_and_replace(demo):
    updated, added, replaced = add_lexicon_entries(
        demo, ["lymph :NN-F-S: lymph"], DEFAULT_TAGSET)
    assert (added, replaced) == (1, 0)
    assert not is_oov(updated, "lymph")
    assert is_oov(demo, "lymph")
    (analysis,) = updated.analyses("lymph")
    assert analysis.segments[0].pos == "NN"

    again, added, replaced = add_lexicon_entries(
        updated, ["lymph :NN-F-P: lymph"], DEFAULT_TAGSET)
    assert (added, replaced) == (0, 1)
    assert again.analyses("lymph")[0].segments[0].feats.number == "P"


def test_add_entries_atomic_on_error(demo):
    before = dict(demo.entries)
    with pytest.raises(LexiconFormatError):
        add_lexicon_entries(
            demo, ["ok :NN: ok", "broken h=DEF:NN:x=AT:y lem"],
            DEFAULT_TAGSET)
    assert demo.entries == before
    assert "ok" not in demo.entries


def test_add_entries_merges_prefix_directives(demo):
    updated, _, _ = add_lexicon_entries(
        demo, ["#!prefix l l=PREPOSITION", "lbyt l=PREPOSITION:NN-M-S: byt"])
    assert "l" in dict(updated.prefixes)
    assert len(updated.prefixes) == len(demo.prefixes) + 1
