"""Bundled toy treebank and synthetic corpora, all deterministic.

The treebank pairs the demo lexicon with 36 gold parses built from a
handful of clause patterns.  Every ambiguous token has at least two
lexicon analyses, and both demo sentences (the relative-clause reading
of "hbn /snm b.sl" and the simple-verb reading of "hbn /skb b.sl")
appear verbatim.

The synthetic split is engineered for the joint-versus-pipeline
comparison: sentence-initial tokens have a whole-token verb reading
and a split article-plus-noun reading, and only the following word's
syntactic role separates them.  Held-out sentences use stems never
seen in training, so surface-form features carry nothing.
"""
from __future__ import annotations

import functools
import os

from jointparse.conll_io import (
    format_lattices,
    format_tokens,
    rows_from_parse,
    save_model,
    write_conll,
)
from jointparse.core import DEFAULT_TAGSET, DepTree, MorphPath, SentenceLattice
from jointparse.features import Model, new_model
from jointparse.lexicon import (
    EMPTY_OOV,
    Lexicon,
    build_lattice,
    default_lexicon_path,
    load_lexicon,
    parse_lexicon_text,
)
from jointparse.train import EpochStats, GoldParse, train
from jointparse.transition import MODE_JOINT

TREEBANK_LABELS = ("ROOT", "subj", "obj", "def", "prepmod", "pobj",
                   "punct", "rcmod", "relcomp", "acc")
SYNTHETIC_LABELS = ("ROOT", "subj", "def")

_PAST = "gen=M|num=S|per=3|tense=PAST"
_NOUN = "gen=M|num=S"
_DOT = (".", "yyDOT", "_")
_ACC = ("'t", "AT", "_")


@functools.lru_cache(maxsize=1)
def demo_lexicon() -> Lexicon:
    return load_lexicon(default_lexicon_path(), DEFAULT_TAGSET)


def default_model_path() -> str:
    from importlib.resources import files
    return str(files("jointparse").joinpath("data", "toy_model.json"))


def _hn(stem: str) -> list[tuple[str, str, str]]:
    return [("h", "DEF", "_"), (stem, "NN", _NOUN)]


def _bn(stem: str, prep: str = "IN") -> list[tuple[str, str, str]]:
    return [("b", prep, "_"), ("h", "DEF", "_"), (stem, "NN", _NOUN)]


def _verb(v: str) -> list[tuple[str, str, str]]:
    return [(v, "VB", _PAST)]


def _rel(v: str) -> list[tuple[str, str, str]]:
    return [("/s", "REL", "_")] + _verb(v)


_BSL = [("b", "PREPOSITION", "_"), ("h", "DEF", "_"), (".sl", "NN", _NOUN)]

# Pattern edge lists as (head, dependent, label) over morpheme positions.
_EDGES_A = ((0, 3, "ROOT"), (3, 2, "subj"), (2, 1, "def"),
            (3, 4, "prepmod"), (4, 6, "pobj"), (6, 5, "def"), (3, 7, "punct"))
_EDGES_B = ((0, 2, "ROOT"), (2, 1, "def"), (2, 3, "rcmod"),
            (3, 4, "relcomp"), (4, 5, "prepmod"), (5, 7, "pobj"),
            (7, 6, "def"))
_EDGES_C = ((0, 2, "ROOT"), (2, 1, "subj"), (2, 3, "prepmod"),
            (3, 5, "pobj"), (5, 4, "def"), (2, 6, "punct"))
_EDGES_D = ((0, 2, "ROOT"), (2, 1, "subj"), (2, 3, "acc"),
            (3, 5, "obj"), (5, 4, "def"), (2, 6, "punct"))
_EDGES_E = ((0, 3, "ROOT"), (3, 2, "subj"), (2, 1, "def"), (3, 4, "punct"))
_EDGES_F = ((0, 2, "ROOT"), (2, 1, "subj"), (2, 3, "punct"))
_EDGES_S2 = ((0, 3, "ROOT"), (3, 2, "subj"), (2, 1, "def"),
             (3, 4, "prepmod"), (4, 6, "pobj"), (6, 5, "def"))

_STEM = {"hbn": "bn", "hgn": "gn", "hbyt": "byt", "hdg": "dg",
         "hspr": "spr", "hqph": "qph", "bgn": "gn", "bbyt": "byt",
         "bdg": "dg", "bspr": "spr", "bqph": "qph",
         "/sql": "ql", "/src": "rc"}


def _sentences() -> list[tuple[list[str], list, tuple]]:
    out = []

    def a(hn, v, bn):
        tokens = [hn, v, bn, "."]
        triples = _hn(_STEM[hn]) + _verb(v) + _bn(_STEM[bn]) + [_DOT]
        out.append((tokens, triples, _EDGES_A))

    def b(hn, sv, bn):
        tokens = [hn, sv, bn]
        triples = _hn(_STEM[hn]) + _rel(_STEM[sv]) + _bn(_STEM[bn])
        out.append((tokens, triples, _EDGES_B))

    def c(name, v, bn):
        tokens = [name, v, bn, "."]
        triples = [(name, "NNP", "_")] + _verb(v) + _bn(_STEM[bn]) + [_DOT]
        out.append((tokens, triples, _EDGES_C))

    def d(name, hn):
        tokens = [name, "ktb", "'t", hn, "."]
        triples = ([(name, "NNP", "_")] + _verb("ktb") + [_ACC]
                   + _hn(_STEM[hn]) + [_DOT])
        out.append((tokens, triples, _EDGES_D))

    def e(hn, v):
        tokens = [hn, v, "."]
        out.append((tokens, _hn(_STEM[hn]) + _verb(v) + [_DOT], _EDGES_E))

    def f(noun, v):
        tokens = [noun, v, "."]
        triples = [(noun, "NN", _NOUN)] + _verb(v) + [_DOT]
        out.append((tokens, triples, _EDGES_F))

    a("hbn", "ql", "bgn")
    a("hgn", "ql", "bbyt")
    a("hbyt", "rc", "bdg")
    a("hdg", "rc", "bqph")
    a("hspr", "ktb", "bgn")
    a("hqph", "npl", "bspr")
    a("hbn", "rc", "bqph")
    a("hgn", "ktb", "bdg")
    a("hqph", "ql", "bbyt")
    a("hdg", "ktb", "bgn")

    # The relative-clause demo sentence, gold path spelled out.
    out.append((["hbn", "/snm", "b.sl"],
                _hn("bn") + [("/s", "REL", "_"), ("nm", "VB", _PAST)] + _BSL,
                _EDGES_B))
    b("hgn", "/sql", "bdg")
    b("hbyt", "/src", "bqph")
    b("hqph", "/sql", "bbyt")
    b("hdg", "/src", "bgn")
    b("hbn", "/sql", "bgn")

    c("dn", "ql", "bgn")
    c("rwt", "rc", "bbyt")
    c("dn", "ktb", "bspr")
    c("rwt", "npl", "bqph")

    d("dn", "hspr")
    d("rwt", "hbn")
    d("dn", "hqph")
    d("rwt", "hgn")

    e("hbn", "ql")
    e("hgn", "rc")
    e("hdg", "npl")
    e("hspr", "ql")
    e("hqph", "rc")
    e("hbyt", "npl")
    e("hbn", "ktb")

    f("rc", "npl")
    f("/sql", "npl")
    f("/src", "ql")
    f("rc", "ql")

    # The simple-verb demo sentence.
    out.append((["hbn", "/skb", "b.sl"],
                _hn("bn") + [("/skb", "VB", _PAST)] + _BSL,
                _EDGES_S2))
    return out


def _find_path(lattice: SentenceLattice,
               triples: list[tuple[str, str, str]]) -> MorphPath:
    node = 0
    arcs = []
    for form, pos, feats in triples:
        matches = [a for a in lattice.arcs_from(node)
                   if a.form == form and a.pos == pos
                   and a.feats.serialize() == feats]
        if len(matches) != 1:
            raise ValueError(
                f"gold morpheme {(form, pos, feats)} matches "
                f"{len(matches)} arcs from node {node} "
                f"in lattice for {lattice.tokens}")
        arcs.append(matches[0])
        node = matches[0].to_node
    if node != lattice.end_node:
        raise ValueError(f"gold path for {lattice.tokens} stops early")
    return MorphPath(tuple(arcs))


def _gold(lexicon: Lexicon, tokens: list[str], triples: list,
          edges: tuple) -> GoldParse:
    lattice = build_lattice(lexicon, EMPTY_OOV, tokens)
    path = _find_path(lattice, triples)
    tree = DepTree(nodes=path.arcs,
                   edges=tuple(sorted(edges, key=lambda e: e[1])))
    return GoldParse(lattice, path, tree)


@functools.lru_cache(maxsize=1)
def _treebank_cache() -> tuple[GoldParse, ...]:
    lexicon = demo_lexicon()
    return tuple(_gold(lexicon, tokens, triples, edges)
                 for tokens, triples, edges in _sentences())


def toy_treebank() -> list[GoldParse]:
    return list(_treebank_cache())


def toy_raw_sentences() -> list[str]:
    return [" ".join(tokens) for tokens, _, _ in _sentences()]


def write_toy_treebank(directory: str) -> dict[str, str]:
    """Write the treebank in every trainable format; returns the paths."""
    os.makedirs(directory, exist_ok=True)
    corpus = toy_treebank()
    paths = {
        "lattices": os.path.join(directory, "toy.ma"),
        "conll": os.path.join(directory, "toy.conll"),
        "tokens": os.path.join(directory, "toy.tokens"),
        "raw": os.path.join(directory, "toy.raw"),
    }
    with open(paths["lattices"], "w", encoding="utf-8") as handle:
        handle.write(format_lattices([item.lattice for item in corpus]))
    write_conll([rows_from_parse(item.path, item.tree) for item in corpus],
                paths["conll"])
    with open(paths["tokens"], "w", encoding="utf-8") as handle:
        handle.write(format_tokens(
            [list(item.lattice.tokens) for item in corpus]))
    with open(paths["raw"], "w", encoding="utf-8") as handle:
        handle.write("\n".join(toy_raw_sentences()) + "\n")
    return paths


def train_toy_model(epochs: int = 50, beam_width: int = 8,
                    seed: int = 1) -> tuple[Model, list[EpochStats]]:
    model = new_model(DEFAULT_TAGSET, labels=TREEBANK_LABELS,
                      mode=MODE_JOINT, beam_width=beam_width, seed=seed)
    stats = train(model, toy_treebank(), epochs=epochs)
    return model, stats


# ------------------------------------------------------- synthetic corpora
#
# Every sentence is subject + verb.  The subject token is ambiguous
# between a whole masculine noun and article + feminine noun; the verb is
# unambiguous but inflected for gender.  Gold segmentation follows
# subject-verb agreement, so the lattice-path choice carries no signal of
# its own: selection tags are POS-only and the held-out forms are unseen,
# leaving the gender pairing on the subj arc as the one way to decide.

_SYNTHETIC_LEXICON = """\
hzr :NN-M-S: hzr h=DEF:NN-F-S: zr
hlk :NN-M-S: hlk h=DEF:NN-F-S: lk
hpk :NN-M-S: hpk h=DEF:NN-F-S: pk
hrs :NN-M-S: hrs h=DEF:NN-F-S: rs
rqd :VB-M-S-3-PAST: rqd
brx :VB-M-S-3-PAST: brx
smx :VB-F-S-3-PAST: smx
qpc :VB-F-S-3-PAST: qpc
gzr :VB-M-S-3-PAST: gzr
qmx :VB-M-S-3-PAST: qmx
zxl :VB-F-S-3-PAST: zxl
qrs :VB-F-S-3-PAST: qrs
"""

_PAST_F = "gen=F|num=S|per=3|tense=PAST"
_NOUN_F = "gen=F|num=S"


@functools.lru_cache(maxsize=1)
def synthetic_lexicon() -> Lexicon:
    return parse_lexicon_text(_SYNTHETIC_LEXICON, DEFAULT_TAGSET)


def _whole_subject(lexicon: Lexicon, subject: str, verb: str) -> GoldParse:
    triples = [(subject, "NN", _NOUN), (verb, "VB", _PAST)]
    edges = ((0, 2, "ROOT"), (2, 1, "subj"))
    return _gold(lexicon, [subject, verb], triples, edges)


def _split_subject(lexicon: Lexicon, subject: str, verb: str) -> GoldParse:
    triples = [("h", "DEF", "_"), (subject[1:], "NN", _NOUN_F),
               (verb, "VB", _PAST_F)]
    edges = ((0, 3, "ROOT"), (3, 2, "subj"), (2, 1, "def"))
    return _gold(lexicon, [subject, verb], triples, edges)


def synthetic_corpora() -> tuple[list[GoldParse], list[GoldParse]]:
    """(training set, held-out set where every surface form is unseen)."""
    lexicon = synthetic_lexicon()
    training = []
    for subject in ("hzr", "hlk"):
        for verb in ("rqd", "brx"):
            training.append(_whole_subject(lexicon, subject, verb))
        for verb in ("smx", "qpc"):
            training.append(_split_subject(lexicon, subject, verb))
    heldout = []
    for subject in ("hpk", "hrs"):
        for verb in ("gzr", "qmx"):
            heldout.append(_whole_subject(lexicon, subject, verb))
        for verb in ("zxl", "qrs"):
            heldout.append(_split_subject(lexicon, subject, verb))
    return training, heldout


def _regenerate_bundled_model() -> str:
    model, stats = train_toy_model()
    target = os.path.join(os.path.dirname(__file__), "data",
                          "toy_model.json")
    model.meta["corpus"] = "bundled toy treebank"
    save_model(model, target)
    return f"{target}: {len(stats)} epochs, last updates={stats[-1].updates}"


if __name__ == "__main__":
    print(_regenerate_bundled_model())
