"""Structured perceptron training, evaluation, and gold alignment.

Training follows the global linear model recipe: beam-search the
lattice while shadowing the gold derivation, update on the beam-sized
prefix pair the moment gold falls out (early update), or on the full
derivation pair when a wrong parse outranks a surviving gold.  Weights
are averaged over one tick per processed sentence.

Evaluation aligns predicted morphemes to gold ones by their span inside
the source token, measured in characters of the written forms.  Covert
morphemes occupy the span of their written form on both sides of the
comparison, so the convention cancels out.
"""
from __future__ import annotations

import logging
import random
from collections import Counter
from dataclasses import dataclass

from jointparse.conll_io import ConllRow, read_conll, read_lattice
from jointparse.core import (
    DepTree,
    LatticeArc,
    MorphPath,
    SentenceLattice,
    linear_lattice,
)
from jointparse.decode import beam_search, parse_pipeline, run_dep, run_md
from jointparse.features import Model, extract_features
from jointparse.transition import (
    GoldPathError,
    MODE_DEP,
    MODE_JOINT,
    MODE_MD,
    Transition,
    apply,
    extract_parse,
    initial_state,
    oracle_sequence,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GoldParse:
    """One training sentence: its lattice, gold path, and gold tree."""

    lattice: SentenceLattice
    path: MorphPath
    tree: DepTree | None


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    updates: int
    dev_las: float | None = None
    dev_seg_f1: float | None = None


@dataclass(frozen=True)
class Metrics:
    sentences: int
    seg_precision: float
    seg_recall: float
    seg_f1: float
    pos_accuracy: float
    uas: float | None
    las: float | None


def history_features(model: Model, lattice: SentenceLattice,
                     transitions: tuple[Transition, ...]) -> Counter:
    """Multiset of feature ids fired along one derivation prefix."""
    counts: Counter = Counter()
    state = initial_state()
    for transition in transitions:
        for fid in extract_features(state, lattice, transition,
                                    model.templates):
            counts[fid] += 1
        state = apply(state, transition, lattice)
    return counts


def _mode_instance(item: GoldParse, mode: str
                   ) -> tuple[SentenceLattice, MorphPath, DepTree | None]:
    if mode == MODE_MD:
        return item.lattice, item.path, None
    if item.tree is None:
        raise GoldPathError("training a parser needs gold trees")
    if mode == MODE_DEP:
        linear = linear_lattice(item.path)
        return (linear, MorphPath(linear.arcs),
                DepTree(nodes=linear.arcs, edges=item.tree.edges))
    return item.lattice, item.path, item.tree


def _perceptron_update(model: Model, lattice: SentenceLattice,
                       gold_prefix: tuple[Transition, ...],
                       best_prefix: tuple[Transition, ...]) -> None:
    diff = history_features(model, lattice, gold_prefix)
    diff.subtract(history_features(model, lattice, best_prefix))
    for fid, count in diff.items():
        if count:
            model.update(fid, float(count))


def train(model: Model, corpus: list[GoldParse], epochs: int = 50,
          early_stop: bool = True,
          dev: list[GoldParse] | None = None) -> list[EpochStats]:
    """Train in place, finalize the averaged weights, return the curve."""
    prepared = []
    skipped = 0
    for item in corpus:
        lattice, path, tree = _mode_instance(item, model.mode)
        try:
            gold = oracle_sequence(lattice, path, tree, model.mode)
        except GoldPathError as err:
            skipped += 1
            log.warning("skipping unreplayable sentence %r: %s",
                        item.lattice.tokens, err)
            continue
        prepared.append((lattice, tuple(gold)))
    if not prepared:
        raise ValueError("no trainable sentences in the corpus")
    if skipped:
        log.info("training on %d sentences, %d skipped",
                 len(prepared), skipped)

    rng = random.Random(model.seed)
    stats: list[EpochStats] = []
    for epoch in range(1, epochs + 1):
        order = list(range(len(prepared)))
        rng.shuffle(order)
        updates = 0
        for index in order:
            lattice, gold = prepared[index]
            items, report = beam_search(model, lattice, gold=list(gold))
            if report.fell:
                _perceptron_update(model, lattice, report.gold_prefix,
                                   report.best_prefix)
                updates += 1
            else:
                best = items[0].state
                if best.history != gold and not _same_structure(
                        model.mode, best.history, gold, lattice):
                    _perceptron_update(model, lattice, gold, best.history)
                    updates += 1
            model.tick()
        dev_metrics = evaluate(model, dev) if dev else None
        stats.append(EpochStats(
            epoch=epoch, updates=updates,
            dev_las=dev_metrics.las if dev_metrics else None,
            dev_seg_f1=dev_metrics.seg_f1 if dev_metrics else None))
        if early_stop and updates == 0:
            break
    model.finalize_average()
    model.meta["epochs_run"] = len(stats)
    model.meta["sentences"] = len(prepared)
    return stats


def _same_structure(mode: str, history: tuple[Transition, ...],
                    gold: tuple[Transition, ...],
                    lattice: SentenceLattice) -> bool:
    # Spurious ambiguity: different derivations can build one structure.
    got = _replay_structure(mode, history, lattice)
    want = _replay_structure(mode, gold, lattice)
    return got == want


def _replay_structure(mode: str, transitions: tuple[Transition, ...],
                      lattice: SentenceLattice):
    state = initial_state()
    for transition in transitions:
        state = apply(state, transition, lattice)
    if mode == MODE_MD:
        return MorphPath(state.path)
    return extract_parse(state)


# -------------------------------------------------------------- evaluation

def morpheme_spans(path: MorphPath) -> list[tuple[int, int, int]]:
    """(token, start, end) character spans of each morpheme's form."""
    spans = []
    token = None
    offset = 0
    for arc in path.arcs:
        if arc.token_index != token:
            token = arc.token_index
            offset = 0
        spans.append((token, offset, offset + len(arc.form)))
        offset += len(arc.form)
    return spans


def _score_parses(gold_items: list[GoldParse],
                  predictions: list[tuple[MorphPath, DepTree | None]]
                  ) -> Metrics:
    seg_tp = seg_gold = seg_pred = 0
    pos_correct = 0
    att_unlabeled = att_labeled = att_total = 0
    scored_trees = False
    for item, (pred_path, pred_tree) in zip(gold_items, predictions):
        gold_spans = morpheme_spans(item.path)
        pred_spans = morpheme_spans(pred_path)
        seg_gold += len(gold_spans)
        seg_pred += len(pred_spans)
        gold_set = set(gold_spans)
        pred_index = {span: i + 1 for i, span in enumerate(pred_spans)}
        seg_tp += len(gold_set & set(pred_index))
        for i, span in enumerate(gold_spans, start=1):
            j = pred_index.get(span)
            if j is not None and (item.path.arcs[i - 1].pos
                                  == pred_path.arcs[j - 1].pos):
                pos_correct += 1
        if pred_tree is None or item.tree is None:
            continue
        scored_trees = True
        att_total += len(gold_spans)
        for i, span in enumerate(gold_spans, start=1):
            j = pred_index.get(span)
            if j is None:
                continue
            gold_head = item.tree.head_of(i)
            pred_head = pred_tree.head_of(j)
            if gold_head == 0:
                heads_match = pred_head == 0
            elif pred_head == 0:
                heads_match = False
            else:
                heads_match = gold_spans[gold_head - 1] == pred_spans[pred_head - 1]
            if heads_match:
                att_unlabeled += 1
                if item.tree.label_of(i) == pred_tree.label_of(j):
                    att_labeled += 1

    precision = seg_tp / seg_pred if seg_pred else 0.0
    recall = seg_tp / seg_gold if seg_gold else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall else 0.0)
    return Metrics(
        sentences=len(gold_items),
        seg_precision=precision,
        seg_recall=recall,
        seg_f1=f1,
        pos_accuracy=pos_correct / seg_gold if seg_gold else 0.0,
        uas=att_unlabeled / att_total if scored_trees and att_total else (
            None if not scored_trees else 0.0),
        las=att_labeled / att_total if scored_trees and att_total else (
            None if not scored_trees else 0.0),
    )


def evaluate(model: Model, corpus: list[GoldParse],
             beam_width: int | None = None) -> Metrics:
    predictions: list[tuple[MorphPath, DepTree | None]] = []
    for item in corpus:
        if model.mode == MODE_MD:
            paths = run_md(model, item.lattice, beam_width)
            predictions.append((paths[0][0], None))
        elif model.mode == MODE_DEP:
            tree, _ = run_dep(model, item.path, beam_width)
            predictions.append((item.path, tree))
        else:
            items, _ = beam_search(model, item.lattice, beam_width)
            path, tree = extract_parse(items[0].state)
            predictions.append((path, tree))
    return _score_parses(corpus, predictions)


def evaluate_pipeline(md_model: Model, dep_model: Model,
                      corpus: list[GoldParse],
                      beam_width: int | None = None) -> Metrics:
    """Score the two-stage baseline on the same alignment as evaluate."""
    predictions = []
    for item in corpus:
        path, tree, _ = parse_pipeline(md_model, dep_model, item.lattice,
                                       beam_width)
        predictions.append((path, tree))
    return _score_parses(corpus, predictions)


# ---------------------------------------------------- gold-path alignment

def _match_rows(arc: LatticeArc, row: ConllRow) -> bool:
    return (arc.form == row.form and arc.lemma == row.lemma
            and arc.pos == row.pos and arc.feats == row.feats)


def align_gold(lattice: SentenceLattice,
               rows: list[ConllRow]) -> MorphPath | None:
    """First lattice path whose arcs match the annotation rows in order."""
    n = len(rows)
    dead: set[tuple[int, int]] = set()

    def walk(node: int, index: int) -> tuple[LatticeArc, ...] | None:
        if node == lattice.end_node:
            return () if index == n else None
        if (node, index) in dead or index >= n:
            dead.add((node, index))
            return None
        for arc in lattice.arcs_from(node):
            if _match_rows(arc, rows[index]):
                rest = walk(arc.to_node, index + 1)
                if rest is not None:
                    return (arc,) + rest
        dead.add((node, index))
        return None

    arcs = walk(0, 0)
    return MorphPath(arcs) if arcs is not None else None


def gold_tree(rows: list[ConllRow], path: MorphPath) -> DepTree:
    edges = tuple((row.head, row.id, row.deprel) for row in rows)
    return DepTree(nodes=path.arcs, edges=edges)


def infuse_gold(lattice: SentenceLattice,
                rows: list[ConllRow]) -> SentenceLattice:
    """Splice the gold analysis into a lattice that lacks it.

    The annotation rows are partitioned over the tokens with as few
    artificial analyses as possible: a token whose sub-lattice already
    yields its rows keeps them; anything else gets a fresh arc chain
    from its entry to its exit.  Node ids after an inserted chain shift
    up, existing arcs survive as distractors, and alignment on the
    result always succeeds.  Training-corpus use only.
    """
    n_tokens = len(lattice.tokens)
    n_rows = len(rows)

    def token_arcs(t: int) -> list[LatticeArc]:
        return [a for a in lattice.arcs if a.token_index == t + 1]

    def can_match(t: int, i: int, j: int) -> bool:
        entry, exit_ = lattice.token_boundaries[t]

        def walk(node: int, index: int) -> bool:
            if node == exit_:
                return index == j
            if index >= j:
                return False
            return any(
                _match_rows(arc, rows[index]) and walk(arc.to_node, index + 1)
                for arc in lattice.arcs_from(node)
                if arc.token_index == t + 1)

        return walk(entry, i)

    best: dict[tuple[int, int], tuple[int, int, bool]] = {}

    def solve(t: int, i: int) -> int:
        # Returns minimal wildcard count; best[] remembers (cost, j, matched).
        if t == n_tokens:
            return 0 if i == n_rows else n_rows + 1
        if (t, i) in best:
            return best[t, i][0]
        best[t, i] = (n_rows + 1, i, False)
        remaining_tokens = n_tokens - t - 1
        for j in range(i + 1, n_rows - remaining_tokens + 1):
            if can_match(t, i, j):
                cost = solve(t + 1, j)
                if cost < best[t, i][0]:
                    best[t, i] = (cost, j, True)
        for j in range(i + 1, n_rows - remaining_tokens + 1):
            cost = 1 + solve(t + 1, j)
            if cost < best[t, i][0]:
                best[t, i] = (cost, j, False)
        return best[t, i][0]

    if solve(0, 0) > n_rows:
        raise GoldPathError(
            "annotation rows cannot be distributed over the tokens")

    new_arcs: list[LatticeArc] = []
    boundaries: list[tuple[int, int]] = []
    shift = 0
    i = 0
    for t in range(n_tokens):
        cost, j, matched = best[t, i]
        entry, exit_ = lattice.token_boundaries[t]
        chain = [] if matched else rows[i:j]
        grow = max(len(chain) - 1, 0)

        def remap(node: int) -> int:
            return node + shift + (grow if node == exit_ else 0)

        for arc in token_arcs(t):
            new_arcs.append(LatticeArc(
                remap(arc.from_node), remap(arc.to_node), arc.form,
                arc.lemma, arc.pos, arc.feats, arc.token_index))
        if chain:
            node = entry + shift
            for k, row in enumerate(chain):
                to = (exit_ + shift + grow if k == len(chain) - 1
                      else exit_ + shift + k)
                candidate = LatticeArc(node, to, row.form, row.lemma,
                                       row.pos, row.feats, t + 1)
                if candidate not in new_arcs:
                    new_arcs.append(candidate)
                node = to
        boundaries.append((entry + shift, exit_ + shift + grow))
        shift += grow
        i = j

    return SentenceLattice(
        tokens=lattice.tokens, arcs=tuple(new_arcs),
        end_node=lattice.end_node + shift,
        token_boundaries=tuple(boundaries))


def load_training_corpus(lattice_path: str, conll_path: str
                         ) -> tuple[list[GoldParse], int]:
    """Pair lattice and annotation files; returns (corpus, infused count)."""
    lattices = read_lattice(lattice_path)
    annotations = read_conll(conll_path)
    if len(lattices) != len(annotations):
        raise ValueError(
            f"{lattice_path} has {len(lattices)} sentences but "
            f"{conll_path} has {len(annotations)}")
    corpus = []
    infused = 0
    for lattice, rows in zip(lattices, annotations):
        path = align_gold(lattice, rows)
        if path is None:
            lattice = infuse_gold(lattice, rows)
            path = align_gold(lattice, rows)
            if path is None:
                raise GoldPathError(
                    "gold analysis still unreachable after infusion")
            infused += 1
        corpus.append(GoldParse(lattice, path, gold_tree(rows, path)))
    return corpus, infused
