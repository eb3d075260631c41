"""Step-synchronous beam search over joint derivations.

All live derivations advance one transition per step.  The union of
successors is pruned to the top K by score; finished derivations leave
the beam for a completed pool and the search runs until the beam drains.
Ties break on the candidate's position in the legal-transition order,
then on the parent's decision lineage, so decoding is fully deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass

from jointparse.core import DepTree, MorphPath, SentenceLattice, linear_lattice
from jointparse.features import Model, state_context
from jointparse.transition import (
    MODE_DEP,
    MODE_MD,
    JointState,
    Transition,
    apply,
    extract_parse,
    initial_state,
    is_terminal,
    legal_transitions,
)


class DecodeError(Exception):
    """No complete derivation exists for the given lattice."""


@dataclass(frozen=True)
class BeamItem:
    state: JointState
    lineage: tuple[int, ...]


@dataclass
class GoldReport:
    """What happened to the gold derivation during one beam search."""

    fell: bool = False
    step: int = -1
    gold_prefix: tuple[Transition, ...] = ()
    best_prefix: tuple[Transition, ...] = ()
    final: JointState | None = None


def beam_search(model: Model, lattice: SentenceLattice,
                beam_width: int | None = None,
                gold: list[Transition] | None = None
                ) -> tuple[list[BeamItem], GoldReport | None]:
    """Run the search; optionally shadow a gold derivation for training.

    With gold given, the search stops at the first step whose pruned
    beam no longer contains the gold prefix, reporting both prefixes
    for an early update.  Otherwise it runs to exhaustion and returns
    the completed pool, best first, truncated to the beam width.
    """
    width = beam_width if beam_width is not None else model.beam_width
    if width < 1:
        raise ValueError("beam width must be at least 1")
    mode = model.mode
    report = GoldReport() if gold is not None else None

    root = BeamItem(initial_state(), ())
    if is_terminal(root.state, lattice):
        if report is not None:
            report.final = root.state
        return [root], report

    beam = [root]
    completed: list[BeamItem] = []
    gold_item: BeamItem | None = root
    gold_live = gold is not None

    while beam:
        candidates: list[tuple[float, int, BeamItem, Transition]] = []
        for item in beam:
            ctxs = state_context(item.state, lattice, model.templates)
            legal = legal_transitions(item.state, lattice, model.labels, mode)
            for index, transition in enumerate(legal):
                delta = model.score_tagged(ctxs, transition.tag)
                candidates.append(
                    (item.state.score + delta, index, item, transition))
        candidates.sort(key=lambda c: (-c[0], c[1], c[2].lineage))
        survivors = candidates[:width]

        next_beam: list[BeamItem] = []
        next_gold: BeamItem | None = None
        for total, index, parent, transition in survivors:
            child = BeamItem(
                apply(parent.state, transition, lattice,
                      total - parent.state.score),
                parent.lineage + (index,))
            if (gold_live and parent is gold_item
                    and transition == gold[len(parent.state.history)]):
                next_gold = child
            if is_terminal(child.state, lattice):
                completed.append(child)
            else:
                next_beam.append(child)

        if gold_live:
            if next_gold is None:
                step = len(gold_item.state.history)
                _, _, best_parent, best_transition = survivors[0]
                report.fell = True
                report.step = step
                report.gold_prefix = tuple(gold[:step + 1])
                report.best_prefix = best_parent.state.history + (best_transition,)
                return _ranked(completed, width), report
            gold_item = next_gold
            if len(gold_item.state.history) == len(gold):
                gold_live = False
                report.final = gold_item.state
        beam = next_beam

    if not completed:
        raise DecodeError("beam search found no complete derivation")
    return _ranked(completed, width), report


def _ranked(completed: list[BeamItem], width: int) -> list[BeamItem]:
    return sorted(completed,
                  key=lambda i: (-i.state.score, i.lineage))[:width]


def beam_decode(model: Model, lattice: SentenceLattice,
                beam_width: int | None = None
                ) -> list[tuple[MorphPath, DepTree, float]]:
    """K-best complete parses: (path, tree, score), best first."""
    items, _ = beam_search(model, lattice, beam_width)
    out = []
    for item in items:
        path, tree = extract_parse(item.state)
        out.append((path, tree, item.state.score))
    return out


def run_md(model: Model, lattice: SentenceLattice,
           beam_width: int | None = None) -> list[tuple[MorphPath, float]]:
    """Disambiguation only: K-best lattice paths."""
    if model.mode != MODE_MD:
        raise ValueError("run_md needs a disambiguation-mode model")
    items, _ = beam_search(model, lattice, beam_width)
    return [(MorphPath(i.state.path), i.state.score) for i in items]


def run_dep(model: Model, path: MorphPath,
            beam_width: int | None = None) -> tuple[DepTree, float]:
    """Parse a fixed morpheme sequence by decoding its linear lattice."""
    if model.mode != MODE_DEP:
        raise ValueError("run_dep needs a parse-only-mode model")
    lattice = linear_lattice(path)
    items, _ = beam_search(model, lattice, beam_width)
    _, tree = extract_parse(items[0].state)
    return tree, items[0].state.score


def parse_pipeline(md_model: Model, dep_model: Model,
                   lattice: SentenceLattice,
                   beam_width: int | None = None
                   ) -> tuple[MorphPath, DepTree, float]:
    """Two-stage baseline: pick the best path first, then parse it."""
    paths = run_md(md_model, lattice, beam_width)
    path, md_score = paths[0]
    tree, dep_score = run_dep(dep_model, path, beam_width)
    return path, tree, md_score + dep_score
