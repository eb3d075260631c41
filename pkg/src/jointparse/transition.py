"""Combined lattice-selection and arc-eager dependency transitions.

One derivation interleaves two kinds of decisions: SELECT consumes the
next lattice arc of the analysis being chosen, and the arc-eager actions
(SHIFT, LEFT_ARC, RIGHT_ARC, REDUCE) build a labelled tree over the
morphemes selected so far.  SELECT is only legal when the parser has
drained its one-morpheme queue, which keeps segmentation decisions as
late as possible while still feeding the parser eagerly.
"""
from __future__ import annotations

from dataclasses import dataclass

from jointparse.core import (
    ROOT_LABEL,
    DepTree,
    LatticeArc,
    MorphPath,
    SentenceLattice,
    check_projective,
)

MODE_JOINT = "joint"
MODE_MD = "md"
MODE_DEP = "dep"
MODES = (MODE_JOINT, MODE_MD, MODE_DEP)

SELECT = "SELECT"
SHIFT = "SHIFT"
LEFT_ARC = "LEFT_ARC"
RIGHT_ARC = "RIGHT_ARC"
REDUCE = "REDUCE"


class IllegalTransitionError(Exception):
    """A transition was applied in a state that fails its precondition."""


class GoldPathError(Exception):
    """Gold annotation cannot be replayed on the given lattice."""


class NonProjectiveError(GoldPathError):
    """Gold tree has crossing edges, which arc-eager cannot derive."""


@dataclass(frozen=True)
class Transition:
    kind: str
    arc: LatticeArc | None = None
    label: str | None = None

    def __post_init__(self) -> None:
        if self.kind == SELECT:
            if self.arc is None or self.label is not None:
                raise ValueError("SELECT carries an arc and no label")
        elif self.kind in (LEFT_ARC, RIGHT_ARC):
            if self.label is None or self.arc is not None:
                raise ValueError(f"{self.kind} carries a label and no arc")
        elif self.kind in (SHIFT, REDUCE):
            if self.arc is not None or self.label is not None:
                raise ValueError(f"{self.kind} carries no payload")
        else:
            raise ValueError(f"unknown transition kind {self.kind!r}")

    @property
    def tag(self) -> str:
        """Scoring identity: the kind plus the selected POS or arc label."""
        if self.kind == SELECT:
            return f"{SELECT}:{self.arc.pos}"
        if self.label is not None:
            return f"{self.kind}:{self.label}"
        return self.kind


@dataclass(frozen=True)
class JointState:
    """Immutable parser configuration; apply() returns a successor."""

    cursor: int = 0
    path: tuple[LatticeArc, ...] = ()
    queue: tuple[int, ...] = ()
    stack: tuple[int, ...] = (0,)
    deps: tuple[tuple[int, int, str], ...] = ()
    score: float = 0.0
    history: tuple[Transition, ...] = ()

    def has_head(self, node: int) -> bool:
        return any(d == node for _, d, _ in self.deps)

    def head_of(self, node: int) -> tuple[int, str] | None:
        for head, dep, label in self.deps:
            if dep == node:
                return head, label
        return None


def initial_state() -> JointState:
    return JointState()


def _cleanup_reduce_legal(state: JointState, lattice: SentenceLattice) -> bool:
    # End of sentence with a headless stack top: REDUCE attaches it to the
    # root so every complete derivation yields a tree (no dead ends).
    top = state.stack[-1]
    return (not state.queue and state.cursor == lattice.end_node
            and top != 0 and not state.has_head(top))


def legal_transitions(state: JointState, lattice: SentenceLattice,
                      labels: tuple[str, ...],
                      mode: str = MODE_JOINT) -> list[Transition]:
    """Candidates in canonical order: SELECT, SHIFT, LEFT, RIGHT, REDUCE."""
    out: list[Transition] = []
    top = state.stack[-1]
    if not state.queue and state.cursor != lattice.end_node:
        for arc in lattice.arcs_from(state.cursor):
            out.append(Transition(SELECT, arc=arc))
    if state.queue:
        out.append(Transition(SHIFT))
        if mode != MODE_MD:
            if top != 0 and not state.has_head(top):
                for label in labels:
                    out.append(Transition(LEFT_ARC, label=label))
            for label in labels:
                out.append(Transition(RIGHT_ARC, label=label))
    if mode != MODE_MD and state.has_head(top):
        out.append(Transition(REDUCE))
    elif _cleanup_reduce_legal(state, lattice):
        out.append(Transition(REDUCE))
    return out


def apply(state: JointState, transition: Transition,
          lattice: SentenceLattice, delta: float = 0.0) -> JointState:
    """Pure successor computation; raises on any violated precondition."""
    kind = transition.kind
    top = state.stack[-1]
    history = state.history + (transition,)
    score = state.score + delta

    if kind == SELECT:
        arc = transition.arc
        if state.queue:
            raise IllegalTransitionError("SELECT requires an empty queue")
        if arc.from_node != state.cursor:
            raise IllegalTransitionError(
                f"SELECT arc starts at {arc.from_node}, cursor is {state.cursor}")
        if arc not in lattice.arcs_from(state.cursor):
            raise IllegalTransitionError("SELECT arc is not in the lattice")
        node = len(state.path) + 1
        return JointState(
            cursor=arc.to_node, path=state.path + (arc,), queue=(node,),
            stack=state.stack, deps=state.deps, score=score, history=history)

    if kind == SHIFT:
        if not state.queue:
            raise IllegalTransitionError("SHIFT requires a queued morpheme")
        return JointState(
            cursor=state.cursor, path=state.path, queue=(),
            stack=state.stack + (state.queue[0],), deps=state.deps,
            score=score, history=history)

    if kind == LEFT_ARC:
        if not state.queue:
            raise IllegalTransitionError("LEFT_ARC requires a queued morpheme")
        if top == 0:
            raise IllegalTransitionError("LEFT_ARC cannot attach the root")
        if state.has_head(top):
            raise IllegalTransitionError("LEFT_ARC target already has a head")
        return JointState(
            cursor=state.cursor, path=state.path, queue=state.queue,
            stack=state.stack[:-1],
            deps=state.deps + ((state.queue[0], top, transition.label),),
            score=score, history=history)

    if kind == RIGHT_ARC:
        if not state.queue:
            raise IllegalTransitionError("RIGHT_ARC requires a queued morpheme")
        front = state.queue[0]
        return JointState(
            cursor=state.cursor, path=state.path, queue=(),
            stack=state.stack + (front,),
            deps=state.deps + ((top, front, transition.label),),
            score=score, history=history)

    if kind == REDUCE:
        if state.has_head(top):
            return JointState(
                cursor=state.cursor, path=state.path, queue=state.queue,
                stack=state.stack[:-1], deps=state.deps,
                score=score, history=history)
        if _cleanup_reduce_legal(state, lattice):
            return JointState(
                cursor=state.cursor, path=state.path, queue=state.queue,
                stack=state.stack[:-1],
                deps=state.deps + ((0, top, ROOT_LABEL),),
                score=score, history=history)
        raise IllegalTransitionError("REDUCE requires a headed stack top")

    raise IllegalTransitionError(f"unknown transition kind {kind!r}")


def is_terminal(state: JointState, lattice: SentenceLattice) -> bool:
    if state.queue or state.cursor != lattice.end_node:
        return False
    return all(state.has_head(n) for n in range(1, len(state.path) + 1))


def extract_parse(state: JointState) -> tuple[MorphPath, DepTree]:
    """Read the chosen path and tree out of a terminal state."""
    edges = tuple(sorted(state.deps, key=lambda e: e[1]))
    return MorphPath(state.path), DepTree(nodes=state.path, edges=edges)


def _check_gold(lattice: SentenceLattice, path: MorphPath,
                tree: DepTree | None) -> None:
    node = 0
    for arc in path.arcs:
        if arc.from_node != node:
            raise GoldPathError(
                f"gold path arc {arc.form!r} starts at {arc.from_node}, "
                f"expected {node}")
        if arc not in lattice.arcs_from(arc.from_node):
            raise GoldPathError(f"gold path arc {arc.form!r} not in lattice")
        node = arc.to_node
    if node != lattice.end_node:
        raise GoldPathError(f"gold path stops at node {node}")
    if tree is None:
        return
    if tree.nodes != path.arcs:
        raise GoldPathError("gold tree is not over the gold path morphemes")
    if not check_projective(tree):
        raise NonProjectiveError("gold tree has crossing edges")


def oracle_sequence(lattice: SentenceLattice, path: MorphPath,
                    tree: DepTree | None, mode: str = MODE_JOINT) -> list[Transition]:
    """Static oracle: the canonical derivation of a gold path and tree.

    SELECT fires whenever the queue is empty, consuming the next gold
    path arc; between selections the arc-eager rules fire with the usual
    priority (LEFT_ARC, RIGHT_ARC, REDUCE, SHIFT).  The result is checked
    by replay, so a returned sequence always reconstructs its input.
    Disambiguation-only derivations ignore the tree, which may be None.
    """
    if mode == MODE_MD:
        tree = None
    elif tree is None:
        raise GoldPathError("parsing oracle requires a gold tree")
    _check_gold(lattice, path, tree)
    deps_of: dict[int, list[int]] = {}
    if tree is not None:
        for h, d, _ in tree.edges:
            deps_of.setdefault(h, []).append(d)

    state = initial_state()
    seq: list[Transition] = []
    limit = 6 * len(path.arcs) + 6
    while not is_terminal(state, lattice):
        if len(seq) > limit:
            raise GoldPathError("oracle failed to terminate")
        top = state.stack[-1]
        if not state.queue:
            if state.cursor != lattice.end_node:
                t = Transition(SELECT, arc=path.arcs[len(state.path)])
            else:
                t = Transition(REDUCE)
        elif mode == MODE_MD:
            t = Transition(SHIFT)
        else:
            front = state.queue[0]
            if (top != 0 and not state.has_head(top)
                    and tree.head_of(top) == front):
                t = Transition(LEFT_ARC, label=tree.label_of(top))
            elif tree.head_of(front) == top:
                t = Transition(RIGHT_ARC, label=tree.label_of(front))
            elif (state.has_head(top)
                    and all(d < front for d in deps_of.get(top, ()))):
                t = Transition(REDUCE)
            else:
                t = Transition(SHIFT)
        seq.append(t)
        state = apply(state, t, lattice)

    if mode != MODE_MD:
        got_path, got_tree = extract_parse(state)
        if got_path != path or got_tree.edges != tuple(
                sorted(tree.edges, key=lambda e: e[1])):
            raise GoldPathError("oracle replay does not reproduce the gold parse")
    elif MorphPath(state.path) != path:
        raise GoldPathError("oracle replay does not reproduce the gold path")
    return seq
