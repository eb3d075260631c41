"""Core types for morphological lattices and dependency trees."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

GENDER_VALUES = ("F", "M", "FM")
NUMBER_VALUES = ("S", "P", "D")
PERSON_VALUES = ("1", "2", "3", "A")
TENSE_VALUES = ("PAST", "BEINONI", "FUTURE", "IMPERATIVE", "INFINITIVE")

# Canonical serialization order for the fixed morphological attributes.
_FIXED_KEYS = ("gen", "num", "per", "tense", "suf_gen", "suf_num", "suf_per")

DEFAULT_POS_TAGS = (
    "ADVERB", "AT", "BN", "BNT", "CC", "REL", "CD", "CDT", "CONJ", "COP",
    "DEF", "DTT", "DUMMY_AT", "EX", "IN", "INTJ", "JJ", "JJT", "MD", "NN",
    "NN_S_PP", "NNP", "NNT", "P", "POS", "PREPOSITION", "PRP", "S_PRP",
    "QW", "S_PRN", "TEMP", "VB", "yyCLN", "yyCM", "yyDASH", "yyDOT",
    "yyELPS", "yyEXCL", "yyLRB", "yyQM", "yyQUOT", "yyRRB", "yySCLN",
)

DEFAULT_DEP_LABELS = (
    "num", "subj", "ROOT", "prepmod", "pobj", "comp", "conj", "punct",
    "advcl", "advmod", "obj", "amod", "det", "def", "gobj", "possmod",
    "rcmod", "relcomp", "appos", "nn", "ccomp", "neg", "pcomp", "xcomp",
    "acc", "vmod", "gen", "number", "mwe", "goeswith", "cop", "cc",
    "npred", "parataxis", "npadvmod", "apred", "vocative", "aux", "ppred",
    "acomp", "qmark",
)

ROOT_LABEL = "ROOT"


class PathCapExceededError(Exception):
    """Raised when a lattice admits more paths than the enumeration cap."""

    def __init__(self, count: int, cap: int) -> None:
        super().__init__(f"lattice admits {count} paths, over the cap of {cap}")
        self.count = count
        self.cap = cap


def _validate_closed(value: str | None, allowed: tuple[str, ...], name: str) -> None:
    if value is not None and value not in allowed:
        raise ValueError(f"invalid {name} value {value!r}; expected one of {allowed}")


@dataclass(frozen=True)
class MorphFeatures:
    """Morphological attribute bundle attached to one lattice arc.

    The fixed attributes cover host gender/number/person/tense and the
    pronominal-suffix counterparts.  Anything else lands in ``extra`` as
    (key, value) pairs; a bare flag is stored with an empty value.
    """

    gender: str | None = None
    number: str | None = None
    person: str | None = None
    tense: str | None = None
    suf_gender: str | None = None
    suf_number: str | None = None
    suf_person: str | None = None
    extra: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        _validate_closed(self.gender, GENDER_VALUES, "gender")
        _validate_closed(self.number, NUMBER_VALUES, "number")
        _validate_closed(self.person, PERSON_VALUES, "person")
        _validate_closed(self.tense, TENSE_VALUES, "tense")
        _validate_closed(self.suf_gender, GENDER_VALUES, "suf_gender")
        _validate_closed(self.suf_number, NUMBER_VALUES, "suf_number")
        _validate_closed(self.suf_person, PERSON_VALUES, "suf_person")
        for pair in self.extra:
            if len(pair) != 2 or not pair[0]:
                raise ValueError(f"malformed extra feature {pair!r}")
        object.__setattr__(self, "extra", tuple(sorted(set(self.extra))))

    def is_empty(self) -> bool:
        return self == EMPTY_FEATURES

    def serialize(self) -> str:
        """Render in the canonical pipe-joined form; "_" when empty."""
        values = (self.gender, self.number, self.person, self.tense,
                  self.suf_gender, self.suf_number, self.suf_person)
        parts = []
        for key, value in zip(_FIXED_KEYS, values):
            if value is None:
                continue
            parts.append(f"{key}={_render_value(value)}")
        for key, value in self.extra:
            parts.append(f"{key}={value}" if value else key)
        return "|".join(parts) if parts else "_"

    @classmethod
    def parse(cls, text: str) -> "MorphFeatures":
        """Inverse of serialize; accepts attributes in any order."""
        text = text.strip()
        if text in ("", "_"):
            return EMPTY_FEATURES
        fixed: dict[str, str] = {}
        extra: list[tuple[str, str]] = []
        for item in text.split("|"):
            if not item:
                raise ValueError(f"empty feature item in {text!r}")
            if "=" in item:
                key, value = item.split("=", 1)
                if key in _FIXED_KEYS:
                    if key in fixed:
                        raise ValueError(f"duplicate feature key {key!r} in {text!r}")
                    fixed[key] = _parse_value(key, value)
                else:
                    extra.append((key, value))
            else:
                extra.append((item, ""))
        return cls(
            gender=fixed.get("gen"),
            number=fixed.get("num"),
            person=fixed.get("per"),
            tense=fixed.get("tense"),
            suf_gender=fixed.get("suf_gen"),
            suf_number=fixed.get("suf_num"),
            suf_person=fixed.get("suf_per"),
            extra=tuple(extra),
        )


def _render_value(value: str) -> str:
    return "F,M" if value == "FM" else value


def _parse_value(key: str, value: str) -> str:
    if key in ("gen", "suf_gen") and value in ("F,M", "MF", "FM"):
        return "FM"
    return value


EMPTY_FEATURES = MorphFeatures()


@dataclass(frozen=True)
class Tagset:
    """Inventory of POS tags and dependency labels.

    Label order is significant: transition candidates are generated in this
    order, so it is part of the decoding contract and of the tagset hash.
    """

    pos_tags: tuple[str, ...] = DEFAULT_POS_TAGS
    dep_labels: tuple[str, ...] = DEFAULT_DEP_LABELS
    closed: bool = False

    def __post_init__(self) -> None:
        if len(set(self.pos_tags)) != len(self.pos_tags):
            raise ValueError("duplicate POS tags")
        if len(set(self.dep_labels)) != len(self.dep_labels):
            raise ValueError("duplicate dependency labels")
        if ROOT_LABEL not in self.dep_labels:
            raise ValueError(f"tagset must include the {ROOT_LABEL} label")
        object.__setattr__(self, "_pos_set", frozenset(self.pos_tags))
        object.__setattr__(self, "_label_set", frozenset(self.dep_labels))

    def has_pos(self, tag: str) -> bool:
        return tag in self._pos_set  # type: ignore[attr-defined]

    def has_label(self, label: str) -> bool:
        return label in self._label_set  # type: ignore[attr-defined]

    def hash(self) -> str:
        payload = "\n".join(self.pos_tags) + "\x00" + "\n".join(self.dep_labels)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    @classmethod
    def load(cls, path: str) -> "Tagset":
        """Read a tagset file with [pos] and [deprel] sections."""
        pos: list[str] = []
        labels: list[str] = []
        section: list[str] | None = None
        with open(path, encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if line == "[pos]":
                    section = pos
                elif line == "[deprel]":
                    section = labels
                elif section is None:
                    raise ValueError(f"{path}:{lineno}: tag outside a section")
                else:
                    section.append(line)
        if not pos or not labels:
            raise ValueError(f"{path}: tagset needs a [pos] and a [deprel] section")
        return cls(pos_tags=tuple(pos), dep_labels=tuple(labels))


DEFAULT_TAGSET = Tagset()


@dataclass(frozen=True)
class LatticeArc:
    """One analyzed morpheme: a labelled edge between two lattice nodes."""

    from_node: int
    to_node: int
    form: str
    lemma: str
    pos: str
    feats: MorphFeatures = EMPTY_FEATURES
    token_index: int = 1

    def __post_init__(self) -> None:
        if self.from_node < 0 or self.to_node <= self.from_node:
            raise ValueError(
                f"arc must run forward, got {self.from_node}->{self.to_node}")
        if not self.form:
            raise ValueError("arc form must be non-empty")
        if not self.pos:
            raise ValueError("arc POS must be non-empty")
        if self.token_index < 1:
            raise ValueError("token_index is 1-based")


@dataclass(frozen=True)
class SentenceLattice:
    """All morphological analyses of one token sequence, as a DAG.

    Nodes are 0..end_node with node 0 the start.  token_boundaries[t-1]
    gives the (entry, exit) node pair of token t; token spans tile the
    node range, so consecutive tokens share a boundary node.
    """

    tokens: tuple[str, ...]
    arcs: tuple[LatticeArc, ...]
    end_node: int
    token_boundaries: tuple[tuple[int, int], ...]

    start_node = 0

    def __post_init__(self) -> None:
        outgoing: dict[int, list[LatticeArc]] = {}
        for arc in self.arcs:
            outgoing.setdefault(arc.from_node, []).append(arc)
        object.__setattr__(
            self, "_outgoing", {k: tuple(v) for k, v in outgoing.items()})

    def arcs_from(self, node: int) -> tuple[LatticeArc, ...]:
        return self._outgoing.get(node, ())  # type: ignore[attr-defined]

    def token_span(self, token_index: int) -> tuple[int, int]:
        return self.token_boundaries[token_index - 1]


@dataclass(frozen=True)
class MorphPath:
    """A contiguous start-to-end route through a lattice."""

    arcs: tuple[LatticeArc, ...]

    @property
    def start(self) -> int:
        return self.arcs[0].from_node if self.arcs else 0

    @property
    def end(self) -> int:
        return self.arcs[-1].to_node if self.arcs else 0

    def __len__(self) -> int:
        return len(self.arcs)

    def morpheme(self, index: int) -> LatticeArc:
        """Return the 1-based node of the derived linear morpheme sequence."""
        return self.arcs[index - 1]


@dataclass(frozen=True)
class DepTree:
    """Dependency tree over path morphemes 1..n plus artificial root 0.

    Construction enforces tree-ness (one head per node, all head chains
    reaching the root); projectivity is a separate check because trees
    read from annotation files may legitimately violate it.
    """

    nodes: tuple[LatticeArc, ...]
    edges: tuple[tuple[int, int, str], ...]

    def __post_init__(self) -> None:
        n = len(self.nodes)
        heads: dict[int, tuple[int, str]] = {}
        for head, dep, label in self.edges:
            if not 1 <= dep <= n:
                raise ValueError(f"dependent {dep} out of range 1..{n}")
            if not 0 <= head <= n:
                raise ValueError(f"head {head} out of range 0..{n}")
            if head == dep:
                raise ValueError(f"node {dep} cannot head itself")
            if dep in heads:
                raise ValueError(f"node {dep} has two heads")
            if not label:
                raise ValueError(f"edge {head}->{dep} has an empty label")
            heads[dep] = (head, label)
        if len(heads) != n:
            missing = sorted(set(range(1, n + 1)) - set(heads))
            raise ValueError(f"headless nodes: {missing}")
        for start in range(1, n + 1):
            seen = set()
            node = start
            while node != 0:
                if node in seen:
                    raise ValueError(f"cycle through node {start}")
                seen.add(node)
                node = heads[node][0]
        object.__setattr__(self, "_heads", heads)

    def head_of(self, node: int) -> int:
        return self._heads[node][0]  # type: ignore[attr-defined]

    def label_of(self, node: int) -> str:
        return self._heads[node][1]  # type: ignore[attr-defined]

    def __len__(self) -> int:
        return len(self.nodes)


def validate_lattice(lattice: SentenceLattice,
                     tagset: Tagset | None = None) -> list[str]:
    """Check structural invariants; each violation names the culprit."""
    problems: list[str] = []
    n_tokens = len(lattice.tokens)
    if len(lattice.token_boundaries) != n_tokens:
        problems.append(
            f"{n_tokens} tokens but {len(lattice.token_boundaries)} boundary pairs")
        return problems
    if n_tokens == 0:
        if lattice.end_node != 0 or lattice.arcs:
            problems.append("empty lattice must have end_node 0 and no arcs")
        return problems

    prev_exit = 0
    for t, (entry, exit_) in enumerate(lattice.token_boundaries, start=1):
        if entry != prev_exit:
            problems.append(
                f"token {t} entry node {entry} does not continue from {prev_exit}")
        if exit_ <= entry:
            problems.append(f"token {t} span ({entry}, {exit_}) is not forward")
        prev_exit = exit_
    if prev_exit != lattice.end_node:
        problems.append(
            f"last token exits at {prev_exit}, not at end node {lattice.end_node}")

    seen: set[tuple] = set()
    per_token: dict[int, int] = {}
    for arc in lattice.arcs:
        if arc.to_node > lattice.end_node:
            problems.append(f"arc {arc.form!r} ends past the end node")
            continue
        if not 1 <= arc.token_index <= n_tokens:
            problems.append(f"arc {arc.form!r} has token_index {arc.token_index}")
            continue
        entry, exit_ = lattice.token_span(arc.token_index)
        if arc.from_node < entry or arc.to_node > exit_:
            problems.append(
                f"arc {arc.form!r} ({arc.from_node}->{arc.to_node}) leaves the "
                f"span of token {arc.token_index}")
        key = (arc.from_node, arc.to_node, arc.form, arc.lemma, arc.pos,
               arc.feats, arc.token_index)
        if key in seen:
            problems.append(f"duplicate arc {arc.form!r} {arc.from_node}->{arc.to_node}")
        seen.add(key)
        per_token[arc.token_index] = per_token.get(arc.token_index, 0) + 1
        if tagset is not None and not tagset.has_pos(arc.pos):
            problems.append(f"arc {arc.form!r} has unknown POS {arc.pos!r}")

    for t in range(1, n_tokens + 1):
        if t not in per_token:
            problems.append(f"token {t} has no arcs")
    if problems:
        return problems

    reach_fwd = {0}
    for arc in sorted(lattice.arcs, key=lambda a: a.from_node):
        if arc.from_node in reach_fwd:
            reach_fwd.add(arc.to_node)
    reach_bwd = {lattice.end_node}
    for arc in sorted(lattice.arcs, key=lambda a: -a.to_node):
        if arc.to_node in reach_bwd:
            reach_bwd.add(arc.from_node)
    for arc in lattice.arcs:
        if arc.from_node not in reach_fwd:
            problems.append(
                f"arc {arc.form!r} at node {arc.from_node} unreachable from start")
        elif arc.to_node not in reach_bwd:
            problems.append(
                f"arc {arc.form!r} cannot reach the end node from {arc.to_node}")
    return problems


def count_paths(lattice: SentenceLattice) -> int:
    """Number of start-to-end paths, by DP over the topological node order."""
    if lattice.end_node == 0:
        return 1
    ways = {0: 1}
    for node in range(lattice.end_node):
        here = ways.get(node, 0)
        if here == 0:
            continue
        for arc in lattice.arcs_from(node):
            ways[arc.to_node] = ways.get(arc.to_node, 0) + here
    return ways.get(lattice.end_node, 0)


def enumerate_paths(lattice: SentenceLattice,
                    cap: int = 100_000) -> list[MorphPath]:
    """All paths in arc-order DFS sequence; refuses oversized lattices."""
    total = count_paths(lattice)
    if total > cap:
        raise PathCapExceededError(total, cap)
    if lattice.end_node == 0:
        return [MorphPath(())]
    paths: list[MorphPath] = []
    stack: list[LatticeArc] = []

    def walk(node: int) -> None:
        if node == lattice.end_node:
            paths.append(MorphPath(tuple(stack)))
            return
        for arc in lattice.arcs_from(node):
            stack.append(arc)
            walk(arc.to_node)
            stack.pop()

    walk(0)
    return paths


def check_projective(tree: DepTree) -> bool:
    """True iff no two edges strictly cross; the root edge participates."""
    spans = [(min(h, d), max(h, d)) for h, d, _ in tree.edges]
    for i in range(len(spans)):
        a1, a2 = spans[i]
        for j in range(i + 1, len(spans)):
            b1, b2 = spans[j]
            lo, hi = (a1, a2), (b1, b2)
            if b1 < a1:
                lo, hi = (b1, b2), (a1, a2)
            if lo[0] < hi[0] < lo[1] < hi[1]:
                return False
    return True


def token_form(lattice: SentenceLattice, token_index: int) -> str:
    """Reconstruct a token's surface from its arcs.

    A direct entry-to-exit arc wins; otherwise the forms along the first
    internal route are concatenated.  Covert morphemes make this lossy,
    which is exactly how much token identity a lattice file preserves.
    """
    entry, exit_ = lattice.token_span(token_index)
    for arc in lattice.arcs_from(entry):
        if arc.token_index == token_index and arc.to_node == exit_:
            return arc.form
    parts: list[str] = []
    node = entry
    while node != exit_:
        step = None
        for arc in lattice.arcs_from(node):
            if arc.token_index == token_index:
                step = arc
                break
        if step is None:
            return "".join(parts)
        parts.append(step.form)
        node = step.to_node
    return "".join(parts)


def linear_lattice(path: MorphPath, tokens: tuple[str, ...] | None = None) -> SentenceLattice:
    """Wrap one path as a single-route lattice (for parse-only decoding)."""
    if not path.arcs:
        return SentenceLattice(tokens=(), arcs=(), end_node=0, token_boundaries=())
    boundaries: list[tuple[int, int]] = []
    forms: list[str] = []
    current = None
    for arc in path.arcs:
        if arc.token_index != current:
            current = arc.token_index
            boundaries.append((arc.from_node, arc.to_node))
            forms.append(arc.form)
        else:
            boundaries[-1] = (boundaries[-1][0], arc.to_node)
            forms[-1] += arc.form
    if tokens is None:
        tokens = tuple(forms)
    return SentenceLattice(
        tokens=tokens,
        arcs=path.arcs,
        end_node=path.end,
        token_boundaries=tuple(boundaries),
    )
