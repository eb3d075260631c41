"""Feature templates, hashed feature ids, and the averaged linear model.

A template names a list of (address, attribute) terms.  Extraction renders
each term to a string atom from the current state and lattice, joins the
atoms, and hashes once per template; the transition tag is hashed in
separately so one state context scores every candidate transition cheaply.
Feature ids are 64-bit with a fixed key and no collision resolution.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from jointparse.core import SentenceLattice, Tagset, token_form
from jointparse.transition import MODE_JOINT, MODES, JointState, Transition

ADDRESSES = ("S0", "S1", "N0", "L0", "L1", "T0")
ATTRIBUTES = ("form", "pos", "lemma", "gender", "number", "person", "tense",
              "head_label", "fanout", "path_len")

NULL = "NULL"
ROOT_ATOM = "ROOT"

_MASK = (1 << 64) - 1
_PRIME = 0x100000001B3
_KEY = b"lattice-parse-v1"


@dataclass(frozen=True)
class FeatureTemplate:
    name: str
    terms: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        for address, attribute in self.terms:
            if address not in ADDRESSES:
                raise ValueError(f"unknown address {address!r}")
            if attribute not in ATTRIBUTES:
                raise ValueError(f"unknown attribute {attribute!r}")


DEFAULT_TEMPLATES = (
    FeatureTemplate("s0f", (("S0", "form"),)),
    FeatureTemplate("s0p", (("S0", "pos"),)),
    FeatureTemplate("s0l", (("S0", "lemma"),)),
    FeatureTemplate("n0f", (("N0", "form"),)),
    FeatureTemplate("n0p", (("N0", "pos"),)),
    FeatureTemplate("n0l", (("N0", "lemma"),)),
    FeatureTemplate("l0f", (("L0", "form"),)),
    FeatureTemplate("l0p", (("L0", "pos"),)),
    FeatureTemplate("l0l", (("L0", "lemma"),)),
    FeatureTemplate("s0p_n0p", (("S0", "pos"), ("N0", "pos"))),
    FeatureTemplate("s0p_n0f", (("S0", "pos"), ("N0", "form"))),
    FeatureTemplate("l1p_l0p", (("L1", "pos"), ("L0", "pos"))),
    FeatureTemplate("s0g_n0g", (("S0", "gender"), ("N0", "gender"))),
    FeatureTemplate("s0n_n0n", (("S0", "number"), ("N0", "number"))),
    FeatureTemplate("t0f_l0p", (("T0", "form"), ("L0", "pos"))),
    FeatureTemplate("t0fan", (("T0", "fanout"),)),
)


def _hash64(text: str) -> int:
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8,
                             key=_KEY).digest()
    return int.from_bytes(digest, "big")


_TAG_CACHE: dict[str, int] = {}


def _tag_hash(tag: str) -> int:
    cached = _TAG_CACHE.get(tag)
    if cached is None:
        cached = _TAG_CACHE[tag] = _hash64("tag:" + tag)
    return cached


def combine(context_hash: int, tag: str) -> int:
    return (context_hash ^ (_tag_hash(tag) * _PRIME)) & _MASK


def _bucket(n: int) -> str:
    return "5+" if n >= 5 else str(n)


def _node_atom(state: JointState, node: int | None, attribute: str) -> str:
    if node is None:
        return NULL
    if node == 0:
        if attribute in ("form", "pos", "lemma"):
            return ROOT_ATOM
        return NULL
    arc = state.path[node - 1]
    if attribute == "form":
        return arc.form
    if attribute == "pos":
        return arc.pos
    if attribute == "lemma":
        return arc.lemma
    if attribute == "gender":
        return arc.feats.gender or "_"
    if attribute == "number":
        return arc.feats.number or "_"
    if attribute == "person":
        return arc.feats.person or "_"
    if attribute == "tense":
        return arc.feats.tense or "_"
    if attribute == "head_label":
        headed = state.head_of(node)
        return headed[1] if headed else NULL
    return NULL


def _cursor_token(state: JointState, lattice: SentenceLattice) -> int | None:
    for t, (entry, exit_) in enumerate(lattice.token_boundaries, start=1):
        if entry <= state.cursor < exit_:
            return t
    return None


def _atom(state: JointState, lattice: SentenceLattice,
          address: str, attribute: str) -> str:
    if address == "S0":
        return _node_atom(state, state.stack[-1], attribute)
    if address == "S1":
        node = state.stack[-2] if len(state.stack) >= 2 else None
        return _node_atom(state, node, attribute)
    if address == "N0":
        node = state.queue[0] if state.queue else None
        return _node_atom(state, node, attribute)
    if address == "L0":
        node = len(state.path) if state.path else None
        return _node_atom(state, node, attribute)
    if address == "L1":
        node = len(state.path) - 1 if len(state.path) >= 2 else None
        return _node_atom(state, node, attribute)
    # T0: the token under the cursor, seen through the lattice itself.
    if attribute == "fanout":
        return _bucket(len(lattice.arcs_from(state.cursor)))
    if attribute == "path_len":
        return _bucket(len(state.path))
    token = _cursor_token(state, lattice)
    if token is None:
        return NULL
    if attribute == "form":
        return token_form(lattice, token)
    return NULL


def state_context(state: JointState, lattice: SentenceLattice,
                  templates: tuple[FeatureTemplate, ...]) -> list[int]:
    """One context hash per template, independent of any transition."""
    hashes = []
    for template in templates:
        atoms = [_atom(state, lattice, a, attr) for a, attr in template.terms]
        hashes.append(_hash64(template.name + "=" + "\x1f".join(atoms)))
    return hashes


def extract_features(state: JointState, lattice: SentenceLattice,
                     transition: Transition,
                     templates: tuple[FeatureTemplate, ...]) -> list[int]:
    """Feature ids for taking one transition out of one state."""
    tag = transition.tag
    return [combine(ctx, tag) for ctx in state_context(state, lattice, templates)]


@dataclass
class Model:
    """Structured perceptron weights plus everything decoding needs.

    Averaging is lazy: totals and stamps track for how many ticks each
    weight has held its value, and finalize_average() closes the books.
    A finalized model scores with averaged weights and refuses updates.
    """

    templates: tuple[FeatureTemplate, ...]
    labels: tuple[str, ...]
    tagset_hash: str
    mode: str = MODE_JOINT
    beam_width: int = 8
    seed: int = 1
    weights: dict[int, float] = field(default_factory=dict)
    totals: dict[int, float] = field(default_factory=dict)
    stamps: dict[int, int] = field(default_factory=dict)
    averaged: dict[int, float] = field(default_factory=dict)
    ticks: int = 0
    finalized: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.beam_width < 1:
            raise ValueError("beam width must be at least 1")

    def score_ids(self, fids: list[int]) -> float:
        table = self.averaged if self.finalized else self.weights
        return sum(table.get(f, 0.0) for f in fids)

    def score_tagged(self, context_hashes: list[int], tag: str) -> float:
        table = self.averaged if self.finalized else self.weights
        total = 0.0
        for ctx in context_hashes:
            total += table.get(combine(ctx, tag), 0.0)
        return total

    def _flush(self, fid: int) -> None:
        held = self.ticks - self.stamps.get(fid, 0)
        if held:
            self.totals[fid] = (self.totals.get(fid, 0.0)
                                + self.weights.get(fid, 0.0) * held)
        self.stamps[fid] = self.ticks

    def update(self, fid: int, delta: float) -> None:
        if self.finalized:
            raise RuntimeError("model is finalized; averaged weights are frozen")
        self._flush(fid)
        self.weights[fid] = self.weights.get(fid, 0.0) + delta

    def tick(self) -> None:
        self.ticks += 1

    def finalize_average(self) -> None:
        """Average weights over ticks; safe to call more than once."""
        if self.finalized:
            return
        span = max(self.ticks, 1)
        for fid in self.weights:
            self._flush(fid)
        self.averaged = {f: t / span for f, t in self.totals.items() if t != 0.0}
        self.finalized = True


def new_model(tagset: Tagset, labels: tuple[str, ...] | None = None,
              mode: str = MODE_JOINT, beam_width: int = 8, seed: int = 1,
              templates: tuple[FeatureTemplate, ...] = DEFAULT_TEMPLATES) -> Model:
    """Fresh zero-weight model bound to a tagset."""
    if labels is None:
        labels = tagset.dep_labels
    unknown = [l for l in labels if not tagset.has_label(l)]
    if unknown:
        raise ValueError(f"labels missing from tagset: {unknown}")
    ordered = tuple(l for l in tagset.dep_labels if l in set(labels))
    return Model(templates=templates, labels=ordered,
                 tagset_hash=tagset.hash(), mode=mode,
                 beam_width=beam_width, seed=seed)
