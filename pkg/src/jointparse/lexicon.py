"""Broad-coverage lexicon, tokenization, and lattice construction.

A lexicon line maps one token to its analyses::

    token GROUP lemma [GROUP lemma ...]

Each GROUP has three colon-separated parts, prefixes:host:suffix.
Prefixes are '+'-joined form=POS-FEATS items; a parenthesized form like
(h)=DEF is a covert morpheme that appears in the lattice without
consuming token surface.  The host is either an explicit form=POS-FEATS
or a bare POS-FEATS whose form is the token minus its overt prefixes.
The suffix, when present, is one form=POS-FEATS item.  The lemma field
after the group belongs to the host; prefix and suffix morphemes are
their own lemmas.  Forms are underlying: they need not concatenate to
the token surface (pronominal suffixes usually do not).

POS-FEATS is hyphen-joined: the tag first, then attribute values
recognized by their closed value sets, key=value pairs for suffix
attributes, and anything else kept as an extra flag.

``#!prefix SURFACE ITEMS`` lines declare peelable prefixes for the
splitting pass that analyzes out-of-lexicon prefixed tokens.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from jointparse.core import (
    GENDER_VALUES,
    NUMBER_VALUES,
    PERSON_VALUES,
    TENSE_VALUES,
    LatticeArc,
    MorphFeatures,
    SentenceLattice,
    Tagset,
)

log = logging.getLogger(__name__)

PUNCTUATION = set('.,;:!?()[]{}"«»…')

_FIXED_FEATURE_KEYS = {
    "gen": ("gender", GENDER_VALUES),
    "num": ("number", NUMBER_VALUES),
    "per": ("person", PERSON_VALUES),
    "tense": ("tense", TENSE_VALUES),
    "suf_gen": ("suf_gender", GENDER_VALUES),
    "suf_num": ("suf_number", NUMBER_VALUES),
    "suf_per": ("suf_person", PERSON_VALUES),
}


class LexiconFormatError(ValueError):
    """A lexicon line violates the entry grammar."""


@dataclass(frozen=True)
class Segment:
    """One morpheme of an analysis, before lattice placement."""

    form: str
    pos: str
    feats: MorphFeatures
    lemma: str
    covert: bool = False


@dataclass(frozen=True)
class LexiconAnalysis:
    """Ordered morphemes with the index of the host among them."""

    segments: tuple[Segment, ...]
    host_index: int


@dataclass(frozen=True)
class Lexicon:
    entries: dict[str, tuple[LexiconAnalysis, ...]] = field(default_factory=dict)
    prefixes: tuple[tuple[str, tuple[Segment, ...]], ...] = ()

    def analyses(self, token: str) -> tuple[LexiconAnalysis, ...]:
        return self.entries.get(token, ())

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class OovTable:
    """Ranked analysis shapes for tokens the lexicon does not know.

    Shapes come from rare training tokens with the host form and lemma
    abstracted away; instantiation puts the unknown token back in.  An
    empty table falls back to a single proper-noun analysis.
    """

    templates: tuple[tuple[LexiconAnalysis, int], ...] = ()
    rare_threshold: int = 2

    def analyses_for(self, token: str) -> tuple[LexiconAnalysis, ...]:
        if not self.templates:
            return (LexiconAnalysis(
                (Segment(token, "NNP", MorphFeatures(), token),), 0),)
        out = []
        for shape, _ in self.templates:
            segments = list(shape.segments)
            host = segments[shape.host_index]
            segments[shape.host_index] = Segment(
                token, host.pos, host.feats, token, host.covert)
            out.append(LexiconAnalysis(tuple(segments), shape.host_index))
        return tuple(out)


EMPTY_OOV = OovTable()


def _parse_posfeats(text: str, tagset: Tagset | None,
                    where: str) -> tuple[str, MorphFeatures]:
    parts = text.split("-")
    pos = parts[0]
    if not pos:
        raise LexiconFormatError(f"{where}: missing POS tag in {text!r}")
    if tagset is not None and not tagset.has_pos(pos):
        if tagset.closed:
            raise LexiconFormatError(f"{where}: unknown POS tag {pos!r}")
        log.warning("%s: POS tag %r is not in the tagset", where, pos)
    values: dict[str, str] = {}
    extras: list[tuple[str, str]] = []
    for raw in parts[1:]:
        if not raw:
            continue
        if "=" in raw:
            key, value = raw.split("=", 1)
            if key in _FIXED_FEATURE_KEYS:
                attr, allowed = _FIXED_FEATURE_KEYS[key]
                normalized = "FM" if value in ("MF", "FM", "F,M") else value
                if normalized not in allowed:
                    raise LexiconFormatError(
                        f"{where}: bad value {value!r} for {key}")
                if attr in values:
                    raise LexiconFormatError(f"{where}: duplicate {key}")
                values[attr] = normalized
            else:
                extras.append((key, value))
        elif raw in ("MF", "FM") or raw in GENDER_VALUES:
            normalized = "FM" if raw in ("MF", "FM") else raw
            if "gender" in values:
                raise LexiconFormatError(f"{where}: duplicate gender in {text!r}")
            values["gender"] = normalized
        elif raw in NUMBER_VALUES:
            if "number" in values:
                raise LexiconFormatError(f"{where}: duplicate number in {text!r}")
            values["number"] = raw
        elif raw in PERSON_VALUES:
            if "person" in values:
                raise LexiconFormatError(f"{where}: duplicate person in {text!r}")
            values["person"] = raw
        elif raw in TENSE_VALUES:
            if "tense" in values:
                raise LexiconFormatError(f"{where}: duplicate tense in {text!r}")
            values["tense"] = raw
        else:
            extras.append((raw, ""))
    return pos, MorphFeatures(
        gender=values.get("gender"), number=values.get("number"),
        person=values.get("person"), tense=values.get("tense"),
        suf_gender=values.get("suf_gender"),
        suf_number=values.get("suf_number"),
        suf_person=values.get("suf_person"),
        extra=tuple(extras))


def _parse_affix_item(item: str, tagset: Tagset | None, where: str,
                      allow_covert: bool) -> Segment:
    if "=" not in item:
        raise LexiconFormatError(
            f"{where}: affix item {item!r} needs the form=POS-FEATS shape")
    form, posfeats = item.split("=", 1)
    covert = False
    if form.startswith("(") and form.endswith(")"):
        if not allow_covert:
            raise LexiconFormatError(
                f"{where}: covert morphemes are only supported as prefixes")
        covert = True
        form = form[1:-1]
    if not form:
        raise LexiconFormatError(f"{where}: empty form in affix item {item!r}")
    pos, feats = _parse_posfeats(posfeats, tagset, where)
    return Segment(form, pos, feats, form, covert)


def _parse_group(group: str, lemma: str, token: str, tagset: Tagset | None,
                 where: str) -> LexiconAnalysis:
    parts = group.split(":")
    if len(parts) != 3:
        raise LexiconFormatError(
            f"{where}: group {group!r} needs prefixes:host:suffix")
    prefix_part, host_part, suffix_part = parts

    prefixes: list[Segment] = []
    if prefix_part:
        for item in prefix_part.split("+"):
            prefixes.append(_parse_affix_item(item, tagset, where, True))

    suffix: Segment | None = None
    if suffix_part:
        suffix = _parse_affix_item(suffix_part, tagset, where, False)

    explicit = "=" in host_part and "-" not in host_part.split("=", 1)[0]
    if explicit:
        host_form, posfeats = host_part.split("=", 1)
        if host_form.startswith("(") and host_form.endswith(")"):
            raise LexiconFormatError(
                f"{where}: covert morphemes are only supported as prefixes")
        if not host_form:
            raise LexiconFormatError(f"{where}: empty host form in {group!r}")
        pos, feats = _parse_posfeats(posfeats, tagset, where)
    else:
        # Bare host: its surface is the token minus the overt prefixes.
        if suffix is not None:
            raise LexiconFormatError(
                f"{where}: a suffixed analysis needs an explicit host form")
        overt = "".join(p.form for p in prefixes if not p.covert)
        if not token.startswith(overt):
            raise LexiconFormatError(
                f"{where}: prefixes {overt!r} do not start the token {token!r}")
        host_form = token[len(overt):]
        if not host_form:
            raise LexiconFormatError(
                f"{where}: prefixes consume all of token {token!r}")
        pos, feats = _parse_posfeats(host_part, tagset, where)

    segments = prefixes + [Segment(host_form, pos, feats, lemma)]
    if suffix is not None:
        segments.append(suffix)
    return LexiconAnalysis(tuple(segments), len(prefixes))


def parse_lexicon_line(line: str, tagset: Tagset | None = None,
                       where: str = "lexicon"
                       ) -> tuple[str, tuple[LexiconAnalysis, ...]]:
    """One token entry; errors carry the 1-based column of the bad field."""
    fields = [(m.start() + 1, m.group()) for m in re.finditer(r"\S+", line)]
    if len(fields) < 3:
        raise LexiconFormatError(
            f"{where}: an entry needs a token and at least one "
            "analysis-lemma pair")
    if len(fields) % 2 == 0:
        column = fields[-1][0]
        raise LexiconFormatError(
            f"{where}: column {column}: analysis group without a lemma")
    token = fields[0][1]
    analyses: list[LexiconAnalysis] = []
    for i in range(1, len(fields), 2):
        column, group = fields[i]
        lemma = fields[i + 1][1]
        analysis = _parse_group(group, lemma, token, tagset,
                                f"{where}: column {column}")
        if analysis not in analyses:
            analyses.append(analysis)
    return token, tuple(analyses)


def _parse_prefix_directive(line: str, tagset: Tagset | None,
                            where: str) -> tuple[str, tuple[Segment, ...]]:
    fields = line.split()
    if len(fields) != 3:
        raise LexiconFormatError(
            f"{where}: usage is #!prefix SURFACE ITEMS")
    surface, items = fields[1], fields[2]
    segments = tuple(_parse_affix_item(item, tagset, where, True)
                     for item in items.split("+"))
    overt = "".join(s.form for s in segments if not s.covert)
    if overt != surface:
        raise LexiconFormatError(
            f"{where}: overt prefix forms {overt!r} do not spell the "
            f"surface {surface!r}")
    return surface, segments


def parse_lexicon_text(text: str, tagset: Tagset | None = None,
                       what: str = "lexicon") -> Lexicon:
    entries: dict[str, tuple[LexiconAnalysis, ...]] = {}
    prefixes: list[tuple[str, tuple[Segment, ...]]] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        where = f"{what}:{lineno}"
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#!prefix"):
            entry = _parse_prefix_directive(stripped, tagset, where)
            if entry not in prefixes:
                prefixes.append(entry)
            continue
        if stripped.startswith("#"):
            continue
        token, analyses = parse_lexicon_line(line, tagset, where)
        if token in entries:
            raise LexiconFormatError(
                f"{where}: duplicate entry for token {token!r}")
        entries[token] = analyses
    return Lexicon(entries=entries, prefixes=tuple(prefixes))


def default_lexicon_path() -> str:
    """Path of the demo lexicon bundled with the package."""
    from importlib.resources import files
    return str(files("jointparse").joinpath("data", "hebrew_demo.lexicon"))


def load_lexicon(path: str, tagset: Tagset | None = None) -> Lexicon:
    with open(path, "rb") as handle:
        data = handle.read()
    if data.startswith(b"\xef\xbb\xbf"):
        raise LexiconFormatError(
            f"{path} starts with a byte-order mark; save without a BOM")
    return parse_lexicon_text(data.decode("utf-8"), tagset, path)


def add_lexicon_entries(lexicon: Lexicon, lines: list[str],
                        tagset: Tagset | None = None
                        ) -> tuple[Lexicon, int, int]:
    """Return a new lexicon with the entries merged in, atomically.

    Every line is parsed before anything is merged, so a bad batch
    leaves the lexicon unchanged.  A line for a known token replaces
    that token's analyses; counts are (added, replaced).
    """
    batch = parse_lexicon_text("\n".join(lines), tagset, "added entries")
    added = sum(1 for t in batch.entries if t not in lexicon.entries)
    replaced = len(batch.entries) - added
    entries = dict(lexicon.entries)
    entries.update(batch.entries)
    prefixes = list(lexicon.prefixes)
    for item in batch.prefixes:
        if item not in prefixes:
            prefixes.append(item)
    return Lexicon(entries=entries, prefixes=tuple(prefixes)), added, replaced


# ------------------------------------------------------------ tokenization

def _split_word(word: str) -> list[str]:
    lead: list[str] = []
    cur = word
    while cur and cur[0] in PUNCTUATION:
        if cur[0] == '"' and len(cur) == 2:
            break  # the acronym rule: a quote before the last character stays
        lead.append(cur[0])
        cur = cur[1:]
    trail: list[str] = []
    while cur and cur[-1] in PUNCTUATION:
        trail.append(cur[-1])
        cur = cur[:-1]
    middle = [cur] if cur else []
    return lead + middle + list(reversed(trail))


def tokenize_raw(text: str) -> list[str]:
    """Whitespace split plus peeling of leading and trailing punctuation.

    Quotes stay attached right before a word's last character, the
    spelling of Hebrew acronyms.  Characters that transliterations use
    as letters (apostrophe, slash, backtick, hyphen) never split.
    """
    out: list[str] = []
    for word in text.split():
        out.extend(_split_word(word))
    return out


# ------------------------------------------------------- lattice building

def analyze_token(lexicon: Lexicon, oov: OovTable, token: str,
                  position: int = 0,
                  prefix_split: bool = True) -> tuple[LexiconAnalysis, ...]:
    """All candidate analyses of one token.

    Lookup order: exact entry, then the prefix-splitting pass, then the
    out-of-lexicon table.  Analyses do not depend on the position; it is
    accepted for interface symmetry with lattice construction.
    """
    del position
    exact = lexicon.analyses(token)
    if exact:
        return exact
    if prefix_split:
        split = _prefix_split_analyses(lexicon, token)
        if split:
            return split
    return oov.analyses_for(token)


def is_oov(lexicon: Lexicon, token: str, prefix_split: bool = True) -> bool:
    if lexicon.analyses(token):
        return False
    return not (prefix_split and _prefix_split_analyses(lexicon, token))


def _prefix_split_analyses(lexicon: Lexicon,
                           token: str) -> tuple[LexiconAnalysis, ...]:
    out: list[LexiconAnalysis] = []
    ordered = sorted(enumerate(lexicon.prefixes),
                     key=lambda pair: (-len(pair[1][0]), pair[0]))
    for _, (surface, segments) in ordered:
        if not token.startswith(surface) or len(token) <= len(surface):
            continue
        remainder = token[len(surface):]
        for analysis in lexicon.analyses(remainder):
            combined = LexiconAnalysis(
                segments + analysis.segments,
                len(segments) + analysis.host_index)
            if combined not in out:
                out.append(combined)
    return tuple(out)


def build_lattice(lexicon: Lexicon, oov: OovTable, tokens: list[str],
                  prefix_split: bool = True) -> SentenceLattice:
    """Assemble the sentence lattice with trie-shared analysis prefixes.

    Within a token, analyses that start with the same morphemes share
    nodes: each distinct proper prefix of a segment sequence gets one
    intermediate node, and every analysis ends at the token's single
    exit node.  Identical arcs from overlapping analyses are merged.
    """
    arcs: list[LatticeArc] = []
    boundaries: list[tuple[int, int]] = []
    entry = 0
    for position, token in enumerate(tokens, start=1):
        analyses = analyze_token(lexicon, oov, token, position, prefix_split)
        trie: dict[tuple[Segment, ...], int] = {}
        next_node = entry + 1
        for analysis in analyses:
            for cut in range(1, len(analysis.segments)):
                key = analysis.segments[:cut]
                if key not in trie:
                    trie[key] = next_node
                    next_node += 1
        exit_ = next_node
        seen: set[LatticeArc] = set()
        for analysis in analyses:
            node = entry
            n = len(analysis.segments)
            for cut, segment in enumerate(analysis.segments, start=1):
                to = exit_ if cut == n else trie[analysis.segments[:cut]]
                arc = LatticeArc(node, to, segment.form, segment.lemma,
                                 segment.pos, segment.feats, position)
                if arc not in seen:
                    seen.add(arc)
                    arcs.append(arc)
                node = to
        boundaries.append((entry, exit_))
        entry = exit_
    return SentenceLattice(
        tokens=tuple(tokens), arcs=tuple(arcs), end_node=entry,
        token_boundaries=tuple(boundaries))


def oov_token_indices(lexicon: Lexicon, tokens: list[str],
                      prefix_split: bool = True) -> list[int]:
    """1-based indices of tokens analyzed by the out-of-lexicon table."""
    return [i for i, token in enumerate(tokens, start=1)
            if is_oov(lexicon, token, prefix_split)]


# ------------------------------------------------------------- rare shapes

def _shape_of(segments: tuple[Segment, ...]) -> LexiconAnalysis:
    host = max(range(len(segments)),
               key=lambda i: (len(segments[i].form), i))
    shaped = list(segments)
    original = segments[host]
    shaped[host] = Segment("", original.pos, original.feats, "",
                           original.covert)
    return LexiconAnalysis(tuple(shaped), host)


def build_oov_table(token_segments: list[tuple[str, tuple[Segment, ...]]],
                    rare_threshold: int = 2,
                    max_templates: int = 10) -> OovTable:
    """Distill rare-token analysis shapes from gold segmentations.

    Input pairs are (token, its gold morpheme segments).  Tokens seen
    at most rare_threshold times contribute their abstracted shapes;
    the most frequent shapes, capped at max_templates, become the
    analyses offered for unknown tokens.
    """
    counts: dict[str, int] = {}
    for token, _ in token_segments:
        counts[token] = counts.get(token, 0) + 1
    shape_freq: dict[LexiconAnalysis, int] = {}
    order: dict[LexiconAnalysis, int] = {}
    for token, segments in token_segments:
        if counts[token] > rare_threshold:
            continue
        shape = _shape_of(segments)
        shape_freq[shape] = shape_freq.get(shape, 0) + 1
        order.setdefault(shape, len(order))
    ranked = sorted(shape_freq.items(),
                    key=lambda item: (-item[1], order[item[0]]))
    return OovTable(templates=tuple(ranked[:max_templates]),
                    rare_threshold=rare_threshold)
