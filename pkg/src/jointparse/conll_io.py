"""Readers and writers for every on-disk format the toolkit speaks.

Four delimited formats share conventions: tab-separated columns, one
sentence per block, a blank line terminating every block including the
last.  Readers reject byte-order marks and carriage returns outright
rather than repairing them, and name the fix in the error message.
Writers always produce files the readers round-trip byte for byte.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from jointparse.core import (
    DepTree,
    LatticeArc,
    MorphFeatures,
    MorphPath,
    SentenceLattice,
    Tagset,
    token_form,
    validate_lattice,
)
from jointparse.features import DEFAULT_TEMPLATES, FeatureTemplate, Model

MODEL_FORMAT = "lattice-joint-model"
MODEL_VERSION = 1


class FileFormatError(ValueError):
    """Input file violates its format contract."""


class TokenFormatError(FileFormatError):
    pass


class LatticeFormatError(FileFormatError):
    pass


class ConllFormatError(FileFormatError):
    pass


class ModelFormatError(FileFormatError):
    pass


def _decode(data: bytes, what: str) -> str:
    if data.startswith(b"\xef\xbb\xbf"):
        raise FileFormatError(
            f"{what} starts with a UTF-8 byte-order mark; save the file "
            "without a BOM")
    if b"\r" in data:
        raise FileFormatError(
            f"{what} contains carriage returns; convert CRLF line endings "
            "to LF")
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as err:
        raise FileFormatError(f"{what} is not valid UTF-8: {err}") from None


def _read_text(path: str) -> str:
    with open(path, "rb") as handle:
        return _decode(handle.read(), path)


def _blocks(text: str, what: str) -> list[list[tuple[int, str]]]:
    """Split into blank-line-terminated blocks of (line_number, line)."""
    out: list[list[tuple[int, str]]] = []
    current: list[tuple[int, str]] = []
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # artifact of splitting text that ends in a newline
    for lineno, line in enumerate(lines, start=1):
        if line == "":
            if current:
                out.append(current)
                current = []
        else:
            current.append((lineno, line))
    if current:
        raise FileFormatError(
            f"{what} does not end with a blank line after the last "
            "sentence; add one")
    return out


# ------------------------------------------------------------------ tokens

def parse_token_text(text: str, what: str = "token input") -> list[list[str]]:
    sentences = []
    for block in _blocks(text, what):
        tokens = []
        for lineno, line in block:
            if line != line.strip() or " " in line or "\t" in line:
                raise TokenFormatError(
                    f"{what}:{lineno}: token line {line!r} contains whitespace")
            tokens.append(line)
        sentences.append(tokens)
    return sentences


def read_tokens(path: str) -> list[list[str]]:
    """One token per line, one blank line after each sentence."""
    return parse_token_text(_read_text(path), path)


def format_tokens(sentences: list[list[str]]) -> str:
    parts = []
    for tokens in sentences:
        parts.append("\n".join(tokens) + "\n\n")
    return "".join(parts)


# ----------------------------------------------------------------- lattice

def _lattice_rows(lattice: SentenceLattice) -> list[LatticeArc]:
    return sorted(lattice.arcs, key=lambda a: (a.from_node, a.to_node))


def _lattice_line(arc: LatticeArc) -> str:
    return "\t".join((
        str(arc.from_node), str(arc.to_node), arc.form, arc.lemma,
        arc.pos, arc.pos, arc.feats.serialize(), str(arc.token_index)))


def format_lattices(lattices: list[SentenceLattice]) -> str:
    """Eight tab-separated columns; CPOSTAG and POSTAG are written alike."""
    parts = []
    for lattice in lattices:
        lines = [_lattice_line(arc) for arc in _lattice_rows(lattice)]
        parts.append("\n".join(lines) + "\n\n" if lines else "\n")
    return "".join(parts)


def format_paths(paths: list[MorphPath]) -> str:
    """Disambiguated output in the lattice format.

    Node ids are kept as they appear in the source lattice, so every row
    of a selected path is literally one of the full lattice's rows.
    """
    parts = []
    for path in paths:
        lines = [_lattice_line(arc) for arc in path.arcs]
        parts.append("\n".join(lines) + "\n\n" if lines else "\n")
    return "".join(parts)


def parse_lattice_text(text: str, what: str = "lattice input"
                       ) -> list[SentenceLattice]:
    lattices = []
    for block in _blocks(text, what):
        arcs: list[LatticeArc] = []
        for lineno, line in block:
            cols = line.split("\t")
            if len(cols) != 8:
                raise LatticeFormatError(
                    f"{what}:{lineno}: expected 8 columns, got {len(cols)}")
            try:
                from_node, to_node = int(cols[0]), int(cols[1])
                token_index = int(cols[7])
            except ValueError:
                raise LatticeFormatError(
                    f"{what}:{lineno}: FROM, TO and TOKEN must be integers"
                ) from None
            if cols[4] != cols[5]:
                raise LatticeFormatError(
                    f"{what}:{lineno}: CPOSTAG {cols[4]!r} differs from "
                    f"POSTAG {cols[5]!r}")
            try:
                feats = MorphFeatures.parse(cols[6])
                arcs.append(LatticeArc(
                    from_node, to_node, cols[2], cols[3], cols[4], feats,
                    token_index))
            except ValueError as err:
                raise LatticeFormatError(f"{what}:{lineno}: {err}") from None
        lattices.append(_assemble_lattice(arcs, what, block[0][0]))
    return lattices


def _assemble_lattice(arcs: list[LatticeArc], what: str,
                      lineno: int) -> SentenceLattice:
    n_tokens = max(a.token_index for a in arcs)
    boundaries = []
    for t in range(1, n_tokens + 1):
        token_arcs = [a for a in arcs if a.token_index == t]
        if not token_arcs:
            raise LatticeFormatError(
                f"{what}:{lineno}: no rows for token {t}")
        boundaries.append((min(a.from_node for a in token_arcs),
                           max(a.to_node for a in token_arcs)))
    shell = SentenceLattice(
        tokens=("",) * n_tokens, arcs=tuple(arcs),
        end_node=boundaries[-1][1], token_boundaries=tuple(boundaries))
    tokens = tuple(token_form(shell, t) for t in range(1, n_tokens + 1))
    lattice = SentenceLattice(
        tokens=tokens, arcs=tuple(arcs), end_node=shell.end_node,
        token_boundaries=tuple(boundaries))
    problems = validate_lattice(lattice)
    if problems:
        raise LatticeFormatError(
            f"{what}:{lineno}: invalid lattice: " + "; ".join(problems))
    return lattice


def read_lattice(path: str) -> list[SentenceLattice]:
    """Rebuild lattices from a file.

    Token surfaces are reconstructed from arc forms, so a token whose
    written analyses all involve covert morphemes comes back with the
    covert material spliced in; the file format does not store surfaces.
    """
    return parse_lattice_text(_read_text(path), path)


def write_lattice(lattices: list[SentenceLattice], path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(format_lattices(lattices))


# ------------------------------------------------------------------- conll

@dataclass(frozen=True)
class ConllRow:
    id: int
    form: str
    lemma: str
    pos: str
    feats: MorphFeatures
    head: int
    deprel: str


def rows_from_parse(path: MorphPath, tree: DepTree) -> list[ConllRow]:
    rows = []
    for i, arc in enumerate(path.arcs, start=1):
        rows.append(ConllRow(
            id=i, form=arc.form, lemma=arc.lemma, pos=arc.pos,
            feats=arc.feats, head=tree.head_of(i), deprel=tree.label_of(i)))
    return rows


def format_conll(sentences: list[list[ConllRow]]) -> str:
    parts = []
    for rows in sentences:
        lines = []
        for row in rows:
            lines.append("\t".join((
                str(row.id), row.form, row.lemma, row.pos, row.pos,
                row.feats.serialize(), str(row.head), row.deprel, "_", "_")))
        parts.append("\n".join(lines) + "\n\n" if lines else "\n")
    return "".join(parts)


def parse_conll_text(text: str, what: str = "tree input"
                     ) -> list[list[ConllRow]]:
    sentences = []
    for block in _blocks(text, what):
        rows: list[ConllRow] = []
        for lineno, line in block:
            cols = line.split("\t")
            if len(cols) != 10:
                raise ConllFormatError(
                    f"{what}:{lineno}: expected 10 columns, got {len(cols)}")
            try:
                row_id, head = int(cols[0]), int(cols[6])
            except ValueError:
                raise ConllFormatError(
                    f"{what}:{lineno}: ID and HEAD must be integers") from None
            if cols[3] != cols[4]:
                raise ConllFormatError(
                    f"{what}:{lineno}: CPOSTAG {cols[3]!r} differs from "
                    f"POSTAG {cols[4]!r}")
            if row_id != len(rows) + 1:
                raise ConllFormatError(
                    f"{what}:{lineno}: IDs must count 1.. in order, got "
                    f"{row_id}")
            if not cols[7]:
                raise ConllFormatError(f"{what}:{lineno}: empty DEPREL")
            try:
                feats = MorphFeatures.parse(cols[5])
            except ValueError as err:
                raise ConllFormatError(f"{what}:{lineno}: {err}") from None
            rows.append(ConllRow(
                id=row_id, form=cols[1], lemma=cols[2], pos=cols[3],
                feats=feats, head=head, deprel=cols[7]))
        n = len(rows)
        for row in rows:
            if not 0 <= row.head <= n:
                raise ConllFormatError(
                    f"{what}: sentence at line {block[0][0]}: head "
                    f"{row.head} of morpheme {row.id} is out of range")
            if row.head == row.id:
                raise ConllFormatError(
                    f"{what}: morpheme {row.id} is its own head")
        sentences.append(rows)
    return sentences


def read_conll(path: str) -> list[list[ConllRow]]:
    return parse_conll_text(_read_text(path), path)


def write_conll(sentences: list[list[ConllRow]], path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(format_conll(sentences))


# ---------------------------------------------------------------- segments

def format_segments(sentences: list[MorphPath | list[str]]) -> str:
    """One segment form per line; accepts paths or plain form lists."""
    parts = []
    for sentence in sentences:
        forms = ([arc.form for arc in sentence.arcs]
                 if isinstance(sentence, MorphPath) else list(sentence))
        parts.append("\n".join(forms) + "\n\n" if forms else "\n")
    return "".join(parts)


def parse_segment_text(text: str,
                       what: str = "segment input") -> list[list[str]]:
    return parse_token_text(text, what)


def read_segments(path: str) -> list[list[str]]:
    """Segment files share the token file shape: one form per line."""
    return parse_segment_text(_read_text(path), path)


def write_segments(paths: list[MorphPath], path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(format_segments(paths))


# ------------------------------------------------------------------- model

def model_to_json(model: Model) -> str:
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "mode": model.mode,
        "beam_width": model.beam_width,
        "seed": model.seed,
        "tagset_hash": model.tagset_hash,
        "labels": list(model.labels),
        "templates": [[t.name, [list(term) for term in t.terms]]
                      for t in model.templates],
        "ticks": model.ticks,
        "finalized": model.finalized,
        "weights": {str(f): w for f, w in model.weights.items()},
        "averaged": {str(f): w for f, w in model.averaged.items()},
        "meta": model.meta,
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def save_model(model: Model, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(model_to_json(model))


def model_from_json(text: str, tagset: Tagset,
                    what: str = "model input") -> Model:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as err:
        raise ModelFormatError(f"{what}: not valid JSON: {err}") from None
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"{what}: not a {MODEL_FORMAT} file")
    if payload.get("version") != MODEL_VERSION:
        raise ModelFormatError(
            f"{what}: model version {payload.get('version')!r} is not "
            f"supported (expected {MODEL_VERSION})")
    if payload.get("tagset_hash") != tagset.hash():
        raise ModelFormatError(
            f"{what}: model was built against tagset {payload.get('tagset_hash')!r} "
            f"but the active tagset hashes to {tagset.hash()!r}")
    labels = tuple(payload.get("labels", ()))
    unknown = [l for l in labels if not tagset.has_label(l)]
    if unknown:
        raise ModelFormatError(f"{what}: labels missing from tagset: {unknown}")
    try:
        templates = tuple(
            FeatureTemplate(name, tuple((a, attr) for a, attr in terms))
            for name, terms in payload["templates"])
        model = Model(
            templates=templates,
            labels=labels,
            tagset_hash=payload["tagset_hash"],
            mode=payload["mode"],
            beam_width=int(payload["beam_width"]),
            seed=int(payload["seed"]),
            weights={int(f): float(w)
                     for f, w in payload.get("weights", {}).items()},
            averaged={int(f): float(w)
                      for f, w in payload.get("averaged", {}).items()},
            ticks=int(payload.get("ticks", 0)),
            finalized=bool(payload.get("finalized", False)),
            meta=payload.get("meta", {}),
        )
    except (KeyError, TypeError, ValueError) as err:
        raise ModelFormatError(f"{what}: malformed model payload: {err}") from None
    return model


def load_model(path: str, tagset: Tagset) -> Model:
    """Load and validate a model; tagset mismatches are hard errors."""
    return model_from_json(_read_text(path), tagset, path)


def default_templates() -> tuple[FeatureTemplate, ...]:
    return DEFAULT_TEMPLATES
