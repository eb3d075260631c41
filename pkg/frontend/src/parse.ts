/**
 * Parse the service's delimited text layers into table models.
 *
 * The view is a pure function of one set of service responses; nothing
 * here segments, tags, or attaches anything on its own.
 */
import type { LatticeResponse, ParseResponse } from "./api.js";

export interface LatticeRow {
  from: number;
  to: number;
  form: string;
  lemma: string;
  pos: string;
  feats: string;
  token: number;
}

export interface DepRow {
  id: number;
  form: string;
  lemma: string;
  pos: string;
  feats: string;
  head: number;
  deprel: string;
}

export interface AnnotationView {
  sentence: string;
  segments: DepRow[];
  segmentedText: string;
  pathRows: LatticeRow[];
  latticeRows: LatticeRow[];
  oovTokens: number[];
}

function fields(line: string, count: number, what: string): string[] {
  const parts = line.split("\t");
  if (parts.length !== count) {
    throw new Error(`${what}: expected ${count} columns, got ${parts.length}`);
  }
  return parts;
}

/** First sentence block of a lattice layer (FROM TO FORM LEMMA C P F TOK). */
export function parseLattice(text: string): LatticeRow[] {
  const rows: LatticeRow[] = [];
  for (const line of text.split("\n")) {
    if (!line) break;
    const f = fields(line, 8, "lattice row");
    rows.push({
      from: Number(f[0]),
      to: Number(f[1]),
      form: f[2]!,
      lemma: f[3]!,
      pos: f[4]!,
      feats: f[6]!,
      token: Number(f[7]),
    });
  }
  return rows;
}

/** First sentence block of a CoNLL layer. */
export function parseConll(text: string): DepRow[] {
  const rows: DepRow[] = [];
  for (const line of text.split("\n")) {
    if (!line) break;
    const f = fields(line, 10, "tree row");
    rows.push({
      id: Number(f[0]),
      form: f[1]!,
      lemma: f[2]!,
      pos: f[3]!,
      feats: f[5]!,
      head: Number(f[6]),
      deprel: f[7]!,
    });
  }
  return rows;
}

export function buildView(
  sentence: string,
  joint: ParseResponse,
  lattice: LatticeResponse,
): AnnotationView {
  const segments = parseConll(joint.dep_tree);
  return {
    sentence,
    segments,
    segmentedText: segments.map((row) => row.form).join(" "),
    pathRows: parseLattice(joint.md_lattice),
    latticeRows: parseLattice(lattice.ma_lattice),
    oovTokens: lattice.oov,
  };
}

/** Labeled edges as comparable strings, for telling two trees apart. */
export function edgeSet(view: AnnotationView): string[] {
  return view.segments
    .map((row) => `${row.head}>${row.id}:${row.deprel}`)
    .sort();
}
