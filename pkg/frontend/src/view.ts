/**
 * Render an annotation view to HTML strings.
 *
 * Every function is pure string-to-string so the whole presentation
 * layer can be replayed and snapshot-compared on recorded responses.
 */
import type { LineDiagnostic } from "./api.js";
import type { AnnotationView, DepRow } from "./parse.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function tableRows(cells: string[][]): string {
  return cells
    .map((row) => `<tr>${row.map((c) => `<td>${escapeHtml(c)}</td>`).join("")}</tr>`)
    .join("\n");
}

function segmentTable(view: AnnotationView, column: (row: DepRow) => string): string {
  const body = tableRows(view.segments.map((row) => [String(row.id), row.form, column(row)]));
  return `<table class="segments"><tbody>\n${body}\n</tbody></table>`;
}

export function renderSegmentedText(view: AnnotationView): string {
  return `<div class="segmented" dir="rtl">${escapeHtml(view.segmentedText)}</div>`;
}

export function renderPos(view: AnnotationView): string {
  return segmentTable(view, (row) => row.pos);
}

export function renderLemmas(view: AnnotationView): string {
  return segmentTable(view, (row) => row.lemma);
}

export function renderFeatures(view: AnnotationView): string {
  return segmentTable(view, (row) => row.feats);
}

const SLOT = 96; // px per segment column in the arc diagram

/** Labeled arcs above one right-to-left segment row. */
export function renderArcs(view: AnnotationView): string {
  const n = view.segments.length;
  const width = Math.max(n * SLOT, SLOT);
  const height = 170;
  const baseline = height - 34;
  // Right-to-left: segment 1 takes the rightmost slot.
  const x = (id: number) => width - (id - 0.5) * SLOT;
  const parts: string[] = [];
  for (const row of view.segments) {
    parts.push(
      `<text class="seg-form" x="${x(row.id)}" y="${height - 14}" ` +
        `text-anchor="middle">${escapeHtml(row.form)}</text>`,
    );
  }
  for (const row of view.segments) {
    if (row.head === 0) {
      const rx = x(row.id);
      parts.push(
        `<line class="root-arc" x1="${rx}" y1="8" x2="${rx}" y2="${baseline - 2}"/>`,
        `<text class="arc-label" x="${rx + 4}" y="20">${escapeHtml(row.deprel)}</text>`,
      );
      continue;
    }
    const from = x(row.head);
    const to = x(row.id);
    const mid = (from + to) / 2;
    const span = Math.abs(row.head - row.id);
    const peak = baseline - Math.min(22 + 26 * span, baseline - 12);
    parts.push(
      `<path class="arc" d="M ${from} ${baseline} Q ${mid} ${peak} ${to} ${baseline}"/>`,
      `<text class="arc-label" x="${mid}" y="${peak + 8}" text-anchor="middle">` +
        `${escapeHtml(row.deprel)}</text>`,
      `<path class="arrow" d="M ${to - 4} ${baseline - 7} L ${to} ${baseline} L ${to + 4} ${baseline - 7} Z"/>`,
    );
  }
  return (
    `<svg class="dep-arcs" viewBox="0 0 ${width} ${height}" ` +
    `width="${width}" height="${height}" role="img">\n${parts.join("\n")}\n</svg>`
  );
}

export function renderDependencies(view: AnnotationView): string {
  const head = (row: DepRow) =>
    row.head === 0 ? "(root)" : (view.segments[row.head - 1]?.form ?? "?");
  const body = tableRows(
    view.segments.map((row) => [String(row.id), row.form, row.deprel, head(row)]),
  );
  return (
    `${renderArcs(view)}\n` +
    `<table class="segments"><tbody>\n${body}\n</tbody></table>`
  );
}

/** Full analysis table; rows of OOV tokens carry the oov class. */
export function renderLatticeTable(view: AnnotationView): string {
  const rows = view.latticeRows
    .map((row) => {
      const flagged = view.oovTokens.includes(row.token);
      const cells = [
        String(row.from),
        String(row.to),
        row.form,
        row.lemma,
        row.pos,
        row.feats,
        String(row.token),
      ]
        .map((c) => `<td>${escapeHtml(c)}</td>`)
        .join("");
      return `<tr${flagged ? ' class="oov"' : ""}>${cells}</tr>`;
    })
    .join("\n");
  return (
    `<table class="lattice"><thead><tr><th>from</th><th>to</th><th>form</th>` +
    `<th>lemma</th><th>pos</th><th>feats</th><th>token</th></tr></thead>` +
    `<tbody>\n${rows}\n</tbody></table>`
  );
}

export function renderBatchErrors(lines: LineDiagnostic[]): string {
  const items = lines
    .map((d) => `<li>line ${d.line}: ${escapeHtml(d.error)}</li>`)
    .join("\n");
  return `<ul class="batch-errors">\n${items}\n</ul>`;
}

/** The five annotation layers plus the lattice panel. */
export function renderView(view: AnnotationView): string {
  const layer = (id: string, title: string, body: string) =>
    `<details open class="layer" id="layer-${id}"><summary>${title}</summary>\n` +
    `${body}\n</details>`;
  return [
    `<section class="layer" id="layer-segmented"><h3>Segmented Text</h3>\n` +
      `${renderSegmentedText(view)}\n</section>`,
    layer("pos", "POS", renderPos(view)),
    layer("lemmas", "Lemmas", renderLemmas(view)),
    layer("features", "Features", renderFeatures(view)),
    layer("dependencies", "Dependencies", renderDependencies(view)),
    layer("lattice", "Lattice", renderLatticeTable(view)),
  ].join("\n");
}
