/** Rendering replayed on recorded service responses. */
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import type { LatticeResponse, LineDiagnostic, ParseResponse } from "../src/api.js";
import { buildView, edgeSet, type AnnotationView } from "../src/parse.js";
import {
  renderArcs,
  renderBatchErrors,
  renderLatticeTable,
  renderView,
} from "../src/view.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf8")) as T;
}

function recordedView(sentence: string, joint: string, lattice: string): AnnotationView {
  return buildView(
    sentence,
    fixture<ParseResponse>(joint),
    fixture<LatticeResponse>(lattice),
  );
}

const snm = recordedView("hbn /snm b.sl", "joint_snm.json", "lattice_snm.json");
const skb = recordedView("hbn /skb b.sl", "joint_skb.json", "lattice_skb.json");

describe("the two near-identical sentences", () => {
  it("render two distinct dependency structures", () => {
    expect(edgeSet(snm)).not.toEqual(edgeSet(skb));
    expect(renderView(snm)).not.toBe(renderView(skb));
  });

  it("populate all five layers and the lattice table", () => {
    for (const view of [snm, skb]) {
      const html = renderView(view);
      for (const id of ["segmented", "pos", "lemmas", "features", "dependencies", "lattice"]) {
        expect(html).toContain(`id="layer-${id}"`);
      }
      expect(view.segmentedText.length).toBeGreaterThan(0);
      expect(view.segments.length).toBeGreaterThan(0);
      expect(view.latticeRows.length).toBeGreaterThan(view.segments.length);
      expect(html).toContain("<svg");
    }
  });

  it("draw one arc or root marker per segment", () => {
    const arcs = renderArcs(snm);
    const drawn = (arcs.match(/class="arc"/g) ?? []).length;
    const roots = (arcs.match(/class="root-arc"/g) ?? []).length;
    expect(drawn + roots).toBe(snm.segments.length);
    expect(roots).toBe(1);
  });

  it("keep disambiguated rows a subset of the full lattice", () => {
    for (const view of [snm, skb]) {
      const all = new Set(view.latticeRows.map((r) => JSON.stringify(r)));
      for (const row of view.pathRows) {
        expect(all.has(JSON.stringify(row))).toBe(true);
      }
    }
  });

  it("match their recorded snapshots", () => {
    expect(renderView(snm)).toMatchSnapshot("snm");
    expect(renderView(skb)).toMatchSnapshot("skb");
  });
});

describe("the lexical-gap workflow, replayed", () => {
  const before = recordedView(
    "lymph ql",
    "joint_lymph_before.json",
    "lattice_lymph_before.json",
  );
  const after = recordedView(
    "lymph ql",
    "joint_lymph_after.json",
    "lattice_lymph_after.json",
  );

  it("highlights the unknown token before the fix", () => {
    expect(before.oovTokens).toEqual([1]);
    expect(renderLatticeTable(before)).toContain('class="oov"');
    const fallback = before.latticeRows.find((r) => r.form === "lymph");
    expect(fallback?.pos).toBe("NNP");
  });

  it("clears the highlight and shows the new analysis after", () => {
    expect(after.oovTokens).toEqual([]);
    expect(renderLatticeTable(after)).not.toContain('class="oov"');
    const noun = after.latticeRows.find((r) => r.form === "lymph");
    expect(noun?.pos).toBe("NN");
    expect(noun?.feats).toBe("gen=F|num=S");
  });

  it("matches its recorded snapshots", () => {
    expect(renderView(before)).toMatchSnapshot("lymph-before");
    expect(renderView(after)).toMatchSnapshot("lymph-after");
  });

  it("renders rejected batches as per-line diagnostics", () => {
    const rejection = fixture<{ lines: LineDiagnostic[] }>("admin_rejected.json");
    const html = renderBatchErrors(rejection.lines);
    expect(rejection.lines.length).toBe(2);
    for (const diagnostic of rejection.lines) {
      expect(html).toContain(`line ${diagnostic.line}:`);
    }
    expect(html).toMatchSnapshot("batch-errors");
  });
});

describe("markup safety", () => {
  it("escapes markup arriving in any field", () => {
    const view = buildView(
      "x",
      {
        ma_lattice: '0\t1\t<b>\t&\tNN\tNN\t_\t1\n\n',
        md_lattice: '0\t1\t<b>\t&\tNN\tNN\t_\t1\n\n',
        dep_tree: '1\t<b>\t&\tNN\tNN\t_\t0\t"quo"\t_\t_\n\n',
      },
      { ma_lattice: '0\t1\t<b>\t&\tNN\tNN\t_\t1\n\n', oov: [] },
    );
    const html = renderView(view);
    expect(html).not.toContain("<b>");
    expect(html).toContain("&lt;b&gt;");
    expect(html).toContain("&quot;quo&quot;");
  });
});
