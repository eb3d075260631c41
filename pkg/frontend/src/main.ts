/** DOM wiring: fetch on submit, render, and the lexicon-gap workflow. */
import {
  adminEnabled,
  fetchJoint,
  fetchLattice,
  postLexicon,
  LatestOnly,
  ServiceError,
} from "./api.js";
import { buildView } from "./parse.js";
import { renderBatchErrors, renderView } from "./view.js";

declare global {
  interface Window {
    JOINTPARSE_BASE?: string;
  }
}

const base = window.JOINTPARSE_BASE ?? "http://127.0.0.1:8000";
const latest = new LatestOnly();

const el = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

const sentenceInput = el<HTMLInputElement>("sentence");
const submitButton = el<HTMLButtonElement>("submit");
const banner = el<HTMLElement>("banner");
const viewRoot = el<HTMLElement>("view");
const adminSection = el<HTMLElement>("admin");
const lexiconInput = el<HTMLTextAreaElement>("lexicon-lines");
const lexiconButton = el<HTMLButtonElement>("lexicon-submit");
const lexiconErrors = el<HTMLElement>("lexicon-errors");

let currentSentence = "";

function showError(err: unknown): void {
  const detail =
    err instanceof ServiceError
      ? `${err.message}${err.incident ? ` (incident ${err.incident})` : ""}`
      : "service unreachable";
  banner.innerHTML =
    `<span>${detail}</span> <button id="dismiss" type="button">dismiss</button>`;
  banner.hidden = false;
  el<HTMLButtonElement>("dismiss").onclick = () => {
    banner.hidden = true;
  };
}

async function submitSentence(sentence: string): Promise<void> {
  // A stale response resolves null and leaves the newer view alone.
  const result = await latest.run(async () => {
    const [joint, lattice] = await Promise.all([
      fetchJoint(base, sentence),
      fetchLattice(base, sentence),
    ]);
    return buildView(sentence, joint, lattice);
  });
  if (result === null) return;
  currentSentence = sentence;
  banner.hidden = true;
  viewRoot.innerHTML = renderView(result);
}

submitButton.onclick = () => {
  submitSentence(sentenceInput.value.trim()).catch(showError);
};
sentenceInput.oninput = () => {
  submitButton.disabled = sentenceInput.value.trim() === "";
};
sentenceInput.onkeydown = (event) => {
  if (event.key === "Enter" && !submitButton.disabled) submitButton.click();
};
submitButton.disabled = true;

lexiconButton.onclick = () => {
  const lines = lexiconInput.value
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line !== "");
  lexiconErrors.innerHTML = "";
  postLexicon(base, lines)
    .then(() => {
      lexiconInput.value = "";
      // Re-parse so a fixed lexical gap visibly loses its highlight.
      if (currentSentence) return submitSentence(currentSentence);
      return undefined;
    })
    .catch((err: unknown) => {
      if (err instanceof ServiceError && err.lines) {
        lexiconErrors.innerHTML = renderBatchErrors(err.lines);
        return;
      }
      showError(err);
    });
};

adminEnabled(base)
  .then((enabled) => {
    adminSection.hidden = !enabled;
  })
  .catch(() => {
    adminSection.hidden = true;
  });
