/**
 * DOM rendering for the judge console: context, reference abstract,
 * anonymized candidate cards, and four ranking controls.
 *
 * Candidates carry only their opaque ids and text; system identity never
 * reaches the client, so nothing here can leak it.
 */

import { JudgeSession } from "./session.js";
import { DIMENSIONS, type Dimension } from "./types.js";

const TIER_LABELS = ["1st", "2nd", "3rd"];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderCandidates(session: JudgeSession): HTMLElement {
  const list = el("div", "candidates");
  session.sample!.candidates.forEach((candidate, index) => {
    const card = el("article", "candidate-card");
    card.dataset.candidateId = candidate.candidate_id;
    card.append(
      el("h3", "candidate-label", `Citation ${String.fromCharCode(65 + index)}`),
      el("p", "candidate-text", candidate.text),
    );
    list.append(card);
  });
  return list;
}

function renderDimensionControl(session: JudgeSession, dimension: Dimension): HTMLElement {
  const block = el("fieldset", "dimension");
  block.dataset.dimension = dimension;
  block.append(el("legend", "dimension-name", dimension));

  session.sample!.candidates.forEach((candidate, index) => {
    const row = el("div", "rank-row");
    row.append(el("span", "rank-candidate", `Citation ${String.fromCharCode(65 + index)}`));
    TIER_LABELS.forEach((label, tierIndex) => {
      const tier = tierIndex + 1;
      const button = el("button", "rank-button", label);
      button.type = "button";
      button.dataset.candidateId = candidate.candidate_id;
      button.dataset.tier = String(tier);
      if (session.drafts[dimension]?.[candidate.candidate_id] === tier) {
        button.classList.add("selected");
      }
      button.addEventListener("click", () => {
        session.setTier(dimension, candidate.candidate_id, tier);
        rerender(session);
      });
      row.append(button);
    });
    block.append(row);
  });

  const tieButton = el("button", "tie-button", "Indistinguishable");
  tieButton.type = "button";
  tieButton.addEventListener("click", () => {
    session.tieAll(dimension);
    rerender(session);
  });
  block.append(tieButton);
  if (session.isDimensionComplete(dimension)) block.classList.add("complete");
  return block;
}

function renderJudging(session: JudgeSession, root: HTMLElement): void {
  const sample = session.sample!;
  const header = el("header", "sample-header");
  header.append(
    el(
      "p",
      "progress",
      `Sample ${session.progress.completed + 1} of ${session.progress.total}`,
    ),
  );
  const input = el("section", "shown-input");
  input.append(
    el("h2", undefined, "Citation context"),
    el("p", "context", sample.context),
    el("h2", undefined, "Reference paper"),
    el("p", "reference-title", sample.reference_title),
    el("p", "reference-abstract", sample.reference_abstract),
  );

  const controls = el("section", "rankings");
  for (const dimension of DIMENSIONS) {
    controls.append(renderDimensionControl(session, dimension));
  }

  const submit = el("button", "submit-button", "Submit judgments");
  submit.type = "button";
  submit.disabled = !session.canSubmit();
  submit.addEventListener("click", () => {
    void session.submit().then(() => rerender(session));
  });

  root.append(header, input, renderCandidates(session), controls, submit);
}

function renderDone(session: JudgeSession, root: HTMLElement): void {
  const box = el("section", "completion");
  box.append(
    el("h2", undefined, "All samples judged"),
    el(
      "p",
      "progress",
      `Progress ${session.progress.completed}/${session.progress.total}`,
    ),
  );
  root.append(box);
}

function renderError(session: JudgeSession, root: HTMLElement): void {
  const box = el("section", "error-box");
  box.append(el("p", "error-message", session.lastError ?? "Submission failed."));
  const retry = el("button", "retry-button", "Retry");
  retry.type = "button";
  retry.addEventListener("click", () => {
    void session.retry().then(() => rerender(session));
  });
  box.append(retry);
  root.append(box);
}

let mountedRoot: HTMLElement | null = null;
let mountedSession: JudgeSession | null = null;

export function rerender(session: JudgeSession): void {
  if (mountedRoot && mountedSession === session) render(session, mountedRoot);
}

export function render(session: JudgeSession, root: HTMLElement): void {
  mountedRoot = root;
  mountedSession = session;
  root.replaceChildren();
  switch (session.phase) {
    case "loading":
    case "submitting":
      root.append(el("p", "status", "Loading…"));
      break;
    case "done":
      renderDone(session, root);
      break;
    case "error":
      renderError(session, root);
      break;
    case "judging":
      renderJudging(session, root);
      break;
  }
}

/**
 * Keyboard shortcuts: digits 1-9 assign tiers column-wise. With three
 * candidates, 1/2/3 rank Citation A, 4/5/6 Citation B, 7/8/9 Citation C in
 * the active dimension; Tab cycles the active dimension, "t" ties it, and
 * Enter submits when complete.
 */
export function installKeyboardShortcuts(session: JudgeSession): (e: KeyboardEvent) => void {
  let activeDimension = 0;
  const handler = (event: KeyboardEvent) => {
    if (session.phase !== "judging" || !session.sample) return;
    const dimension = DIMENSIONS[activeDimension]!;
    if (event.key === "Tab") {
      event.preventDefault();
      activeDimension = (activeDimension + 1) % DIMENSIONS.length;
      return;
    }
    if (event.key === "t") {
      session.tieAll(dimension);
      rerender(session);
      return;
    }
    if (event.key === "Enter" && session.canSubmit()) {
      void session.submit().then(() => rerender(session));
      return;
    }
    const digit = Number(event.key);
    if (digit >= 1 && digit <= 9) {
      const candidateIndex = Math.floor((digit - 1) / 3);
      const tier = ((digit - 1) % 3) + 1;
      const candidate = session.sample.candidates[candidateIndex];
      if (candidate) {
        session.setTier(dimension, candidate.candidate_id, tier);
        rerender(session);
      }
    }
  };
  document.addEventListener("keydown", handler);
  return handler;
}
