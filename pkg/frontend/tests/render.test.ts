// @vitest-environment happy-dom
import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { render } from "../src/render.js";
import { JudgeSession } from "../src/session.js";
import { DIMENSIONS } from "../src/types.js";
import { FakeServer, makeSamples } from "./fake-server.js";

async function mountSession(): Promise<{ session: JudgeSession; root: HTMLElement }> {
  const server = new FakeServer(makeSamples(2));
  const session = new JudgeSession(new ApiClient("", server.fetch), "run-1", "judge-a");
  const root = document.createElement("main");
  document.body.replaceChildren(root);
  await session.loadNext();
  render(session, root);
  return { session, root };
}

describe("render", () => {
  beforeEach(() => {
    document.body.replaceChildren();
  });

  it("shows one card per candidate and one control per dimension", async () => {
    const { root } = await mountSession();
    expect(root.querySelectorAll(".candidate-card")).toHaveLength(3);
    expect(root.querySelectorAll(".dimension")).toHaveLength(DIMENSIONS.length);
    expect(root.querySelector(".context")?.textContent).toContain("[MASK]");
    expect(root.querySelector(".reference-abstract")?.textContent).toContain("abstract");
  });

  it("labels candidates neutrally, never by system", async () => {
    const { root } = await mountSession();
    const labels = [...root.querySelectorAll(".candidate-label")].map((n) => n.textContent);
    expect(labels).toEqual(["Citation A", "Citation B", "Citation C"]);
    const html = root.innerHTML.toLowerCase();
    for (const system of ["ground_truth", "baseline", "contextualized"]) {
      expect(html).not.toContain(system);
    }
  });

  it("keeps submit disabled until every dimension is ranked", async () => {
    const { root } = await mountSession();
    const submit = () => root.querySelector<HTMLButtonElement>(".submit-button")!;
    expect(submit().disabled).toBe(true);
    for (const dimension of DIMENSIONS.slice(0, -1)) {
      root
        .querySelector<HTMLButtonElement>(`[data-dimension="${dimension}"] .tie-button`)!
        .click();
    }
    expect(submit().disabled).toBe(true);
    root
      .querySelector<HTMLButtonElement>(`[data-dimension="overall"] .tie-button`)!
      .click();
    expect(submit().disabled).toBe(false);
  });

  it("marks a ranked tier button as selected", async () => {
    const { session, root } = await mountSession();
    const candidateId = session.sample!.candidates[0]!.candidate_id;
    root
      .querySelector<HTMLButtonElement>(
        `[data-dimension="fluency"] [data-candidate-id="${candidateId}"][data-tier="1"]`,
      )!
      .click();
    const selected = root.querySelector(".rank-button.selected") as HTMLButtonElement;
    expect(selected.dataset.candidateId).toBe(candidateId);
    expect(selected.dataset.tier).toBe("1");
    expect(root.querySelector('[data-dimension="fluency"]')!.classList.contains("complete")).toBe(
      false,
    );
  });

  it("advances to the next sample after submitting", async () => {
    const { session, root } = await mountSession();
    for (const dimension of DIMENSIONS) session.tieAll(dimension);
    render(session, root);
    root.querySelector<HTMLButtonElement>(".submit-button")!.click();
    await new Promise((resolve) => setTimeout(resolve, 20));
    expect(session.sample?.sample_id).toBe("sample-1");
    expect(root.textContent).toContain("Sample 2 of 2");
  });
});
