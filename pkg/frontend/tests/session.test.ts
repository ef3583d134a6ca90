import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { JudgeSession, clientToken, tiersToRanking } from "../src/session.js";
import { DIMENSIONS } from "../src/types.js";
import { FakeServer, makeSamples } from "./fake-server.js";

function makeSession(server: FakeServer, judge = "judge-a"): JudgeSession {
  return new JudgeSession(new ApiClient("", server.fetch), "run-1", judge);
}

function fillAllDimensions(session: JudgeSession): void {
  for (const dimension of DIMENSIONS) {
    session.sample!.candidates.forEach((candidate, index) => {
      session.setTier(dimension, candidate.candidate_id, index + 1);
    });
  }
}

describe("clientToken", () => {
  it("is stable for identical judgments", () => {
    const a = clientToken("j", "s", "fluency", [["x"], ["y"]]);
    const b = clientToken("j", "s", "fluency", [["x"], ["y"]]);
    expect(a).toBe(b);
  });

  it("changes when the ranking changes", () => {
    const a = clientToken("j", "s", "fluency", [["x"], ["y"]]);
    const b = clientToken("j", "s", "fluency", [["y"], ["x"]]);
    expect(a).not.toBe(b);
  });
});

describe("tiersToRanking", () => {
  it("groups candidates sharing a tier, best tier first", () => {
    expect(tiersToRanking({ a: 2, b: 1, c: 2 })).toEqual([["b"], ["a", "c"]]);
  });

  it("puts an all-ties draft in a single tier", () => {
    expect(tiersToRanking({ a: 1, b: 1, c: 1 })).toEqual([["a", "b", "c"]]);
  });
});

describe("JudgeSession", () => {
  it("loads the first sample and tracks progress", async () => {
    const server = new FakeServer(makeSamples(2));
    const session = makeSession(server);
    await session.loadNext();
    expect(session.phase).toBe("judging");
    expect(session.sample?.sample_id).toBe("sample-0");
    expect(session.progress).toEqual({ completed: 0, total: 2 });
  });

  it("refuses to submit until every dimension is ranked", async () => {
    const server = new FakeServer(makeSamples(1));
    const session = makeSession(server);
    await session.loadNext();
    expect(session.canSubmit()).toBe(false);
    session.tieAll("fluency");
    expect(session.canSubmit()).toBe(false);
    fillAllDimensions(session);
    expect(session.canSubmit()).toBe(true);
  });

  it("submits four judgments per sample and advances to done", async () => {
    const server = new FakeServer(makeSamples(2));
    const session = makeSession(server);
    await session.loadNext();
    while (session.phase === "judging") {
      fillAllDimensions(session);
      await session.submit();
    }
    expect(session.phase).toBe("done");
    expect(session.progress).toEqual({ completed: 2, total: 2 });
    expect(server.judgments).toHaveLength(8);
    const dims = server.judgments.filter((j) => j.sample_id === "sample-0");
    expect(dims.map((j) => j.dimension).sort()).toEqual([...DIMENSIONS].sort());
  });

  it("collapses a double-click into one submission", async () => {
    const server = new FakeServer(makeSamples(1));
    const session = makeSession(server);
    await session.loadNext();
    fillAllDimensions(session);
    await Promise.all([session.submit(), session.submit()]);
    expect(server.judgments).toHaveLength(DIMENSIONS.length);
    expect(session.phase).toBe("done");
  });

  it("keeps the queue on failure and retries without duplicates", async () => {
    const server = new FakeServer(makeSamples(1));
    const session = makeSession(server);
    await session.loadNext();
    fillAllDimensions(session);
    server.failNextSubmits = 1;
    await session.submit();
    expect(session.phase).toBe("error");
    expect(session.lastError).toContain("network failure");
    await session.retry();
    expect(server.judgments).toHaveLength(DIMENSIONS.length);
    const tokens = server.judgments.map((j) => j.client_token);
    expect(new Set(tokens).size).toBe(tokens.length);
    expect(session.phase).toBe("done");
  });

  it("sends tier rankings in server format", async () => {
    const server = new FakeServer(makeSamples(1));
    const session = makeSession(server);
    await session.loadNext();
    for (const dimension of DIMENSIONS) session.tieAll(dimension);
    session.setTier("overall", "sample-0.c2", 2);
    await session.submit();
    const overall = server.judgments.find((j) => j.dimension === "overall")!;
    expect(overall.ranking).toEqual([["sample-0.c1", "sample-0.c3"], ["sample-0.c2"]]);
    const fluency = server.judgments.find((j) => j.dimension === "fluency")!;
    expect(fluency.ranking).toEqual([["sample-0.c1", "sample-0.c2", "sample-0.c3"]]);
  });
});
