/** Bootstrap: read run/judge from the query string and mount the console. */

import { ApiClient } from "./api.js";
import { installKeyboardShortcuts, render } from "./render.js";
import { JudgeSession } from "./session.js";

function requireParam(params: URLSearchParams, name: string): string {
  const value = params.get(name);
  if (!value) throw new Error(`missing required query parameter: ${name}`);
  return value;
}

export async function start(root: HTMLElement): Promise<JudgeSession> {
  const params = new URLSearchParams(window.location.search);
  const server = params.get("server") ?? "";
  const session = new JudgeSession(
    new ApiClient(server),
    requireParam(params, "run"),
    requireParam(params, "judge"),
  );
  installKeyboardShortcuts(session);
  render(session, root);
  await session.loadNext();
  render(session, root);
  return session;
}

const rootElement = typeof document !== "undefined" ? document.getElementById("app") : null;
if (rootElement) {
  start(rootElement).catch((error) => {
    rootElement.textContent = `Failed to start: ${error}`;
  });
}
