/** Browser entry point: render the tree, relay the session, gate answers. */

import { ConsoleSession } from "./session.js";
import { PlanTree, layoutTree, parseTree } from "./tree.js";
import { renderTree } from "./render.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function redraw(tree: PlanTree, session: ConsoleSession): void {
  el("tree").innerHTML = renderTree(tree, {
    visited: new Set(session.visited),
    current: session.pending?.id ?? null,
  }, layout);
}

let layout: ReturnType<typeof layoutTree>;

function setStatus(text: string, cls = ""): void {
  const status = el("status");
  status.textContent = text;
  status.className = cls;
}

function showQuery(tree: PlanTree, session: ConsoleSession,
                   ws: WebSocket): void {
  const box = el("query");
  box.innerHTML = "";
  const q = session.pending;
  if (!q) {
    box.classList.add("idle");
    return;
  }
  box.classList.remove("idle");
  const prompt = document.createElement("p");
  prompt.textContent = q.prompt;
  box.appendChild(prompt);
  for (const outcome of q.outcomes) {
    const btn = document.createElement("button");
    btn.textContent = outcome;
    btn.onclick = () => {
      if (!session.canAnswer(outcome)) return; // gate: stale button
      ws.send(session.answer(outcome));
      showQuery(tree, session, ws);
      redraw(tree, session);
    };
    box.appendChild(btn);
  }
}

async function main(): Promise<void> {
  const tree = parseTree(await (await fetch("tree.json")).text());
  layout = layoutTree(tree);
  const session = new ConsoleSession();
  redraw(tree, session);
  if (tree.safety.dangerousParts.length > 0) {
    el("safety").textContent =
      `dangerous parts: ${tree.safety.dangerousParts.join(", ")}`;
  }

  const ws = new WebSocket(`ws://${location.host}/ws`);
  setStatus("connecting…");
  ws.onopen = () => setStatus("session live");
  ws.onclose = () => {
    if (session.state === "running") setStatus("disconnected", "err");
  };
  ws.onmessage = (ev) => {
    for (const event of session.feed(ev.data + "\n")) {
      if (event.type === "query") {
        setStatus("robot is waiting for your answer");
      } else if (event.type === "done") {
        setStatus(session.log?.reachedGoal
          ? "goal reached" : "finished without goal",
          session.log?.reachedGoal ? "ok" : "err");
      } else if (event.type === "err") {
        setStatus(`session error: ${session.errCode}`, "err");
      }
    }
    showQuery(tree, session, ws);
    redraw(tree, session);
  };
}

main().catch((e) => setStatus(String(e), "err"));
