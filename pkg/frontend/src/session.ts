/**
 * Client-side session state machine with answer gating.
 *
 * Feed raw server lines in; the session tracks execution progress and
 * exposes exactly one answerable query at a time. `answer()` refuses
 * everything except a valid outcome of the currently pending query, and
 * refuses double answers, so a confused UI cannot desynchronize the wire.
 */

import {
  ExecutionLog,
  LineBuffer,
  ProtocolError,
  QueryMsg,
  ServerMsg,
  encodeAnswer,
  parseServerMessage,
} from "./protocol.js";

export type SessionState = "running" | "done" | "failed";

export interface SessionEvent {
  type: "node" | "query" | "done" | "err";
  msg: ServerMsg;
}

export class GatingError extends Error {}

export class ConsoleSession {
  state: SessionState = "running";
  pending: QueryMsg | null = null;
  log: ExecutionLog | null = null;
  errCode: string | null = null;
  /** node ids in visit order, for highlighting the active path */
  visited: number[] = [];

  private lines = new LineBuffer();

  /** Feed a raw chunk from the wire; returns the events it produced. */
  feed(chunk: string): SessionEvent[] {
    const events: SessionEvent[] = [];
    for (const line of this.lines.push(chunk)) {
      events.push(this.feedLine(line));
    }
    return events;
  }

  feedLine(line: string): SessionEvent {
    if (this.state !== "running") {
      throw new ProtocolError("session is closed");
    }
    const msg = parseServerMessage(line);
    switch (msg.t) {
      case "node":
        this.visited.push(msg.id);
        return { type: "node", msg };
      case "query":
        if (this.pending !== null) {
          throw new ProtocolError("server sent a query while one is pending");
        }
        this.pending = msg;
        return { type: "query", msg };
      case "done":
        this.state = "done";
        this.pending = null;
        this.log = msg.log;
        // the server may have already announced the leaf as a node message
        if (msg.log.leaf !== null &&
            this.visited[this.visited.length - 1] !== msg.log.leaf) {
          this.visited.push(msg.log.leaf);
        }
        return { type: "done", msg };
      case "err":
        this.state = "failed";
        this.pending = null;
        this.errCode = msg.code;
        return { type: "err", msg };
    }
  }

  /** True when `outcome` would be accepted right now. */
  canAnswer(outcome: string): boolean {
    return this.state === "running" && this.pending !== null &&
      this.pending.outcomes.includes(outcome);
  }

  /**
   * Answer the pending query. Returns the wire line to send (without the
   * newline) and closes the gate until the next query arrives.
   */
  answer(outcome: string): string {
    if (this.state !== "running") {
      throw new GatingError(`session is ${this.state}`);
    }
    if (this.pending === null) {
      throw new GatingError("no query is pending");
    }
    if (!this.pending.outcomes.includes(outcome)) {
      throw new GatingError(
        `${JSON.stringify(outcome)} is not one of ` +
        this.pending.outcomes.join(", "));
    }
    const line = encodeAnswer(this.pending.id, outcome);
    this.pending = null;
    return line;
  }
}
