/**
 * Wire protocol of the cohap plan executor: newline-delimited JSON over a
 * single TCP session.
 *
 *   server -> client   {"t":"node","id","kind","action","args"}
 *                      {"t":"query","id","prompt","outcomes"}
 *                      {"t":"done","log"}
 *                      {"t":"err","code"}
 *   client -> server   {"t":"answer","id","outcome"}
 */

export interface NodeMsg {
  t: "node";
  id: number;
  kind: string;
  action: string;
  args: string[];
}

export interface QueryMsg {
  t: "query";
  id: number;
  prompt: string;
  outcomes: string[];
}

export interface LogStep {
  node: number;
  kind: string;
  action: string;
  args: string[];
  outcome?: string | null;
}

export interface ExecutionLog {
  steps: LogStep[];
  reachedGoal: boolean;
  leaf: number | null;
}

export interface DoneMsg {
  t: "done";
  log: ExecutionLog;
}

export type ErrCode = "busy" | "timeout" | "badAnswer" | "protocol";

export interface ErrMsg {
  t: "err";
  code: ErrCode;
}

export type ServerMsg = NodeMsg | QueryMsg | DoneMsg | ErrMsg;

export interface AnswerMsg {
  t: "answer";
  id: number;
  outcome: string;
}

export class ProtocolError extends Error {}

const ERR_CODES = new Set(["busy", "timeout", "badAnswer", "protocol"]);

function isStringArray(v: unknown): v is string[] {
  return Array.isArray(v) && v.every((x) => typeof x === "string");
}

function asRecord(line: string): Record<string, unknown> {
  let doc: unknown;
  try {
    doc = JSON.parse(line);
  } catch {
    throw new ProtocolError(`not JSON: ${line.slice(0, 80)}`);
  }
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw new ProtocolError("message is not an object");
  }
  return doc as Record<string, unknown>;
}

/** Parse and validate one server line. Throws ProtocolError on anything
 *  that does not match the protocol exactly. */
export function parseServerMessage(line: string): ServerMsg {
  const doc = asRecord(line);
  switch (doc.t) {
    case "node": {
      const { id, kind, action, args } = doc;
      if (typeof id !== "number" || typeof kind !== "string" ||
          typeof action !== "string" || !isStringArray(args)) {
        throw new ProtocolError("malformed node message");
      }
      return { t: "node", id, kind, action, args };
    }
    case "query": {
      const { id, prompt, outcomes } = doc;
      if (typeof id !== "number" || typeof prompt !== "string" ||
          !isStringArray(outcomes) || outcomes.length < 2) {
        throw new ProtocolError("malformed query message");
      }
      return { t: "query", id, prompt, outcomes };
    }
    case "done": {
      const log = doc.log;
      if (typeof log !== "object" || log === null) {
        throw new ProtocolError("malformed done message");
      }
      const l = log as Record<string, unknown>;
      if (typeof l.reachedGoal !== "boolean" || !Array.isArray(l.steps)) {
        throw new ProtocolError("malformed execution log");
      }
      return { t: "done", log: log as unknown as ExecutionLog };
    }
    case "err": {
      if (typeof doc.code !== "string" || !ERR_CODES.has(doc.code)) {
        throw new ProtocolError("malformed err message");
      }
      return { t: "err", code: doc.code as ErrCode };
    }
    default:
      throw new ProtocolError(`unknown message type ${String(doc.t)}`);
  }
}

/** Encode one client answer as a wire line (without the newline). */
export function encodeAnswer(id: number, outcome: string): string {
  const msg: AnswerMsg = { t: "answer", id, outcome };
  return JSON.stringify(msg);
}

/** Incremental NDJSON splitter: feed arbitrary chunks, get whole lines. */
export class LineBuffer {
  private buf = "";

  push(chunk: string): string[] {
    this.buf += chunk;
    const lines = this.buf.split("\n");
    this.buf = lines.pop() ?? "";
    return lines.filter((l) => l.trim().length > 0);
  }
}
