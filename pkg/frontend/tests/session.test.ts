import { describe, expect, it } from "vitest";

import { ProtocolError } from "../src/protocol.js";
import { ConsoleSession, GatingError } from "../src/session.js";

const NODE = '{"t":"node","id":0,"kind":"actuation","action":"hold",' +
  '"args":["left","leg1"]}';
const QUERY = '{"t":"query","id":2,"prompt":"still holding?",' +
  '"outcomes":["kept","released"]}';
const DONE = '{"t":"done","log":{"steps":[],"reachedGoal":true,"leaf":4}}';

describe("answer gating", () => {
  it("refuses answers when no query is pending", () => {
    const s = new ConsoleSession();
    s.feedLine(NODE);
    expect(s.canAnswer("kept")).toBe(false);
    expect(() => s.answer("kept")).toThrow(GatingError);
  });

  it("accepts only the offered outcomes", () => {
    const s = new ConsoleSession();
    s.feedLine(QUERY);
    expect(s.canAnswer("kept")).toBe(true);
    expect(s.canAnswer("maybe")).toBe(false);
    expect(() => s.answer("maybe")).toThrow(GatingError);
    // a failed answer keeps the gate open
    expect(s.canAnswer("released")).toBe(true);
  });

  it("closes the gate after one answer", () => {
    const s = new ConsoleSession();
    s.feedLine(QUERY);
    const line = s.answer("kept");
    expect(JSON.parse(line)).toEqual({ t: "answer", id: 2, outcome: "kept" });
    expect(s.pending).toBeNull();
    expect(() => s.answer("released")).toThrow(GatingError);
  });

  it("refuses answers after the session ends", () => {
    const s = new ConsoleSession();
    s.feedLine(QUERY);
    s.feedLine(DONE);
    expect(s.state).toBe("done");
    expect(() => s.answer("kept")).toThrow(GatingError);
  });

  it("fails closed on a server error", () => {
    const s = new ConsoleSession();
    s.feedLine(QUERY);
    s.feedLine('{"t":"err","code":"timeout"}');
    expect(s.state).toBe("failed");
    expect(s.errCode).toBe("timeout");
    expect(s.canAnswer("kept")).toBe(false);
  });
});

describe("stream handling", () => {
  it("tracks visited nodes and the final leaf", () => {
    const s = new ConsoleSession();
    s.feedLine(NODE);
    s.feedLine(QUERY);
    s.answer("kept");
    s.feedLine(DONE);
    expect(s.visited).toEqual([0, 4]);
    expect(s.log?.reachedGoal).toBe(true);
  });

  it("rejects overlapping queries", () => {
    const s = new ConsoleSession();
    s.feedLine(QUERY);
    expect(() => s.feedLine(QUERY)).toThrow(ProtocolError);
  });

  it("rejects input after close", () => {
    const s = new ConsoleSession();
    s.feedLine(DONE);
    expect(() => s.feedLine(NODE)).toThrow(ProtocolError);
  });

  it("feeds chunked wire data", () => {
    const s = new ConsoleSession();
    const events = [
      ...s.feed(NODE.slice(0, 10)),
      ...s.feed(NODE.slice(10) + "\n" + QUERY + "\n"),
    ];
    expect(events.map((e) => e.type)).toEqual(["node", "query"]);
  });
});
