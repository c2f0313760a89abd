/**
 * Bridge between the browser console and a cohap executor session.
 *
 * Serves the static console, the plan-tree JSON, and a WebSocket endpoint
 * that pipes NDJSON lines to and from the executor's TCP socket unchanged.
 *
 *   node dist/bridge.js --tree tree.json --executor 127.0.0.1:7700 [--port 8080]
 */

import * as fs from "node:fs";
import * as http from "node:http";
import * as net from "node:net";
import * as path from "node:path";
import { fileURLToPath } from "node:url";
import { WebSocketServer, WebSocket } from "ws";

import { LineBuffer } from "./protocol.js";

interface Args {
  tree: string;
  executor: { host: string; port: number };
  port: number;
}

export function parseArgs(argv: string[]): Args {
  const get = (flag: string): string | undefined => {
    const i = argv.indexOf(flag);
    return i >= 0 ? argv[i + 1] : undefined;
  };
  const tree = get("--tree");
  const executor = get("--executor");
  if (!tree || !executor) {
    throw new Error(
      "usage: bridge --tree <tree.json> --executor <host:port> [--port N]");
  }
  const sep = executor.lastIndexOf(":");
  const port = Number(executor.slice(sep + 1));
  if (sep <= 0 || !Number.isInteger(port)) {
    throw new Error(`bad --executor address: ${executor}`);
  }
  return {
    tree,
    executor: { host: executor.slice(0, sep), port },
    port: Number(get("--port") ?? 8080),
  };
}

const MIME: Record<string, string> = {
  ".html": "text/html; charset=utf-8",
  ".js": "text/javascript; charset=utf-8",
  ".json": "application/json",
  ".css": "text/css",
};

export function startBridge(args: Args, onReady?: (port: number) => void) {
  const here = path.dirname(fileURLToPath(import.meta.url));
  const staticRoot = path.resolve(here, "..");

  const server = http.createServer((req, res) => {
    const url = (req.url ?? "/").split("?")[0]!;
    if (url === "/tree.json") {
      res.writeHead(200, { "content-type": MIME[".json"]! });
      res.end(fs.readFileSync(args.tree));
      return;
    }
    const rel = url === "/" ? "index.html" : url.replace(/^\/+/, "");
    const file = path.join(staticRoot, rel);
    if (!file.startsWith(staticRoot) || !fs.existsSync(file) ||
        !fs.statSync(file).isFile()) {
      res.writeHead(404);
      res.end("not found");
      return;
    }
    res.writeHead(200,
      { "content-type": MIME[path.extname(file)] ?? "text/plain" });
    res.end(fs.readFileSync(file));
  });

  const wss = new WebSocketServer({ server, path: "/ws" });
  wss.on("connection", (ws: WebSocket) => {
    const sock = net.createConnection(args.executor);
    const fromTcp = new LineBuffer();
    sock.setEncoding("utf-8");
    sock.on("data", (chunk: string) => {
      for (const line of fromTcp.push(chunk)) ws.send(line);
    });
    sock.on("error", (e) => {
      ws.send(JSON.stringify({ t: "err", code: "protocol" }));
      ws.close();
      void e;
    });
    sock.on("close", () => ws.close());
    ws.on("message", (data) => sock.write(data.toString() + "\n"));
    ws.on("close", () => sock.destroy());
  });

  server.listen(args.port, "127.0.0.1", () => {
    const addr = server.address() as net.AddressInfo;
    if (onReady) onReady(addr.port);
    else console.log(`console on http://127.0.0.1:${addr.port}/`);
  });
  return server;
}

const isMain = process.argv[1] &&
  fileURLToPath(import.meta.url) === path.resolve(process.argv[1]);
if (isMain) {
  startBridge(parseArgs(process.argv.slice(2)));
}
