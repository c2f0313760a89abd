"""Execute a plan tree three ways: scripted, random, and over TCP.

Run:  python3 demos/02_execute_session.py
"""

import json
import socket
import threading

from cohap import (RandomOutcomeProvider, ScriptedOutcomeProvider,
                   bench_workspace, default_instance, domain_text,
                   instance_to_json, run, serve_session, solve)

result = solve(domain_text(), instance_to_json(default_instance()),
               bench_workspace())
tree, problem = result.tree, result.problem

# --- 1. scripted: answer every decision with the first outcome -------------
script = []
nid = tree.root
while tree.nodes[nid].children:
    n = tree.nodes[nid]
    if len(n.children) > 1:
        script.append(n.children[0][0])
    nid = n.children[0][1]
log = run(tree, problem, ScriptedOutcomeProvider(script))
print(f"scripted run: {len(log.steps)} steps, goal={log.reached_goal}, "
      f"answers={script}")

# --- 2. random: a simulated human with a fixed seed -------------------------
for seed in (1, 2, 3):
    log = run(tree, problem, RandomOutcomeProvider(seed=seed))
    answers = [s.outcome for s in log.steps if s.outcome is not None]
    print(f"random seed {seed}: leaf {log.leaf}, answers={answers}")

# --- 3. wire protocol: serve one session over loopback TCP ------------------
ready = threading.Event()
addr = {}


def on_ready(host, port):
    addr.update(host=host, port=port)
    ready.set()


server = threading.Thread(target=serve_session, args=(tree, problem),
                          kwargs={"port": 0, "ready": on_ready})
server.start()
ready.wait()

print(f"\nserving on {addr['host']}:{addr['port']}; client answers 'accept'"
      " when offered, first outcome otherwise")
sock = socket.create_connection((addr["host"], addr["port"]))
for line in sock.makefile("r", encoding="utf-8"):
    msg = json.loads(line)
    if msg["t"] == "query":
        pick = "accept" if "accept" in msg["outcomes"] else msg["outcomes"][0]
        print(f"  robot asks: {msg['prompt']!r} -> {pick}")
        sock.sendall((json.dumps({"t": "answer", "id": msg["id"],
                                  "outcome": pick}) + "\n").encode())
    elif msg["t"] == "done":
        print(f"  session done, reachedGoal={msg['log']['reachedGoal']}")
        break
sock.close()
server.join()
