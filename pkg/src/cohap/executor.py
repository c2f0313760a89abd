"""Plan-tree execution: outcome providers, replay, and the session protocol.

run() walks a plan tree from the root, maintaining the belief state.  At each
decision node an OutcomeProvider chooses which observed/answered outcome
occurred; deterministic nodes simply advance.  serve_session() exposes one
execution over a local TCP socket speaking newline-delimited JSON, so a
separate operator console can answer the queries:

    server -> client   {"t": "node", "id", "kind", "action", "args"}
                       {"t": "query", "id", "prompt", "outcomes"}
                       {"t": "done", "log"}
                       {"t": "err", "code"}
    client -> server   {"t": "answer", "id", "outcome"}
"""

from __future__ import annotations

import json
import random
import socket
import sys
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

from .grounding import GroundProblem
from .plantree import LEAF_KIND, PlanTree, TreeNode


class ExecutionError(Exception):
    pass


# ---------------------------------------------------------------------------
# Prompts

_PROMPTS = {
    "senseHumanHolding": "Observe: is the human holding a part?",
    "senseHumanPart": "Observe: which part is the human holding?",
    "senseHumanUnholding": "Observe: is the human still holding {0}?",
    "senseHumanAttachingWhere":
        "Observe: at which connector is the human attaching {0} to {1}?",
    "confirmAttach": "Ask the human: do you want to attach {0} to {1}?",
    "askHelp": "Ask the human: could you attach {0} to {1} at {2}?",
    "offerHelp": "Tell the human: {0} is dangerous to handle; "
                 "shall I install it on {1}?",
    "requestToUnhold": "Request: please put down {0}.",
    "requestToAttach": "Request: please attach {0} to {1} at {2}.",
}


def prompt_text(action: str, args: tuple[str, ...], kind: str = "") -> str:
    template = _PROMPTS.get(action)
    if template is not None:
        return template.format(*args)
    label = f"{action}({', '.join(args)})" if args else action
    if kind in ("sensing", "commNondet"):
        return f"Choose the outcome of {label}."
    return f"Execute {label}."


# ---------------------------------------------------------------------------
# Outcome providers

class OutcomeProvider:
    """Chooses which outcome of a decision node occurred."""

    def choose(self, node: TreeNode, prompt: str,
               outcomes: tuple[str, ...]) -> str:
        raise NotImplementedError


class ScriptedOutcomeProvider(OutcomeProvider):
    """Answers from a fixed script of outcome labels, in order."""

    def __init__(self, script):
        self.script = list(script)
        self._pos = 0

    def choose(self, node, prompt, outcomes):
        if self._pos >= len(self.script):
            raise ExecutionError(
                f"script exhausted at node {node.id} ({node.action})")
        answer = self.script[self._pos]
        self._pos += 1
        return answer


class RandomOutcomeProvider(OutcomeProvider):
    """Chooses outcomes uniformly at random (seeded, reproducible)."""

    def __init__(self, seed: int = 0):
        self.rng = random.Random(seed)

    def choose(self, node, prompt, outcomes):
        return self.rng.choice(outcomes)


class InteractiveOutcomeProvider(OutcomeProvider):
    """Prompts on a terminal; accepts an outcome label or its number."""

    def __init__(self, infile=None, outfile=None):
        self.infile = infile or sys.stdin
        self.outfile = outfile or sys.stdout

    def choose(self, node, prompt, outcomes):
        print(prompt, file=self.outfile)
        for i, o in enumerate(outcomes):
            print(f"  [{i + 1}] {o}", file=self.outfile)
        self.outfile.flush()
        while True:
            line = self.infile.readline()
            if not line:
                raise ExecutionError("input closed during interactive session")
            answer = line.strip()
            if answer in outcomes:
                return answer
            if answer.isdigit() and 1 <= int(answer) <= len(outcomes):
                return outcomes[int(answer) - 1]
            print(f"unrecognized answer {answer!r}; expected one of "
                  f"{', '.join(outcomes)}", file=self.outfile)
            self.outfile.flush()


# ---------------------------------------------------------------------------
# Execution

@dataclass(frozen=True)
class ExecStep:
    node_id: int
    kind: str
    action: str
    args: tuple[str, ...]
    outcome: Optional[str] = None

    def as_dict(self) -> dict:
        d = {"node": self.node_id, "kind": self.kind, "action": self.action,
             "args": list(self.args)}
        if self.outcome is not None:
            d["outcome"] = self.outcome
        return d


@dataclass
class ExecutionLog:
    steps: list[ExecStep] = field(default_factory=list)
    reached_goal: bool = False
    leaf: Optional[int] = None

    def as_dict(self) -> dict:
        return {"steps": [s.as_dict() for s in self.steps],
                "reachedGoal": self.reached_goal, "leaf": self.leaf}


def run(tree: PlanTree, problem: GroundProblem, provider: OutcomeProvider,
        on_step: Optional[Callable[[TreeNode], None]] = None) -> ExecutionLog:
    """Execute one root-to-leaf traversal of the plan tree."""
    lookup = {(a.name, a.args): a for a in problem.actions}
    log = ExecutionLog()
    state = problem.init
    nid = tree.root
    while True:
        node = tree.node(nid)
        if on_step is not None:
            on_step(node)
        if node.kind == LEAF_KIND:
            log.reached_goal = problem.goal_holds(state)
            log.leaf = node.id
            return log
        action = lookup.get((node.action, node.args))
        if action is None:
            raise ExecutionError(f"tree node {node.id} names unknown action "
                                 f"{node.action}{node.args!r}")
        labels = tuple(lbl for lbl, _ in node.children)
        if len(node.children) == 1 and labels[0] is None:
            log.steps.append(ExecStep(node.id, node.kind, node.action,
                                      node.args))
            state = problem.successor(state, action)
            nid = node.children[0][1]
            continue
        prompt = prompt_text(node.action, node.args, node.kind)
        answer = provider.choose(node, prompt, labels)
        if answer not in labels:
            raise ExecutionError(
                f"outcome {answer!r} is not one of {labels!r} at node "
                f"{node.id} ({node.action})")
        k = labels.index(answer)
        consistent = problem.consistent_outcomes(state, action)
        if tuple(o.label for o in consistent) != labels:
            raise ExecutionError(
                f"tree node {node.id} outcome labels diverge from the "
                "grounded problem; re-validate the tree")
        log.steps.append(ExecStep(node.id, node.kind, node.action, node.args,
                                  outcome=answer))
        state = problem.successor(state, action, k)
        nid = node.children[k][1]


# ---------------------------------------------------------------------------
# Session server (NDJSON over local TCP)

ERR_BUSY = "busy"
ERR_TIMEOUT = "timeout"
ERR_BAD_ANSWER = "badAnswer"
ERR_PROTOCOL = "protocol"


class _Connection:
    def __init__(self, sock: socket.socket):
        self.sock = sock
        self.rfile = sock.makefile("r", encoding="utf-8", newline="\n")

    def send(self, msg: dict) -> None:
        data = json.dumps(msg, sort_keys=True) + "\n"
        self.sock.sendall(data.encode("utf-8"))

    def recv(self) -> Optional[dict]:
        line = self.rfile.readline()
        if not line:
            return None
        return json.loads(line)

    def close(self) -> None:
        try:
            self.rfile.close()
        finally:
            self.sock.close()


class _SocketProvider(OutcomeProvider):
    def __init__(self, conn: _Connection):
        self.conn = conn

    def choose(self, node, prompt, outcomes):
        self.conn.send({"t": "query", "id": node.id, "prompt": prompt,
                        "outcomes": list(outcomes)})
        try:
            msg = self.conn.recv()
        except socket.timeout:
            self.conn.send({"t": "err", "code": ERR_TIMEOUT})
            raise ExecutionError("timed out waiting for an answer")
        if msg is None:
            raise ExecutionError("client disconnected during session")
        if msg.get("t") != "answer" or msg.get("id") != node.id:
            self.conn.send({"t": "err", "code": ERR_PROTOCOL})
            raise ExecutionError(f"unexpected message {msg!r}")
        answer = msg.get("outcome")
        if answer not in outcomes:
            self.conn.send({"t": "err", "code": ERR_BAD_ANSWER})
            raise ExecutionError(f"bad answer {answer!r}")
        return answer


def serve_session(tree: PlanTree, problem: GroundProblem,
                  host: str = "127.0.0.1", port: int = 0,
                  timeout: float = 120.0,
                  ready: Optional[Callable[[str, int], None]] = None
                  ) -> ExecutionLog:
    """Serve exactly one execution session; returns its log.

    Listens on host:port (port 0 picks a free one; the bound address is
    reported through the `ready` callback).  While the session is live any
    further connection attempt is refused with {"t":"err","code":"busy"}.
    """
    listener = socket.create_server((host, port))
    listener.settimeout(timeout)
    bound = listener.getsockname()
    if ready is not None:
        ready(bound[0], bound[1])
    try:
        try:
            client, _ = listener.accept()
        except socket.timeout:
            raise ExecutionError("no client connected before timeout")
        client.settimeout(timeout)
        conn = _Connection(client)

        stop_refusing = threading.Event()

        def refuse_extras():
            listener.settimeout(0.1)
            while not stop_refusing.is_set():
                try:
                    extra, _ = listener.accept()
                except (socket.timeout, OSError):
                    continue
                try:
                    extra.sendall(
                        (json.dumps({"t": "err", "code": ERR_BUSY},
                                    sort_keys=True) + "\n").encode("utf-8"))
                finally:
                    extra.close()

        refuser = threading.Thread(target=refuse_extras, daemon=True)
        refuser.start()
        try:
            provider = _SocketProvider(conn)

            def on_step(node: TreeNode) -> None:
                msg = {"t": "node", "id": node.id, "kind": node.kind,
                       "action": node.action, "args": list(node.args)}
                conn.send(msg)

            try:
                log = run(tree, problem, provider, on_step=on_step)
            except socket.timeout:
                try:
                    conn.send({"t": "err", "code": ERR_TIMEOUT})
                except OSError:
                    pass
                raise ExecutionError("session timed out")
            conn.send({"t": "done", "log": log.as_dict()})
            return log
        finally:
            stop_refusing.set()
            refuser.join()
            conn.close()
    finally:
        listener.close()
