import io
import json
import socket
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohap.executor import (ExecutionError, InteractiveOutcomeProvider,
                            RandomOutcomeProvider, ScriptedOutcomeProvider,
                            prompt_text, run, serve_session)


def decision_labels(tree):
    """Outcome label tuples of decision nodes in document order."""
    out = []
    for nid in sorted(tree.nodes):
        n = tree.nodes[nid]
        if n.kind in ("sensing", "commNondet"):
            out.append(tuple(lbl for lbl, _ in n.children))
    return out


def first_path_script(tree):
    """Labels choosing the first outcome at every decision on one walk."""
    script = []
    nid = tree.root
    while tree.nodes[nid].children:
        n = tree.nodes[nid]
        lbl, child = n.children[0]
        if lbl is not None and len(n.children) > 1:
            script.append(lbl)
        nid = child
    return script


def test_prompt_templates():
    assert "dangerous" in prompt_text("offerHelp", ("foot1", "leg1", "c3"))
    assert "attach leg2 to top1" in prompt_text("askHelp",
                                                ("leg2", "top1", "c2"))
    assert "put down" in prompt_text("requestToUnhold", ("leg2",))
    assert "holding" in prompt_text("senseHumanHolding", ())
    assert prompt_text("mystery", ("a",), "sensing").startswith("Choose")
    assert prompt_text("mystery", ("a",), "actuation").startswith("Execute")


def test_scripted_run_reaches_goal(default_result):
    tree, p = default_result.tree, default_result.problem
    script = first_path_script(tree)
    log = run(tree, p, ScriptedOutcomeProvider(script))
    assert log.reached_goal
    assert log.leaf is not None
    answered = [s for s in log.steps if s.outcome is not None]
    assert [s.outcome for s in answered] == script


def test_scripted_run_bad_answer(default_result):
    tree, p = default_result.tree, default_result.problem
    with pytest.raises(ExecutionError):
        run(tree, p, ScriptedOutcomeProvider(["nonsense"] * 10))


def test_scripted_run_exhausted(default_result):
    tree, p = default_result.tree, default_result.problem
    with pytest.raises(ExecutionError):
        run(tree, p, ScriptedOutcomeProvider([]))


def test_random_run_reproducible(default_result):
    tree, p = default_result.tree, default_result.problem
    a = run(tree, p, RandomOutcomeProvider(seed=11))
    b = run(tree, p, RandomOutcomeProvider(seed=11))
    assert a.as_dict() == b.as_dict()
    assert a.reached_goal


def test_random_runs_cover_all_leaves(default_result):
    tree, p = default_result.tree, default_result.problem
    seen = set()
    for seed in range(200):
        log = run(tree, p, RandomOutcomeProvider(seed=seed))
        assert log.reached_goal  # every traversal ends in a goal leaf
        seen.add(log.leaf)
    assert seen == {n.id for n in tree.leaves()}


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_random_run_always_reaches_goal(default_result, seed):
    tree, p = default_result.tree, default_result.problem
    log = run(tree, p, RandomOutcomeProvider(seed=seed))
    assert log.reached_goal
    assert log.leaf in {n.id for n in tree.leaves()}


def test_interactive_provider(default_result):
    tree, p = default_result.tree, default_result.problem
    script = first_path_script(tree)
    # answer by label, with one garbage line and one numeric answer mixed in
    lines = ["garbage", script[0]] + ["1"] * (len(script) - 1)
    provider = InteractiveOutcomeProvider(infile=io.StringIO("\n".join(lines)
                                                             + "\n"),
                                          outfile=io.StringIO())
    log = run(tree, p, provider)
    assert log.reached_goal
    out = provider.outfile.getvalue()
    assert "unrecognized" in out
    assert "[1]" in out


def test_exec_log_shape(default_result):
    tree, p = default_result.tree, default_result.problem
    log = run(tree, p, RandomOutcomeProvider(seed=0))
    doc = log.as_dict()
    assert doc["reachedGoal"] is True
    assert doc["steps"][0]["node"] == tree.root
    for step in doc["steps"]:
        assert {"node", "kind", "action", "args"} <= set(step)


# ---------------------------------------------------------------------------
# Wire protocol

def _client_session(port, answer_fn, events):
    sock = socket.create_connection(("127.0.0.1", port), timeout=10)
    rfile = sock.makefile("r", encoding="utf-8")
    try:
        for line in rfile:
            msg = json.loads(line)
            events.append(msg)
            if msg["t"] == "query":
                answer = answer_fn(msg)
                if answer is None:
                    return
                reply = json.dumps({"t": "answer", "id": msg["id"],
                                    "outcome": answer}) + "\n"
                sock.sendall(reply.encode())
            elif msg["t"] in ("done", "err"):
                return
    finally:
        sock.close()


def _serve_in_thread(tree, problem, **kwargs):
    port_box = {}
    ready = threading.Event()

    def on_ready(host, port):
        port_box["port"] = port
        ready.set()

    result = {}

    def target():
        try:
            result["log"] = serve_session(tree, problem, port=0,
                                          ready=on_ready, **kwargs)
        except Exception as e:  # surfaced by the test thread
            result["error"] = e

    t = threading.Thread(target=target)
    t.start()
    assert ready.wait(5)
    return t, port_box["port"], result


def test_serve_session_loopback(default_result):
    tree, p = default_result.tree, default_result.problem
    t, port, result = _serve_in_thread(tree, p)
    events = []
    _client_session(port, lambda q: q["outcomes"][0], events)
    t.join(10)
    assert "error" not in result
    log = result["log"]
    assert log.reached_goal
    kinds = [e["t"] for e in events]
    assert kinds[-1] == "done"
    assert "query" in kinds and "node" in kinds
    queries = [e for e in events if e["t"] == "query"]
    assert all(e["prompt"] and len(e["outcomes"]) >= 2 for e in queries)
    done = events[-1]
    assert done["log"]["reachedGoal"] is True


def test_serve_session_refuses_second_client(default_result):
    tree, p = default_result.tree, default_result.problem
    t, port, result = _serve_in_thread(tree, p)

    busy_events = []

    def slow_answer(q):
        # while the first session waits on us, poke a second connection
        if not busy_events:
            _client_session(port, lambda _q: None, busy_events)
        return q["outcomes"][0]

    events = []
    _client_session(port, slow_answer, events)
    t.join(10)
    assert result["log"].reached_goal
    assert busy_events == [{"t": "err", "code": "busy"}]


def test_serve_session_bad_answer(default_result):
    tree, p = default_result.tree, default_result.problem
    t, port, result = _serve_in_thread(tree, p)
    events = []
    _client_session(port, lambda q: "nonsense", events)
    t.join(10)
    assert isinstance(result.get("error"), ExecutionError)
    assert events[-1] == {"t": "err", "code": "badAnswer"}


def test_serve_session_timeout(default_result):
    tree, p = default_result.tree, default_result.problem
    t, port, result = _serve_in_thread(tree, p, timeout=0.5)
    # connect and go silent: never answer the query
    sock = socket.create_connection(("127.0.0.1", port), timeout=10)
    rfile = sock.makefile("r", encoding="utf-8")
    events = [json.loads(line) for line in rfile]
    sock.close()
    t.join(10)
    assert isinstance(result.get("error"), ExecutionError)
    assert events[-1] == {"t": "err", "code": "timeout"}
