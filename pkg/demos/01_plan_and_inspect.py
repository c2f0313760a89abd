"""Plan the showcase assembly instance and walk the resulting tree.

Run:  python3 demos/01_plan_and_inspect.py
"""

from cohap import (bench_workspace, default_instance, domain_text,
                   instance_to_json, replay_validate, solve, to_dot)

# The showcase instance: one leg only the robot can reach, one leg only the
# human can reach, a dangerous foot staged in the shared region, a tabletop.
inst = default_instance()
goal = [f"{name}({', '.join(args)})" for (name, args), _ in inst.goal]
print("goal:", ", ".join(goal))

result = solve(domain_text(), instance_to_json(inst), bench_workspace())
tree, metrics = result.tree, result.metrics

print(f"\nplanned {metrics.N} nodes, {metrics.L} leaves, depth {metrics.D}")
print(f"actuations={metrics.A} sensing={metrics.S} comm={metrics.C} "
      f"(asks={metrics.K} offers={metrics.O} confirms={metrics.Cc} "
      f"requests={metrics.Rq})")

# Every branch of the tree must replay cleanly to the goal.
violations = replay_validate(tree, result.problem)
print("replay violations:", violations or "none")

# Walk the primary branch (first outcome at every decision).
print("\nprimary branch:")
nid = tree.root
while tree.nodes[nid].children:
    n = tree.nodes[nid]
    label = f"{n.action}({', '.join(n.args)})"
    if len(n.children) > 1:
        picked = n.children[0][0]
        label += f"  ?-> {picked}  (of {', '.join(l for l, _ in n.children)})"
    print(f"  [{n.kind:<10}] {label}")
    nid = n.children[0][1]
print("  [goal]")

# Graphviz export for the whole contingency tree.
with open("tree.dot", "w") as fh:
    fh.write(to_dot(tree))
print("\nwrote tree.dot  (render with: dot -Tsvg tree.dot > tree.svg)")
