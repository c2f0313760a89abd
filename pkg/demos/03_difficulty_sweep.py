"""Sweep the three difficulty axes and print the benchmark CSV.

U adds dangerous parts (the robot must offer help before touching them),
P adds human-only parts (the robot must ask and request), R adds robot-only
parts (pure actuation).  Tree size N and planning time grow along each
axis; only U and P grow the communication load.

Run:  python3 demos/03_difficulty_sweep.py
"""

from cohap import AXES, bench_sweep, rows_to_csv

rows = []
for axis in AXES:
    rows += bench_sweep(axis, range(2, 5))
print(rows_to_csv(rows), end="")

print("\ncommunication load (K+O+Cc+Rq) per instance:")
for row in rows:
    comm = row["K"] + row["O"] + row["Cc"] + row["Rq"]
    print(f"  {row['inst']:>3}: comm={comm:<3} N={row['N']:<5} "
          f"plan={row['plan_s']:.3f}s")
