"""Reprogramming a random oracle: how far can the final state move?

A single query in superposition sqrt(w)|1> + sqrt(1-w)|0> with the oracle
value at 1 flipped moves the state by sqrt(2w - w^2) in trace distance, while
half the root query weight is only sqrt(w)/2.  The looser hybrid bound 2 eps
always holds.
"""

import numpy as np

from clonebench.qrom import OracleCircuit, OracleTable, bbbv_check
from clonebench.suites import bbbv_instances

print("   w     distance  eps/2    2 eps")
for w in (0.01, 0.1, 0.3, 0.6, 1.0):
    init = np.zeros(4, dtype=complex)
    init[2], init[0] = np.sqrt(w), np.sqrt(1 - w)
    circ = OracleCircuit(1, 1, 1, init, (np.eye(4, dtype=complex),) * 2)
    rep = bbbv_check(circ, OracleTable.constant(1, 1), {(0, 1): 1})
    print(f"  {w:4.2f}  {rep.lhs:7.4f}  {rep.rhs:7.4f}  {rep.extra['safe_bound']:7.4f}")

reps = [bbbv_check(c, t, p) for _, c, t, p in bbbv_instances(1, 1000)]
print(f"\nrandom 2-query circuits: {sum(not r.passed for r in reps)}/1000 exceed eps/2, "
      f"{sum(not r.extra['safe_pass'] for r in reps)}/1000 exceed 2 eps")
