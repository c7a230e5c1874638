"""Alternating-projection value estimation on a random two-outcome test.

The estimate p* is unbiased for the acceptance probability, and running the
procedure again on the leftover state gives almost the same answer.
"""

import numpy as np

from clonebench import suites
from clonebench.spectral import exact_acceptance, schedule_length, valest_batch

rng = np.random.default_rng(3)
verifier, responder, state, _ = suites.random_valest_instance(rng)
truth = exact_acceptance(verifier, responder, state)

batch = valest_batch(verifier, responder, state, 0.2, seed=4, runs=4000)
print(f"true acceptance probability  {truth:.4f}")
print(f"mean estimate (eps 0.2)      {batch.mean:.4f} +- {batch.stderr:.4f}  ({batch.rounds} rounds per run)")

for eps in (0.1, 0.05):
    b = valest_batch(verifier, responder, state, eps, seed=5, runs=2000, repeat=True)
    far = np.mean(np.abs(b.estimates - b.repeats) >= eps)
    print(f"eps {eps:4.2f}: Pr[|p* - p**| >= eps] = {far:.4f}  (schedule {schedule_length(eps)} rounds)")
