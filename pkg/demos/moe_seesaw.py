"""Search for good entanglement-game strategies with the see-saw optimizer
and compare them with the closed-form upper bound."""

import numpy as np

from clonebench import adversaries as adv
from clonebench.bounds import moe_cd_bound
from clonebench.games import make_game
from clonebench.seesaw import MoEObjective, multistart

for lam in (1, 2):
    game = make_game("bb84-cd", lam)
    trivial = adv.evaluate_moe_exact(lam, adv.cloning_to_moe(adv.trivial_strategy(game, "C"), lam))
    best, runs = multistart(MoEObjective(lam), 10, seed=lam)
    values = np.array([r.value for r in runs])
    print(f"lambda {lam}: bound {moe_cd_bound(lam):.6f}")
    print(f"  token-to-C attack     {trivial:.6f}")
    print(f"  see-saw best of 10    {best.value:.6f}  (median {np.median(values):.6f})")
    print(f"  all traces monotone:  {all(r.monotone for r in runs)}")
    print(f"  best trace: {' '.join(f'{v:.4f}' for v in best.trace[:8])}")

# The lambda = 1 plateau sits at cos^2(pi/8), below the bound.
print(f"\ncos^2(pi/8) = {np.cos(np.pi / 8) ** 2:.6f}")
