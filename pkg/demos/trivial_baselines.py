"""Walk through the trivial attacks on the small cloning games.

One party gets the whole token and answers honestly; the other party guesses.
For each game we compare a blind guess with the best challenge-aware guess,
and check the sandwich between the trivial value and the guessing optimum.
"""

from clonebench import adversaries as adv
from clonebench.bounds import triv_sandwich_check
from clonebench.games import ExperimentConfig, make_game, with_token_noise

print("game      lambda  blind guess   best guess")
for name in ("bb84", "sde", "bb84-cd"):
    for lam in (1, 2, 3):
        game = make_game(name, lam)
        cfg = ExperimentConfig(game)
        blind = adv.evaluate_exact(cfg, adv.trivial_strategy(game, "C", "blind"))
        best = adv.evaluate_exact(cfg, adv.trivial_strategy(game, "C", "best"))
        print(f"{name:9s} {lam:6d}  {blind:11.6f}  {best:11.6f}")

# With a perfect honest evaluator the sandwich collapses onto OPT; noise opens it up.
print("\nnoisy bb84, lambda = 2: lower <= trivial value <= OPT")
for p in (0.0, 0.2, 0.5, 1.0):
    rep = triv_sandwich_check(ExperimentConfig(with_token_noise(make_game("bb84", 2), p)))
    print(f"  noise {p:.1f}: {rep.lower:+.4f} <= {rep.value:.4f} <= {rep.upper:.4f}  (delta {rep.delta:.3f})")
