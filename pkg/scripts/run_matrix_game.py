#!/usr/bin/env python3
"""Train oqmix and the unweighted control on the 3x3 cooperative matrix game.

Prints the greedy joint action reached by each seed.
"""
import argparse
import time

from xrmarl.marl import Hyperparams, MatrixGame, greedy_joint_action, train


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--episodes", type=int, default=2000)
    ap.add_argument("--modes", default="oqmix,qmix")
    args = ap.parse_args()

    game = MatrixGame()
    print(f"optimum by enumeration: {game.optimum()}")
    for mode in args.modes.split(","):
        hits = 0
        for seed in range(args.seeds):
            hp = Hyperparams(mode=mode, n_levels=3, eps_decay_steps=1000, batch_size=32,
                             buffer_size=500)
            t0 = time.perf_counter()
            res = train(game, hp, seed=seed, episodes=args.episodes)
            pick = greedy_joint_action(res.learner, game)
            hits += pick == game.optimum()
            print(f"{mode} seed={seed} greedy={pick} payoff={game.payoff[pick]:+.0f} "
                  f"({time.perf_counter() - t0:.1f} s)")
        print(f"{mode}: optimal in {hits}/{args.seeds} seeds")


if __name__ == "__main__":
    main()
