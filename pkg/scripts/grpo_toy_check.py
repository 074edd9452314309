#!/usr/bin/env python3
"""Gradient verification sweep for the group-relative objective.

Runs the categorical toy-policy check across many seeds and action-space
sizes and prints the worst observed finite-difference error.
"""

from __future__ import annotations

import argparse
import time

from spatialqa.grpo import toy_policy_check


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=50)
    parser.add_argument("--actions", type=int, nargs="+", default=[2, 3, 4, 5, 6])
    args = parser.parse_args()

    start = time.perf_counter()
    worst = 0.0
    worst_reinforce = 0.0
    failures = []
    for seed in range(args.seeds):
        k = args.actions[seed % len(args.actions)]
        result = toy_policy_check(num_actions=k, seed=seed)
        worst = max(worst, result.max_rel_err)
        worst_reinforce = max(worst_reinforce, result.reinforce_max_err)
        if not result.passed:
            failures.append((seed, k))
    elapsed = time.perf_counter() - start
    print(f"seeds run            : {args.seeds}")
    print(f"worst fd rel error   : {worst:.3e}")
    print(f"worst reinforce gap  : {worst_reinforce:.3e}")
    print(f"elapsed              : {elapsed:.2f}s")
    if failures:
        print(f"FAILED seeds: {failures}")
        raise SystemExit(1)
    print("all gradient checks passed")


if __name__ == "__main__":
    main()
