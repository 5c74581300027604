#!/usr/bin/env python3
"""Sweep the FSM detector across seeds and report rank statistics.

Useful when tuning the candidate-scoring weights: prints the planted FSM's
rank distribution and how often the counter decoy outranks it.
"""

import argparse
from collections import Counter

from gatelab import generate, graph


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--padding", type=int, default=2000)
    parser.add_argument("--w-coupling", type=float,
                        default=graph.DEFAULT_WEIGHTS["cross_coupling"])
    parser.add_argument("--w-sharing", type=float,
                        default=graph.DEFAULT_WEIGHTS["cone_sharing"])
    parser.add_argument("--w-size", type=float,
                        default=graph.DEFAULT_WEIGHTS["size_fit"])
    args = parser.parse_args()

    weights = {"cross_coupling": args.w_coupling,
               "cone_sharing": args.w_sharing,
               "size_fit": args.w_size}
    ranks: Counter = Counter()
    counter_wins = 0
    for seed in range(1, args.seeds + 1):
        proj = generate.fsm_sea_of_gates(seed=seed, padding=args.padding)
        cands = graph.fsm_candidates(proj.netlist, weights=weights)
        planted = frozenset(proj.sidecar["fsm_ff_ids"])
        decoy = set(proj.sidecar["counter_ff_ids"])
        rank = next((i for i, c in enumerate(cands) if c.ff_ids == planted),
                    len(cands))
        ranks[rank + 1] += 1
        decoy_rank = next((i for i, c in enumerate(cands)
                           if set(c.ff_ids) <= decoy), len(cands))
        if decoy_rank < rank:
            counter_wins += 1

    print(f"weights: {weights}")
    for rank in sorted(ranks):
        print(f"  rank {rank}: {ranks[rank]}/{args.seeds}")
    print(f"  counter decoy outranked the FSM {counter_wins}x")


if __name__ == "__main__":
    main()
