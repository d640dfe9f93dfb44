"""Mutate valid proof-traces at random and tally how the checker reacts."""

import argparse
import math
from collections import Counter

import numpy as np

from onticlab.construction import build_construction
from onticlab.interfero import MziConfig, build_mzi
from onticlab.nogo import check_trace, derive_nonoverlap
from onticlab.nogo.mutate import mutate_trace


def traces():
    for fig in (1, 2, 3, 4):
        cfg = MziConfig.figure(fig)
        sc = build_mzi(cfg)
        for v in ("plain", "restricted"):
            yield sc, derive_nonoverlap(sc, cfg, v)
    for a2, N in ((0.5, 2), (0.7, 4), (0.9, 10)):
        con = build_construction(math.sqrt(a2), math.sqrt(1 - a2), N)
        sc = con.scenario()
        for v in ("plain", "restricted"):
            yield sc, derive_nonoverlap(sc, con, v)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    pool = list(traces())
    tally = Counter()
    for k in range(args.trials):
        sc, tr = pool[k % len(pool)]
        mutated, where, op = mutate_trace(tr, rng)
        res = check_trace(mutated, sc)
        if res.ok:
            tally[op, "accepted"] += 1
        elif res.first_invalid == where:
            tally[op, "rejected at mutation"] += 1
        else:
            tally[op, "rejected elsewhere"] += 1
    print(f"{'operator':<12} {'outcome':<22} count")
    for (op, outcome), n in sorted(tally.items()):
        print(f"{op:<12} {outcome:<22} {n}")
    accepted = sum(n for (_, o), n in tally.items() if o == "accepted")
    print(f"{args.trials - accepted}/{args.trials} mutations rejected")


if __name__ == "__main__":
    main()
