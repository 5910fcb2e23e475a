"""Compare greedy and exact Steiner costs on random small digraphs and report the gap distribution."""

import argparse
import random
from collections import Counter

from iiasim.steiner import UnitGraph, bfs_dist, steiner_approx, steiner_exact


def random_instance(rng, max_nodes, max_terminals, density):
    n = rng.randint(2, max_nodes)
    nodes = [f"v{i:02d}" for i in range(n)]
    arcs = {(a, b) for a in nodes for b in nodes if a != b and rng.random() < density}
    g = UnitGraph.build(arcs, nodes[0], nodes)
    reach = sorted(bfs_dist(g, [g.root]))
    return g, rng.sample(reach, min(len(reach), rng.randint(1, max_terminals)))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--max-nodes", type=int, default=12)
    ap.add_argument("--max-terminals", type=int, default=5)
    ap.add_argument("--density", type=float, default=0.25)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    gaps = Counter()
    worst = 1.0
    for _ in range(args.trials):
        g, terms = random_instance(rng, args.max_nodes, args.max_terminals, args.density)
        a, e = steiner_approx(g, terms).cost, steiner_exact(g, terms).cost
        gaps[a - e] += 1
        if e:
            worst = max(worst, a / e)
    for gap in sorted(gaps):
        print(f"extra arcs {gap}: {gaps[gap]} instances")
    print(f"worst ratio {worst:.3f}")


if __name__ == "__main__":
    main()
