"""Build a synthetic grid graph, sample queries and benchmark every algorithm.

    python scripts/bench_synthetic.py --states 5000 --queries 20 --workdir /tmp/evbench
"""

import argparse
import sys
from pathlib import Path

from evprofile import cli


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--states", type=int, default=5000)
    ap.add_argument("--queries", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--algo", default="all")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--workdir", default="bench_out")
    args = ap.parse_args(argv)

    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    graph, queries = work / "graph.npz", work / "queries.csv"
    steps = [
        ["build", "--synthetic", str(args.states), "--seed", str(args.seed), "--out", str(graph)],
        ["gen", "--graph", str(graph), "-n", str(args.queries), "--seed", str(args.seed),
         "--out", str(queries)],
        ["bench", "--graph", str(graph), "--queries", str(queries), "--algo", args.algo,
         "--repeats", str(args.repeats), "--exp-diff", "--out", str(work / "bench.csv"),
         "--summary", str(work / "summary.csv")],
    ]
    for step in steps:
        code = cli.main(step)
        if code != 0:
            print(f"step '{step[0]}' failed with exit code {code}", file=sys.stderr)
            return code
    print((work / "summary.csv").read_text(), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
