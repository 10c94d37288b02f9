"""Command-line front end: build, query, profile, gen, bench, verify.

Exit codes: 0 success, 1 verification failure (or a correctness flag in
bench), 2 usage or input error, 3 infeasible query.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .graph import (EnergyModelParams, GraphConsistencyError, GraphFormatError, GraphGenSpec,
                    generate_test_graph, load_graph, load_graph_cache, save_graph_cache)
from .heuristic import InconsistentHeuristicError, check_consistency, make_heuristic
from .profile import INFEASIBLE, transition_point
from .search import (ALGORITHMS, PROFILE_ALGORITHMS, astar_energy, dijkstra_energy, pr_astar_bw,
                     pr_astar_fw, pr_bastar, pr_bastar_par, reconstruct_path)

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2, 3
BENCH_HEADER = ["query", "algo", "runtime_us", "expansions", "generated", "solutions", "cost"]
ENERGY_BINS = (0.0, 20_000.0, 40_000.0, 60_000.0, 85_000.0)


class CliError(Exception):
    def __init__(self, msg: str, code: int = EXIT_INPUT):
        super().__init__(msg)
        self.code = code


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.10g}"


def _json_num(x: float):
    return None if math.isinf(x) else x


# -- shared helpers -----------------------------------------------------------

def load_cache(path):
    if path is None:
        raise CliError("--graph is required")
    if not Path(path).exists():
        raise CliError(f"graph cache not found: {path}")
    try:
        return load_graph_cache(path)
    except (GraphConsistencyError, ValueError, OSError) as exc:
        raise CliError(f"cannot read graph cache {path}: {exc}")


def resolve_e_max(g, e_max):
    e = e_max if e_max is not None else g.e_max
    if e is None or e <= 0:
        raise CliError("battery capacity unknown: pass --e-max")
    return float(e)


def check_state(g, u, what):
    if not 0 <= u < g.n_states:
        raise CliError(f"unknown {what} state id {u} (graph has {g.n_states} states)")


class Heuristics:
    """Forward, backward and potential-only heuristics for one query, built lazily."""

    def __init__(self, g, start, goal, variant, lam):
        self.g, self.start, self.goal = g, start, goal
        self.variant, self.lam = variant, lam
        self._cache = {}

    def _make(self, key, target, direction, lam):
        if key not in self._cache:
            h = make_heuristic(self.g, target, direction, self.variant, lam=lam)
            rep = check_consistency(self.g, h)
            if not rep.consistent:
                raise CliError(f"{self.variant} heuristic (lambda={h.cfg.lam:g}) is not consistent "
                               f"on this graph: max excess {rep.max_excess:g} Wh")
            self._cache[key] = h
        return self._cache[key]

    @property
    def fw(self):
        return self._make("fw", self.goal, "forward", self.lam)

    @property
    def bw(self):
        return self._make("bw", self.start, "backward", self.lam)

    @property
    def potential(self):
        return self._make("pot", self.goal, "forward", 0.0)


def run_algorithm(algo, g, start, goal, e_init, e_max, hs: Heuristics):
    """Run one search; returns ``(result, cost at e_init)``."""
    if algo == "astar":
        res = astar_energy(g, hs.fw, start, goal, e_init, e_max)
        return res, res.cost
    if algo == "dijkstra":
        res = dijkstra_energy(g, hs.potential, start, goal, e_init, e_max)
        return res, res.cost
    if algo == "pr-fw":
        res = pr_astar_fw(g, hs.fw, start, goal, e_max)
    elif algo == "pr-bw":
        res = pr_astar_bw(g, hs.bw, start, goal, e_max)
    elif algo == "pr-ba":
        res = pr_bastar(g, hs.fw, hs.bw, start, goal, e_max)
    elif algo == "pr-ba-par":
        res = pr_bastar_par(g, hs.fw, hs.bw, start, goal, e_max)
    else:
        raise CliError(f"unknown algorithm {algo!r}")
    return res, res.envelope()(e_init)


def _e_init(args, e_max):
    e = e_max if args.e_init is None else float(args.e_init)
    if not 0.0 <= e <= e_max:
        raise CliError(f"--e-init {e} outside [0, {e_max}]")
    return e


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


# -- subcommands --------------------------------------------------------------

def cmd_build(args) -> int:
    model = EnergyModelParams()
    if args.config:
        if not Path(args.config).exists():
            raise CliError(f"config file not found: {args.config}")
        model = EnergyModelParams.from_dict(json.loads(Path(args.config).read_text()))
    if args.e_max is not None:
        model = EnergyModelParams.from_dict({**model.to_dict(), "battery_capacity": args.e_max})
    if args.out is None:
        raise CliError("--out is required")
    if args.synthetic:
        spec = GraphGenSpec(seed=args.seed, n_states=args.synthetic, layout=args.layout,
                            avg_degree=3.0 if args.layout == "grid" else 2.5,
                            base_cost_range=(0, 20), height_range=(0, 300),
                            e_max=float(round(model.battery_capacity)), efficiency=15.0,
                            box_deg=args.box_deg, strongly_connected=True)
        g = generate_test_graph(spec)
    else:
        if not (args.gr and args.co and args.elev):
            raise CliError("build needs --gr, --co and --elev (or --synthetic N)")
        try:
            g = load_graph(args.gr, args.co, args.elev, model)
        except FileNotFoundError as exc:
            raise CliError(f"input file not found: {exc.args[0]}")
        except (GraphFormatError, GraphConsistencyError) as exc:
            raise CliError(str(exc))
    save_graph_cache(g, args.out)
    print(f"wrote {args.out}: {g.n_states} states, {g.n_edges} edges, E_max {_fmt(g.e_max or 0)} Wh")
    return EXIT_OK


def _query_common(args):
    g = load_cache(args.graph)
    e_max = resolve_e_max(g, args.e_max)
    check_state(g, args.start, "start")
    check_state(g, args.goal, "goal")
    hs = Heuristics(g, args.start, args.goal, args.heuristic, args.lam)
    return g, e_max, hs


def cmd_query(args) -> int:
    g, e_max, hs = _query_common(args)
    e_init = _e_init(args, e_max)
    try:
        res, cost = run_algorithm(args.algo, g, args.start, args.goal, e_init, e_max, hs)
    except InconsistentHeuristicError as exc:
        raise CliError(str(exc))
    path = None
    if cost < INFEASIBLE:
        node = res.solutions[0] if args.algo not in PROFILE_ALGORITHMS else res.best(e_init)
        path = reconstruct_path(node) if node is not None else None
    if args.json:
        print(json.dumps({"algorithm": args.algo, "start": args.start, "goal": args.goal,
                          "e_init": e_init, "e_max": e_max, "feasible": cost < INFEASIBLE,
                          "cost": _json_num(cost), "path": path if args.path else None,
                          "expansions": res.stats.expansions, "generated": res.stats.generated,
                          "runtime_us": res.stats.runtime_us}))
    else:
        if cost < INFEASIBLE:
            print(f"cost {_fmt(cost)} Wh (e_init {_fmt(e_init)}, {args.algo}, "
                  f"{res.stats.expansions} expansions)")
            if args.path:
                print("path " + " ".join(map(str, path)))
        else:
            print(f"infeasible (e_init {_fmt(e_init)}, {args.algo})")
    return EXIT_OK if cost < INFEASIBLE else EXIT_INFEASIBLE


def cmd_profile(args) -> int:
    g, e_max, hs = _query_common(args)
    if args.algo not in PROFILE_ALGORITHMS:
        raise CliError(f"profile queries need one of {', '.join(PROFILE_ALGORITHMS)}")
    res, _ = run_algorithm(args.algo, g, args.start, args.goal, e_max, e_max, hs)
    env = res.envelope()
    sols = sorted(res.profiles(), key=lambda p: (p.g_min, p.e_min, p.g_max))
    if args.json:
        print(json.dumps({"algorithm": args.algo, "start": args.start, "goal": args.goal,
                          "e_max": e_max, "envelope": env.to_json(), "describe": env.describe(),
                          "profiles": [p.to_json() for p in sols],
                          "expansions": res.stats.expansions}))
    else:
        print(f"envelope: {env.describe()}")
        for s in env.segments:
            print(f"  segment from {_fmt(s.e_from)}: cost {_fmt(s.cost)}, slope {s.slope}")
        for p in sols:
            print(f"  profile e_min={_fmt(p.e_min)} g={_fmt(p.g_min)} g_max={_fmt(p.g_max)} "
                  f"flat until {_fmt(max(p.e_min, transition_point(p, e_max)))}")
    return EXIT_OK if env.segments else EXIT_INFEASIBLE


def parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise CliError(f"bad range {text!r}: expected LO,HI")
    if hi <= lo:
        raise CliError(f"bad range {text!r}: HI must exceed LO")
    return lo, hi


def cmd_gen(args) -> int:
    if args.n <= 0:
        raise CliError("-n must be positive")
    g = load_cache(args.graph)
    if g.n_states < 2:
        raise CliError("graph needs at least two states")
    rng = random.Random(args.seed)
    rows = []
    warning = None
    if args.cost_range is None:
        for _ in range(args.n):
            rows.append(tuple(rng.sample(range(g.n_states), 2)))
    else:
        lo, hi = parse_range(args.cost_range)
        e_max = resolve_e_max(g, args.e_max)
        budget = args.max_tries if args.max_tries is not None else 50 * args.n
        tries = 0
        while len(rows) < args.n and tries < budget:
            tries += 1
            s, t = rng.sample(range(g.n_states), 2)
            h = make_heuristic(g, t, "forward", args.heuristic, lam=args.lam)
            cost = astar_energy(g, h, s, t, e_max, e_max).cost
            if lo <= cost < hi:
                rows.append((s, t))
        if len(rows) < args.n:
            warning = (f"warning: only {len(rows)} of {args.n} queries found in [{_fmt(lo)}, {_fmt(hi)}) "
                       f"after {tries} tries; wrote a partial file")
    out, close = _open_out(args.out)
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["query", "start", "goal"])
        for i, (s, t) in enumerate(rows):
            w.writerow([i, s, t])
    finally:
        if close:
            out.close()
    if warning:
        print(warning, file=sys.stderr)
    return EXIT_OK


def read_queries(path, g):
    if not Path(path).exists():
        raise CliError(f"query file not found: {path}")
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            try:
                q = (row["query"], int(row["start"]), int(row["goal"]))
            except (KeyError, ValueError):
                raise CliError(f"{path}: expected columns query,start,goal")
            check_state(g, q[1], "start")
            check_state(g, q[2], "goal")
            out.append(q)
    return out


_WORKER = {}


def _worker_init(graph_path, e_max):
    _WORKER["g"] = load_graph_cache(graph_path)
    _WORKER["e_max"] = e_max


def _bench_query(q, algos, repeats, e_init, variant, lam, g=None, e_max=None):
    """Median-of-``repeats`` records for one query; timing includes heuristic setup."""
    g = g if g is not None else _WORKER["g"]
    e_max = e_max if e_max is not None else _WORKER["e_max"]
    qid, s, t = q
    recs = {}
    for algo in algos:
        runs = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            hs = Heuristics(g, s, t, variant, lam)
            res, cost = run_algorithm(algo, g, s, t, e_init, e_max, hs)
            dt = (time.perf_counter() - t0) * 1e6
            runs.append((dt, res.stats.expansions, res.stats.generated, len(res.solutions), cost))
        runs.sort(key=lambda r: r[0])
        recs[algo] = runs[(len(runs) - 1) // 2]
    return qid, recs


def _bin_label(cost):
    for lo, hi in zip(ENERGY_BINS, ENERGY_BINS[1:]):
        if lo <= cost < hi:
            return f"{lo:.0f}-{hi:.0f}"
    return f">={ENERGY_BINS[-1]:.0f}" if cost >= ENERGY_BINS[-1] else f"<{ENERGY_BINS[0]:.0f}"


def bench_summary(results, algos, timing=True) -> list[dict]:
    """Min/avg/max runtime, speedup vs. dijkstra and mean expansions per algorithm and group.

    Groups are the energy ranges of the query's optimal cost (feasible queries)
    plus ``all``; infeasible queries are summarized separately.
    """
    groups: dict[tuple[str, str, bool], list[dict]] = {}
    for qid, recs in results:
        ref = min(r[4] for r in recs.values())
        feasible = ref < INFEASIBLE
        labels = ["all"] + ([_bin_label(ref)] if feasible else [])
        for label in labels:
            for algo in algos:
                groups.setdefault((algo, label, feasible), []).append(recs)
    rows = []
    order = ["all"] + [_bin_label(lo) for lo in ENERGY_BINS[:-1]] + [f">={ENERGY_BINS[-1]:.0f}"]
    for feasible in (True, False):
        used = {lab for (_, lab, fe) in groups if fe == feasible and lab != "all"}
        for label in order:
            if label == "all" and len(used) == 1:
                continue  # would repeat the single energy-range row
            for algo in algos:
                lst = groups.get((algo, label, feasible))
                if not lst:
                    continue
                ts = [r[algo][0] for r in lst]
                row = {"algo": algo, "group": label, "feasible": "yes" if feasible else "no",
                       "n": len(lst), "avg_expansions": statistics.fmean(r[algo][1] for r in lst)}
                if timing:
                    row.update(min_us=min(ts), avg_us=statistics.fmean(ts), max_us=max(ts))
                    if "dijkstra" in algos:
                        row["eta"] = statistics.fmean(r["dijkstra"][0] / max(r[algo][0], 1e-9)
                                                      for r in lst)
                rows.append(row)
    return rows


def _summary_text(rows) -> str:
    cols = ["algo", "group", "feasible", "n", "min_us", "avg_us", "max_us", "eta", "avg_expansions"]
    cols = [c for c in cols if any(c in r for r in rows)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([(f"{r[c]:.3f}" if isinstance(r.get(c), float) else r.get(c, "")) for c in cols])
    return buf.getvalue()


def cmd_bench(args) -> int:
    g = load_cache(args.graph)
    e_max = resolve_e_max(g, args.e_max)
    e_init = _e_init(args, e_max)
    if args.repeats < 1:
        raise CliError("--repeats must be >= 1")
    algos = list(ALGORITHMS) if args.algo in (None, "all") else args.algo.split(",")
    for a in algos:
        if a not in ALGORITHMS:
            raise CliError(f"unknown algorithm {a!r}")
    Heuristics(g, 0, 0, args.heuristic, args.lam).fw  # fail early if inconsistent
    queries = read_queries(args.queries, g)
    run_algos = algos + (["astar"] if args.exp_diff and "astar" not in algos else [])
    try:
        if args.jobs > 1:
            with ProcessPoolExecutor(args.jobs, initializer=_worker_init,
                                     initargs=(args.graph, e_max)) as ex:
                futs = [ex.submit(_bench_query, q, run_algos, args.repeats, e_init, args.heuristic,
                                  args.lam) for q in queries]
                results = [f.result() for f in futs]
        else:
            results = [_bench_query(q, run_algos, args.repeats, e_init, args.heuristic, args.lam,
                                    g, e_max) for q in queries]
    except InconsistentHeuristicError as exc:
        raise CliError(str(exc))

    flagged = []
    out, close = _open_out(args.out)
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(BENCH_HEADER + (["exp_diff_vs_astar"] if args.exp_diff else []))
        for qid, recs in results:
            feas = {a: recs[a][4] < INFEASIBLE for a in run_algos}
            if len(set(feas.values())) > 1:
                flagged.append((qid, feas))
            for a in algos:
                dt, exp, gen, nsol, cost = recs[a]
                row = [qid, a, f"{dt:.1f}" if not args.no_timing else "0", exp, gen, nsol, _fmt(cost)]
                if args.exp_diff:
                    ea = recs["astar"][1]
                    row.append(f"{(exp - ea) / ea:.6f}" if ea else "")
                w.writerow(row)
    finally:
        if close:
            out.close()

    summary = _summary_text(bench_summary(results, algos, timing=not args.no_timing))
    if args.summary:
        Path(args.summary).write_text(summary)
    else:
        sys.stderr.write(summary)
    for qid, feas in flagged:
        print(f"FLAG query {qid}: feasibility disagreement {feas}", file=sys.stderr)
    return EXIT_VERIFY if flagged else EXIT_OK


def parse_int_set(text: str) -> list[int]:
    """``"0-499"``, ``"1,5,7"`` or a mix like ``"0-9,20"``."""
    out = []
    try:
        for part in text.split(","):
            if "-" in part.strip()[1:]:
                a, b = part.split("-", 1)
                out.extend(range(int(a), int(b) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise CliError(f"bad integer list {text!r}")
    return out


def cmd_verify(args) -> int:
    from . import verify as V

    seeds = parse_int_set(args.seeds)
    sizes = parse_int_set(args.sizes)
    e_maxes = tuple(parse_int_set(args.e_max_set))
    if min(sizes) < 2 or max(sizes) > 5000:
        raise CliError("--sizes must lie within [2, 5000] for the oracle")
    n_range = (min(sizes), max(sizes))
    report = V.run_oracle_suite(seeds, fault=args.fault, n_range=n_range, e_max_choices=e_maxes)
    lines = report.lines()
    ok = report.passed
    extra = {}
    if args.extended:
        abl = V.run_ablation(seeds[:100])
        lines.append(f"{'PASS' if abl.passed else 'FAIL'} upper-bound ablation: {abl.n_instances} "
                     f"instances, {len(abl.envelope_changes)} envelope changes, expansions "
                     f"{abl.expansions_on} (on) vs {abl.expansions_off} (off)")
        bad = [s for s in seeds[:50] if len(V.parallel_envelope_variants(s, 20)) > 1]
        lines.append(f"{'PASS' if not bad else 'FAIL'} parallel determinism: "
                     f"{min(50, len(seeds))} instances x 20 runs, {len(bad)} unstable")
        ok = ok and abl.passed and not bad
        extra = {"ablation_passed": abl.passed, "unstable_parallel_seeds": bad}
    if args.json:
        d = json.loads(report.to_json())
        d.update(extra, passed=ok)
        print(json.dumps(d))
    else:
        print("\n".join(lines))
    return EXIT_OK if ok else EXIT_VERIFY


# -- argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="evprofile", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def graph_flags(sp):
        sp.add_argument("--graph", help="graph cache written by 'build'")
        sp.add_argument("--e-max", type=float, help="battery capacity in Wh (default: from cache)")

    def heuristic_flags(sp):
        sp.add_argument("--heuristic", choices=("potential", "dynamics", "zero"), default="potential")
        sp.add_argument("--lambda", dest="lam", type=float,
                        help="distance scaling (default: largest consistent value)")

    b = sub.add_parser("build", help="parse DIMACS + elevation files into a graph cache")
    b.add_argument("--gr")
    b.add_argument("--co")
    b.add_argument("--elev")
    b.add_argument("--config", help="JSON file with energy-model parameters")
    b.add_argument("--e-max", type=float, help="override battery capacity (Wh)")
    b.add_argument("--synthetic", type=int, metavar="N", help="generate an N-state graph instead")
    b.add_argument("--layout", choices=("grid", "random"), default="grid")
    b.add_argument("--box-deg", type=float, default=0.5)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out")
    b.set_defaults(func=cmd_build)

    for name, func, default_algo, helptext in (
            ("query", cmd_query, "astar", "optimal cost for one initial energy"),
            ("profile", cmd_profile, "pr-ba", "cost as a function of initial energy")):
        q = sub.add_parser(name, help=helptext)
        graph_flags(q)
        heuristic_flags(q)
        q.add_argument("--start", type=int, required=True)
        q.add_argument("--goal", type=int, required=True)
        q.add_argument("--algo", choices=ALGORITHMS, default=default_algo)
        q.add_argument("--json", action="store_true")
        if name == "query":
            q.add_argument("--e-init", type=float, help="initial energy (default: E_max)")
            q.add_argument("--path", action="store_true", help="print the state sequence")
        q.set_defaults(func=func)

    gn = sub.add_parser("gen", help="write random start/goal pairs")
    graph_flags(gn)
    heuristic_flags(gn)
    gn.add_argument("-n", type=int, default=200)
    gn.add_argument("--seed", type=int, default=0)
    gn.add_argument("--cost-range", help="keep pairs whose full-battery optimum lies in [LO,HI) Wh")
    gn.add_argument("--max-tries", type=int, help="sampling budget for --cost-range (default 50n)")
    gn.add_argument("--out")
    gn.set_defaults(func=cmd_gen)

    bn = sub.add_parser("bench", help="time algorithms over a query file")
    graph_flags(bn)
    heuristic_flags(bn)
    bn.add_argument("--queries", required=True)
    bn.add_argument("--algo", help="comma-separated list or 'all' (default)")
    bn.add_argument("--e-init", type=float, help="initial energy for point costs (default: E_max)")
    bn.add_argument("--repeats", type=int, default=3)
    bn.add_argument("--no-timing", action="store_true", help="write 0 runtimes (byte-stable CSV)")
    bn.add_argument("--exp-diff", action="store_true",
                    help="add per-row expansion difference relative to astar")
    bn.add_argument("--jobs", type=int, default=1, help="parallelize across queries")
    bn.add_argument("--summary", help="write the summary CSV here instead of stderr")
    bn.add_argument("--out")
    bn.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="oracle-equivalence suite on generated graphs")
    v.add_argument("--seeds", default="0-499")
    v.add_argument("--sizes", default="20-60")
    v.add_argument("--e-max", dest="e_max_set", default="20,50,100")
    v.add_argument("--extended", action="store_true",
                   help="also run the upper-bound ablation and parallel determinism checks")
    v.add_argument("--json", action="store_true")
    v.add_argument("--fault", choices=("dominance-inverted",), help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"evprofile {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
