"""Oracle-equivalence suite over generated integer instances.

Every profile search is compared against :func:`soc_dp_oracle` at each
integer initial energy, and the point searches are run once per grid point.
Along the way the suite records extraction-order monotonicity, profile
invariants of generated nodes, heuristic consistency and cross-algorithm
feasibility agreement.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .graph import GraphGenSpec, RoadGraph, generate_test_graph, validate_no_negative_cycle
from .heuristic import Heuristic, check_consistency, make_heuristic
from .oracle import SocGridResult, soc_dp_oracle
from .profile import INFEASIBLE, dominates_ordered
from .search import (ALGORITHMS, PROFILE_ALGORITHMS, SearchTrace, astar_energy, dijkstra_energy,
                     pr_astar_bw, pr_astar_fw, pr_bastar, pr_bastar_par)

E_MAX_CHOICES = (20, 50, 100)
FAULTS = ("dominance-inverted",)


@dataclass(frozen=True)
class Instance:
    seed: int
    graph: RoadGraph
    start: int
    goal: int
    e_max: int
    variant: str


def make_instance(seed: int, n_range=(20, 60), e_max_choices=E_MAX_CHOICES, avg_degree=2.5) -> Instance:
    rng = random.Random(seed)
    n = rng.randint(*n_range)
    e_max = e_max_choices[seed % len(e_max_choices)]
    spec = GraphGenSpec(seed=seed, n_states=n, avg_degree=avg_degree,
                        base_cost_range=(0, max(1, e_max // 10)),
                        height_range=(0, int(0.6 * e_max)), integer_costs=True, e_max=e_max,
                        efficiency=e_max / 200, strongly_connected=True)
    g = generate_test_graph(spec)
    start, goal = rng.sample(range(n), 2)
    return Instance(seed, g, start, goal, e_max, "potential" if seed % 2 == 0 else "dynamics")


def heuristics_for(inst: Instance) -> tuple[Heuristic, Heuristic, Heuristic]:
    """(forward, backward, dijkstra potential) heuristics for an instance."""
    g = inst.graph
    h_fw = make_heuristic(g, inst.goal, "forward", inst.variant)
    h_bw = make_heuristic(g, inst.start, "backward", inst.variant)
    pot = make_heuristic(g, inst.goal, "forward", inst.variant, lam=0.0)
    return h_fw, h_bw, pot


def dominance_for(fault: str | None) -> Callable:
    if fault is None:
        return dominates_ordered
    if fault == "dominance-inverted":
        return lambda x, y: dominates_ordered(y, x)
    raise ValueError(f"unknown fault {fault!r}")


def run_profile(algo, inst, h_fw, h_bw, *, dominance=dominates_ordered, upper_bound=True, trace=None):
    g, s, t, E = inst.graph, inst.start, inst.goal, inst.e_max
    if algo == "pr-fw":
        return pr_astar_fw(g, h_fw, s, t, E, upper_bound=upper_bound, dominance=dominance, trace=trace)
    if algo == "pr-bw":
        return pr_astar_bw(g, h_bw, s, t, E, upper_bound=upper_bound, dominance=dominance, trace=trace)
    if algo == "pr-ba":
        return pr_bastar(g, h_fw, h_bw, s, t, E, upper_bound=upper_bound, dominance=dominance,
                         trace=trace)
    if algo == "pr-ba-par":
        return pr_bastar_par(g, h_fw, h_bw, s, t, E, upper_bound=upper_bound, dominance=dominance,
                             trace=trace)
    raise ValueError(f"not a profile algorithm: {algo}")


@dataclass
class Mismatch:
    seed: int
    algorithm: str
    e_init: int
    expected: float
    got: float


@dataclass
class SuiteReport:
    n_instances: int = 0
    n_grid_points: int = 0
    mismatches: list[Mismatch] = field(default_factory=list)
    f_violations: int = 0
    n_extractions: int = 0
    n_generated: int = 0
    profile_violations: int = 0
    consistency_failures: list[tuple[int, str, float]] = field(default_factory=list)
    max_excess: float = 0.0
    feasibility_disagreements: list[tuple[int, int]] = field(default_factory=list)
    negative_cycle_graphs: list[int] = field(default_factory=list)
    max_solutions: int = 0
    runtime_s: float = 0.0
    per_algorithm_mismatches: dict[str, int] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not (self.mismatches or self.f_violations or self.profile_violations
                    or self.consistency_failures or self.feasibility_disagreements
                    or self.negative_cycle_graphs)

    @property
    def first_failing_seed(self) -> int | None:
        seeds = [m.seed for m in self.mismatches]
        seeds += [s for s, _ in self.feasibility_disagreements]
        seeds += [s for s, _, _ in self.consistency_failures]
        seeds += self.negative_cycle_graphs
        return min(seeds) if seeds else None

    def lines(self) -> list[str]:
        def mark(ok):
            return "PASS" if ok else "FAIL"

        out = [
            f"{mark(not self.mismatches)} oracle equivalence: {self.n_instances} instances, "
            f"{self.n_grid_points} grid points, {len(self.mismatches)} mismatches "
            f"{self.per_algorithm_mismatches or ''}".rstrip(),
            f"{mark(not self.f_violations)} f-monotonicity: {self.n_extractions} extractions, "
            f"{self.f_violations} violations",
            f"{mark(not self.profile_violations)} profile invariants: {self.n_generated} generated, "
            f"{self.profile_violations} violations",
            f"{mark(not self.consistency_failures)} heuristic consistency: max excess "
            f"{self.max_excess:.3g} Wh, {len(self.consistency_failures)} failures",
            f"{mark(not self.feasibility_disagreements)} feasibility agreement: "
            f"{len(self.feasibility_disagreements)} disagreements",
            f"{mark(not self.negative_cycle_graphs)} negative-cycle free: "
            f"{len(self.negative_cycle_graphs)} bad graphs",
            f"max solution-set size {self.max_solutions}; runtime {self.runtime_s:.1f} s",
        ]
        if not self.passed:
            out.append(f"first failing seed: {self.first_failing_seed}")
        return out

    def to_json(self) -> str:
        return json.dumps({
            "passed": self.passed,
            "n_instances": self.n_instances,
            "n_grid_points": self.n_grid_points,
            "mismatches": len(self.mismatches),
            "per_algorithm_mismatches": self.per_algorithm_mismatches,
            "f_violations": self.f_violations,
            "profile_violations": self.profile_violations,
            "consistency_failures": len(self.consistency_failures),
            "max_excess": self.max_excess,
            "feasibility_disagreements": len(self.feasibility_disagreements),
            "first_failing_seed": self.first_failing_seed,
            "max_solutions": self.max_solutions,
            "runtime_s": self.runtime_s,
        })


def check_instance_heuristics(inst: Instance, report: SuiteReport, tol: float = 1e-6) -> None:
    g = inst.graph
    for variant in ("potential", "dynamics"):
        for direction, target in (("forward", inst.goal), ("backward", inst.start)):
            # calibrated lambda, plus lambda = 0 (the reweighting Dijkstra uses)
            for lam in (None, 0.0):
                h = make_heuristic(g, target, direction, variant, lam=lam)
                rep = check_consistency(g, h, tol)
                report.max_excess = max(report.max_excess, rep.max_excess)
                if not rep.consistent:
                    tag = f"{variant}/{direction}" + ("/potential-only" if lam == 0.0 else "")
                    report.consistency_failures.append((inst.seed, tag, rep.max_excess))


def run_instance(inst: Instance, report: SuiteReport, algorithms: Iterable[str] = ALGORITHMS,
                 fault: str | None = None, oracle: SocGridResult | None = None) -> None:
    g, E = inst.graph, inst.e_max
    algorithms = list(algorithms)
    dominance = dominance_for(fault)
    if oracle is None:
        oracle = soc_dp_oracle(g, inst.start, inst.goal, E)
    h_fw, h_bw, pot = heuristics_for(inst)
    trace = SearchTrace(E)
    report.n_instances += 1
    report.n_grid_points += E + 1
    check_instance_heuristics(inst, report)
    if not validate_no_negative_cycle(g):
        report.negative_cycle_graphs.append(inst.seed)

    costs: dict[str, list[float]] = {}
    for algo in algorithms:
        if algo in PROFILE_ALGORITHMS:
            sub = trace.child()
            res = run_profile(algo, inst, h_fw, h_bw, dominance=dominance, trace=sub)
            report.max_solutions = max(report.max_solutions, len(res.solutions))
            env = res.envelope()
            costs[algo] = [env(float(e)) for e in range(E + 1)]
        else:
            costs[algo] = []
            for e in range(E + 1):
                sub = trace.child()
                if algo == "astar":
                    res = astar_energy(g, h_fw, inst.start, inst.goal, e, E, trace=sub)
                else:
                    res = dijkstra_energy(g, pot, inst.start, inst.goal, e, E, trace=sub)
                costs[algo].append(res.cost)
                trace.absorb(sub)
            continue
        trace.absorb(sub)

    for algo, cs in costs.items():
        for e in range(E + 1):
            if cs[e] != oracle.costs[e]:
                report.mismatches.append(Mismatch(inst.seed, algo, e, oracle.costs[e], cs[e]))
                report.per_algorithm_mismatches[algo] = report.per_algorithm_mismatches.get(algo, 0) + 1
    for e in range(E + 1):
        feas = {cs[e] < INFEASIBLE for cs in costs.values()}
        if len(feas) > 1:
            report.feasibility_disagreements.append((inst.seed, e))

    report.f_violations += trace.f_violations
    report.n_extractions += trace.n_extracted
    report.n_generated += trace.n_generated
    report.profile_violations += len(trace.profile_violations)


def run_oracle_suite(seeds: Iterable[int], algorithms: Iterable[str] = ALGORITHMS,
                     fault: str | None = None, n_range=(20, 60), e_max_choices=E_MAX_CHOICES,
                     stop_on_failure: bool = False, progress: Callable[[int], None] | None = None
                     ) -> SuiteReport:
    t0 = time.perf_counter()
    report = SuiteReport()
    algorithms = list(algorithms)
    for seed in seeds:
        inst = make_instance(seed, n_range, e_max_choices)
        run_instance(inst, report, algorithms, fault)
        if progress is not None:
            progress(seed)
        if stop_on_failure and not report.passed:
            break
    report.runtime_s = time.perf_counter() - t0
    return report


@dataclass
class AblationReport:
    n_instances: int = 0
    envelope_changes: list[tuple[int, str]] = field(default_factory=list)
    expansions_on: int = 0
    expansions_off: int = 0

    @property
    def passed(self) -> bool:
        return not self.envelope_changes and self.expansions_off >= self.expansions_on


def run_ablation(seeds: Iterable[int], algorithms=("pr-fw", "pr-bw", "pr-ba")) -> AblationReport:
    """Compare profile searches with and without the upper-bound termination."""
    rep = AblationReport()
    for seed in seeds:
        inst = make_instance(seed)
        h_fw, h_bw, _ = heuristics_for(inst)
        rep.n_instances += 1
        for algo in algorithms:
            on = run_profile(algo, inst, h_fw, h_bw, upper_bound=True)
            off = run_profile(algo, inst, h_fw, h_bw, upper_bound=False)
            rep.expansions_on += on.stats.expansions
            rep.expansions_off += off.stats.expansions
            if on.envelope() != off.envelope():
                rep.envelope_changes.append((seed, algo))
    return rep


def parallel_envelope_variants(seed: int, runs: int = 20) -> set[str]:
    """Distinct serialized envelopes over repeated two-thread runs of one instance."""
    inst = make_instance(seed)
    h_fw, h_bw, _ = heuristics_for(inst)
    out = set()
    for _ in range(runs):
        res = run_profile("pr-ba-par", inst, h_fw, h_bw)
        out.add(json.dumps(res.envelope().to_json(), sort_keys=True))
    return out
