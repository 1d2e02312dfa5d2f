"""Scenario pipelines and the acceptance suite behind `report acceptance`."""

import glob
import logging
import math
import os
from dataclasses import dataclass

import numpy as np

import attacks
from commit import (
    CommitParams, CommittableSet, RevealRequest, commit_phase, hiding_simulator, reveal_phase,
    view_at,
)
from commit_opt import (
    OptGeometry, OptParams, TickSchedule, per_tick_work_profile,
    reveal_optimized, run_baseline_commit, run_optimized_commit,
)
from engine import audit_causality
from forms import load_scenario
from pv import PvInstance, run_singleton_pv
from spacetime import SpacetimePoint, to_fixed
from zkpv import (
    distinguisher_suite, zk_position_verify, zkpv_real_view, zkpv_simulator, zkpv_soundness,
)

logger = logging.getLogger(__name__)

SCENARIO_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "scenarios")

TOY_PARAMS = CommitParams(n=4, r=1, kappa=8, lam=4)
SIMULATOR_SEED_BASE = 1_000_000


##############################################################################
# Scenario pipelines


@dataclass
class ScenarioOutcome:
    accepted: bool
    summary: dict
    sim: object

    @property
    def log(self):
        return self.sim.log


def run_scenario(cfg):
    """Run a validated scenario end to end with its own seed."""

    if cfg.kind == "pv":
        result = run_singleton_pv(cfg.pv_instance(), seed=cfg.seed)
        return ScenarioOutcome(result.accepted, {"accepted": result.accepted, "rounds": result.rounds},
                               result.sim)
    if cfg.kind == "commit":
        geometry, params = cfg.committable_set(), cfg.commit_params()
        run = commit_phase(geometry, params, cfg.seed, prover_alpha=cfg.alpha)
        if run.opening is None:
            return ScenarioOutcome(False, {"accepted": False, "reason": "no prover"}, run.sim)
        reveal = reveal_phase(run.rho, RevealRequest(cfg.alpha, run.opening), geometry, params)
        return ScenarioOutcome(reveal.accepted, {
            "accepted": reveal.accepted, "accepting": sorted(reveal.accepting), "reason": reveal.reason,
        }, run.sim)
    if cfg.kind == "opt":
        geometry, params = cfg.opt_geometry(), cfg.opt_params()
        alpha = 0 if cfg.alpha is None else cfg.alpha
        run = run_optimized_commit(geometry, alpha, cfg.seed, params)
        reveal = reveal_optimized(run.rho, RevealRequest(alpha, run.opening), geometry, params)
        return ScenarioOutcome(reveal.accepted, {
            "accepted": reveal.accepted, "mesh_points": len(geometry), "reason": reveal.reason,
        }, run.sim)
    if cfg.kind == "zkpv":
        geometry, params = cfg.committable_set(), cfg.commit_params()
        reps = cfg.params.get("reps", 8)
        verdict = zk_position_verify(geometry, cfg.region_indices(), cfg.alpha, params, reps, cfg.seed)
        return ScenarioOutcome(verdict.accepted, verdict.to_dict(), verdict.commit_run.sim)
    raise ValueError(f"unknown scenario kind {cfg.kind!r}")


def bundled_scenarios():
    paths = glob.glob(os.path.join(SCENARIO_DIR, "*.json"))
    return sorted(p for p in paths if not p.endswith(".schema.json"))


##############################################################################
# Criteria


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str

    def to_dict(self):
        return {"criterion": self.number, "title": self.title, "passed": self.passed,
                "detail": self.detail}


def _n(quick, full, small):
    return small if quick else full


def _seed_span(report):
    seeds = report.simulator_seeds
    if not seeds:
        return "no simulator seeds"
    return f"{len(seeds)} simulator seeds, first {seeds[0]}, last {seeds[-1]}"


def _line_instance(r=1, n=8):
    return PvInstance(attacks.DEFAULT_VERIFIERS, attacks.DEFAULT_TARGET, n=n, r=r)


def _plane_instance(r=1):
    return PvInstance(((0, 0), (6, 0), (0, 6)), SpacetimePoint((2, 2), 5), r=r)


def completeness(quick):
    runs = _n(quick, 1000, 10)
    accepted = 0
    for inst in (_line_instance(r=20), _plane_instance(r=20)):
        accepted += sum(run_singleton_pv(inst, seed=s).accepted for s in range(runs))
    return accepted == 2 * runs, f"{accepted}/{2 * runs} honest runs accepted"


def intercept_resend_bound(quick):
    report = attacks.intercept_resend_attack(_line_instance(), trials=_n(quick, 10000, 400), seed=1)
    rate = report.extra["round_rate"]
    many = attacks.intercept_resend_attack(_line_instance(r=20), trials=_n(quick, 10000, 100), seed=2)
    tolerance = 0.02 if not quick else 0.07
    ok = abs(rate - 0.75) <= tolerance and many.rate <= 0.01
    return ok, f"per-round {rate:.4f}, r=20 acceptance {many.rate:.4f}"


def epr_attack(quick):
    plain = attacks.epr_attack_plain_bb84(trials=_n(quick, 10000, 100), seed=3)
    contrast = attacks.epr_attack_plain_bb84(
        _line_instance(n=32), trials=_n(quick, 2000, 200), seed=4, protocol=attacks.FBB84(32),
    )
    ok = plain.rate == 1.0 and contrast.extra["round_rate"] <= 0.85
    return ok, f"plain {plain.successes}/{plain.trials}, inner product {contrast.extra['round_rate']:.4f}"


def classical_copy(quick):
    report = attacks.classical_copy_attack(_line_instance(), trials=_n(quick, 1000, 50), seed=5)
    return report.rate == 1.0, f"{report.successes}/{report.trials} accepted"


def _nine_points():
    return CommittableSet(((0,), (10,)), [((L,), 10) for L in range(1, 10)])


def commitment_completeness(quick):
    geometry = _nine_points()
    params = CommitParams(n=8, r=1, kappa=16, lam=8)
    runs = _n(quick, 100, 1)
    accepted = total = 0
    for alpha in range(len(geometry)):
        for s in range(runs):
            run = commit_phase(geometry, params, s, prover_alpha=alpha)
            accepted += reveal_phase(run.rho, RevealRequest(alpha, run.opening), geometry, params).accepted
            total += 1
    return accepted == total, f"{accepted}/{total} reveals accepted"


def position_binding(quick):
    geometry = attacks.default_committable_set()
    honest = attacks.binding_attack_suite(
        geometry, CommitParams(n=4, r=1, kappa=8, lam=8), ("honest",), _n(quick, 1000, 20), seed=6,
    )["honest"]
    elsewhere = sum(honest["success"][1:])
    equivocation = attacks.binding_attack_suite(
        geometry, CommitParams(n=4, r=1, kappa=64, lam=8), ("equivocation",), _n(quick, 64, 2), seed=7,
    )["equivocation"]
    ok = elsewhere == 0 and honest["success"][0] == honest["trials"] and equivocation["openings_found"] == 0
    return ok, (f"other-point accepts {elsewhere}, equivocations {equivocation['openings_found']} "
                f"within {equivocation['radius']} flipped bits in {equivocation['tries']} tries")


def hiding_surrogate(quick):
    geometry = _nine_points()
    params = CommitParams(n=8, r=1, kappa=16, lam=8)
    samples = _n(quick, 1000, 100)
    tau = geometry.t_final
    ends = (0, len(geometry) - 1)
    groups, simulated = ([], []), []
    for s in range(2 * samples):
        run = commit_phase(geometry, params, s, prover_alpha=ends[s % 2])
        groups[s % 2].append(view_at(run.rho, tau))
        simulated.append(hiding_simulator(run.rho.pp, geometry, params, tau, SIMULATOR_SEED_BASE + s))
    report = distinguisher_suite(groups[0] + groups[1], simulated, cross_alpha=groups)
    checks = ", ".join(f"{r.name}={r.p_value:.3g}" for r in report.results)
    return report.passed, f"{checks}; {_seed_span(report)}"


def zk_soundness(quick):
    geometry = attacks.default_committable_set()
    R = frozenset({0})
    commits, per = (_n(quick, 10000, 30), 10)
    accepted, total = zkpv_soundness(geometry, R, 2, TOY_PARAMS, reps=8, commits=commits,
                                     challenges_per_commit=per, seed=9)
    p = (2 / 3) ** 8
    bound = p + 3 * math.sqrt(p * (1 - p) / total)
    strong, strong_total = zkpv_soundness(geometry, R, 2, TOY_PARAMS, reps=40, commits=commits,
                                          challenges_per_commit=per, seed=10)
    ok = accepted / total <= bound and strong == 0
    return ok, f"reps=8 {accepted}/{total} (bound {bound:.4f}), reps=40 {strong}/{strong_total}"


def zkpv_end_to_end(quick):
    geometry = attacks.default_committable_set()
    R = frozenset({0, 1})
    reps = 8
    honest = all(
        zk_position_verify(geometry, R, alpha, TOY_PARAMS, reps, seed=s).accepted
        for alpha in sorted(R) for s in range(_n(quick, 10, 1))
    )
    trials = _n(quick, 300, 30)
    outside = sum(
        zk_position_verify(geometry, R, 2, TOY_PARAMS, reps, seed=s).accepted for s in range(trials)
    )
    p = (2 / 3) ** reps
    bound = p + 3 * math.sqrt(p * (1 - p) / trials)

    samples = _n(quick, 300, 100)
    tau = geometry.t_final + to_fixed(1)
    rng = np.random.default_rng(11)
    groups = tuple(
        [zkpv_real_view(zk_position_verify(geometry, R, alpha, TOY_PARAMS, reps, seed=s), tau)
         for s in range(alpha * samples, (alpha + 1) * samples)]
        for alpha in (0, 1)
    )
    simulated = [zkpv_simulator(geometry, R, tau, rng, TOY_PARAMS, reps) for _ in range(2 * samples)]
    suite = distinguisher_suite(groups[0] + groups[1], simulated, cross_alpha=groups)
    ok = honest and outside / trials <= bound and suite.passed
    return ok, (f"honest {'ok' if honest else 'FAILED'}, outside {outside}/{trials}, "
                f"suite {'PASS' if suite.passed else 'FAIL'}; {_seed_span(suite)}")


def _line_opt(ticks):
    return OptGeometry(attacks.DEFAULT_VERIFIERS, TickSchedule.from_ticks(ticks, 1))


def optimized_work(quick):
    small, large = (6, 60) if quick else (10, 100)
    params = OptParams(n=4, kappa=8, lam=8)
    prover_max, baseline_max, sizes = [], [], []
    for ticks in (small, large):
        geometry = _line_opt(ticks)
        sizes.append(len(geometry))
        run = run_optimized_commit(geometry, 0, seed=12, params=params)
        prover_max.append(per_tick_work_profile(run).max_per_tick("prover"))
        base = run_baseline_commit(geometry, 0, seed=12, params=CommitParams(n=4, kappa=8, lam=8))
        baseline_max.append(per_tick_work_profile(base, geometry.schedule).max_per_tick("prover"))
    ok = sizes[1] >= 10 * sizes[0] and prover_max[0] == prover_max[1] and baseline_max[1] >= 5 * baseline_max[0]
    return ok, f"mesh {sizes}, optimized max/tick {prover_max}, baseline max/tick {baseline_max}"


def denial_privacy(quick):
    report = attacks.denial_privacy_attack(
        attacks.default_committable_set(), {0}, trials=_n(quick, 1000, 10), seed=13,
    )
    return report.rate == 1.0, f"{report.successes}/{report.trials} predictions correct"


def determinism_audit(quick):
    problems = []
    paths = bundled_scenarios()
    for path in paths:
        cfg = load_scenario(path)
        first, second = run_scenario(cfg), run_scenario(cfg)
        if first.sim.ndjson() != second.sim.ndjson():
            problems.append(f"{os.path.basename(path)}: logs differ")
        if audit_causality(first.log, first.sim.positions()):
            problems.append(f"{os.path.basename(path)}: causality violation")
    return not problems, "; ".join(problems) or f"{len(paths)} scenarios identical and causal"


CRITERIA = [
    (1, "f-BB84 completeness", completeness),
    (2, "intercept-resend bound", intercept_resend_bound),
    (3, "EPR attack on plain BB84", epr_attack),
    (4, "classical copy attack", classical_copy),
    (5, "commitment completeness", commitment_completeness),
    (6, "position binding", position_binding),
    (7, "hiding surrogate", hiding_surrogate),
    (8, "ZK soundness", zk_soundness),
    (9, "ZKPV end to end", zkpv_end_to_end),
    (10, "optimized per-tick work", optimized_work),
    (11, "denial privacy attack", denial_privacy),
    (12, "determinism and causality", determinism_audit),
]


def run_acceptance(quick=False, only=None):
    results = []
    for number, title, check in CRITERIA:
        if only and number not in only:
            continue
        logger.info("criterion %d: %s", number, title)
        passed, detail = check(quick)
        results.append(CriterionResult(number, title, bool(passed), detail))
    return results
