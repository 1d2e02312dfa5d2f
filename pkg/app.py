"""Command-line front end: scenarios in, verdicts, logs and diagrams out."""

import functools
import json
import logging
import os
import sys

import click

from acceptance import run_acceptance, run_scenario
from attacks import STRATEGIES, UnknownStrategyError, run_attack
from commit import (
    CommitmentState, MalformedStateError, Opening, RevealRequest, commit_phase, reveal_phase,
)
from commit_opt import (
    per_tick_work_profile, reveal_optimized, run_baseline_commit, run_optimized_commit,
    write_profile_csv,
)
from diagrams import write_svg
from forms import ConfigError, load_scenario
from models import Run, connect_db
from pv import run_singleton_pv
from spacetime import GeometryError
from zkpv import zk_position_verify

logger = logging.getLogger(__name__)

EXIT_ACCEPT, EXIT_REJECT, EXIT_CONFIG = 0, 1, 2
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(verbose):
    """Level from -v/-vv, else POSCOMMIT_LOG_LEVEL, else WARNING."""

    if verbose:
        level = logging.DEBUG if verbose > 1 else logging.INFO
    else:
        level = os.environ.get("POSCOMMIT_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def handle_config_errors(command):
    """Map scenario, state-file and geometry problems to exit status 2."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ConfigError as exc:
            for pointer, message in exc.problems:
                click.echo(f"{pointer}: {message}", err=True)
        except (MalformedStateError, GeometryError) as exc:
            click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)

    return wrapper


def emit(verdict, path=None):
    """Verdict JSON on stdout and, optionally, to a file."""

    text = json.dumps(verdict, indent=2, sort_keys=True, default=str)
    click.echo(text)
    if path:
        with open(path, "w") as out:
            out.write(text + "\n")


def write_artifacts(sim, log_path, svg_path, title):
    if log_path:
        sim.write_ndjson(log_path)
    if svg_path:
        write_svg(svg_path, sim.log, sim.positions(), title=title)


def finish(accepted):
    sys.exit(EXIT_ACCEPT if accepted else EXIT_REJECT)


scenario_option = click.option(
    "--scenario", "scenario_path", required=True, type=click.Path(exists=True, dir_okay=False),
    help="Scenario JSON file.",
)
log_option = click.option("--log", "log_path", type=click.Path(dir_okay=False),
                          help="Write the NDJSON event log here.")
svg_option = click.option("--svg", "svg_path", type=click.Path(dir_okay=False),
                          help="Write a spacetime diagram here.")
verdict_option = click.option("--verdict", "verdict_path", type=click.Path(dir_okay=False),
                              help="Also write the verdict JSON here.")


@click.group()
@click.option("-v", "--verbose", count=True, help="-v for INFO, -vv for DEBUG.")
def cli(verbose):
    """Position verification, position commitments and their attacks."""

    configure_logging(verbose)


##############################################################################
# Position verification


@cli.group()
def pv():
    """Singleton f-BB84 position verification."""


@pv.command("run")
@scenario_option
@log_option
@svg_option
@verdict_option
@handle_config_errors
def pv_run(scenario_path, log_path, svg_path, verdict_path):
    """Run the scenario's rounds against an honest prover at the target."""

    cfg = load_scenario(scenario_path)
    result = run_singleton_pv(cfg.pv_instance(), seed=cfg.seed)
    write_artifacts(result.sim, log_path, svg_path, cfg.name)
    emit({"scenario": cfg.name, "accepted": result.accepted, "rounds": result.rounds}, verdict_path)
    finish(result.accepted)


##############################################################################
# Position commitments


@cli.group()
def pc():
    """Encrypt-then-verify position commitments."""


@pc.command("commit")
@scenario_option
@click.option("--alpha", type=int, help="Index of the prover's point in S (default: scenario alpha).")
@click.option("--state", "state_path", required=True, type=click.Path(dir_okay=False),
              help="Where to write the commitment state.")
@click.option("--opening", "opening_path", required=True, type=click.Path(dir_okay=False),
              help="Where to write the prover's opening.")
@log_option
@svg_option
@handle_config_errors
def pc_commit(scenario_path, alpha, state_path, opening_path, log_path, svg_path):
    """Run the commit phase and store the state and opening."""

    cfg = load_scenario(scenario_path)
    alpha = cfg.alpha if alpha is None else alpha
    geometry, params = cfg.committable_set(), cfg.commit_params()
    if alpha is None or not 0 <= alpha < len(geometry):
        raise ConfigError([("/alpha", "Choose the prover's point with --alpha.")])
    run = commit_phase(geometry, params, cfg.seed, prover_alpha=alpha)
    with open(state_path, "wb") as out:
        out.write(run.rho.to_bytes())
    with open(opening_path, "wb") as out:
        out.write(run.opening.to_bytes())
    write_artifacts(run.sim, log_path, svg_path, cfg.name)
    emit({"scenario": cfg.name, "entries": len(run.rho.M), "points": len(geometry)})
    finish(True)


@pc.command("reveal")
@scenario_option
@click.option("--alpha", type=int, required=True, help="Claimed point index.")
@click.option("--state", "state_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--opening", "opening_path", required=True, type=click.Path(exists=True, dir_okay=False))
@verdict_option
@handle_config_errors
def pc_reveal(scenario_path, alpha, state_path, opening_path, verdict_path):
    """Check an opening against a stored commitment state."""

    cfg = load_scenario(scenario_path)
    with open(state_path, "rb") as f:
        rho = CommitmentState.from_bytes(f.read())
    with open(opening_path, "rb") as f:
        opening = Opening.from_bytes(f.read())
    result = reveal_phase(rho, RevealRequest(alpha, opening), cfg.committable_set(), cfg.commit_params())
    emit({"alpha": alpha, "accepted": result.accepted, "accepting": sorted(result.accepting),
          "reason": result.reason}, verdict_path)
    finish(result.accepted)


@cli.group("pc-opt")
def pc_opt():
    """The optimized mesh commitment."""


@pc_opt.command("run")
@scenario_option
@click.option("--ticks", type=int, help="Number of ticks (default: scenario).")
@click.option("--delta", help="Tick interval as a rational (default: scenario).")
@click.option("--alpha", type=int, help="Mesh point index of the prover (default: scenario or 0).")
@click.option("--quantum", is_flag=True, help="Aim a BB84 qubit at the prover's mesh point.")
@click.option("--profile", "profile_path", type=click.Path(dir_okay=False),
              help="Write the per-tick work profile CSV here.")
@click.option("--baseline", "baseline_path", type=click.Path(dir_okay=False),
              help="Also profile the dummy-per-point scheme over the mesh.")
@log_option
@svg_option
@verdict_option
@handle_config_errors
def pc_opt_run(scenario_path, ticks, delta, alpha, quantum, profile_path, baseline_path, log_path,
               svg_path, verdict_path):
    """Commit on the mesh, reveal, and report per-tick work."""

    cfg = load_scenario(scenario_path)
    geometry, params = cfg.opt_geometry(ticks, delta), cfg.opt_params()
    alpha = (cfg.alpha or 0) if alpha is None else alpha
    if not 0 <= alpha < len(geometry):
        raise ConfigError([("/alpha", f"The mesh has {len(geometry)} points.")])
    run = run_optimized_commit(geometry, alpha, cfg.seed, params, quantum)
    result = reveal_optimized(run.rho, RevealRequest(alpha, run.opening), geometry, params,
                              run.quantum_target)
    profile = per_tick_work_profile(run)
    if profile_path:
        write_profile_csv(profile, profile_path)
    verdict = {
        "accepted": result.accepted,
        "mesh_points": len(geometry),
        "max_prover_ops_per_tick": profile.max_per_tick("prover"),
        "reason": result.reason,
    }
    if baseline_path:
        baseline = per_tick_work_profile(
            run_baseline_commit(geometry, alpha, cfg.seed, cfg.commit_params()), geometry.schedule
        )
        write_profile_csv(baseline, baseline_path)
        verdict["baseline_max_prover_ops_per_tick"] = baseline.max_per_tick("prover")
    write_artifacts(run.sim, log_path, svg_path, cfg.name)
    emit(verdict, verdict_path)
    finish(result.accepted)


##############################################################################
# Zero-knowledge position verification


@cli.group()
def zkpv():
    """Zero-knowledge proofs of being somewhere in R."""


@zkpv.command("run")
@scenario_option
@click.option("--alpha", type=int, help="Index of the prover's point in S (default: scenario).")
@click.option("--reps", type=int, help="ZK repetitions (default: scenario or 40).")
@click.option("--strategy", type=click.Choice(["cheat", "honest"]), default="cheat", show_default=True,
              help="What a prover without a witness does.")
@log_option
@svg_option
@verdict_option
@handle_config_errors
def zkpv_run(scenario_path, alpha, reps, strategy, log_path, svg_path, verdict_path):
    """Commit, then prove membership of R without revealing the point."""

    cfg = load_scenario(scenario_path)
    alpha = cfg.alpha if alpha is None else alpha
    reps = reps or cfg.params.get("reps", 40)
    verdict = zk_position_verify(cfg.committable_set(), cfg.region_indices(), alpha,
                                 cfg.commit_params(), reps, cfg.seed, strategy)
    write_artifacts(verdict.commit_run.sim, log_path, svg_path, cfg.name)
    emit(verdict.to_dict(), verdict_path)
    finish(verdict.accepted)


##############################################################################
# Attacks


@cli.group()
def attack():
    """Spoofing experiments with measured success rates."""


@attack.command("list")
def attack_list():
    """Registered attack names."""

    for name in sorted(STRATEGIES):
        click.echo(name)


@attack.command("run")
@click.option("--name", required=True, help="Registered attack name (see `attack list`).")
@click.option("--trials", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True,
              help="Worker processes for independent trials.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False),
              help="Write the report JSON here.")
@click.option("--ledger", is_flag=True, help="Record the run in the DATABASE_URL ledger.")
def attack_run(name, trials, seed, jobs, report_path, ledger):
    """Run an attack; the report is {name, trials, successes, rate, ci95}."""

    try:
        report = run_attack(name, trials, seed, jobs)
    except UnknownStrategyError:
        click.echo(f"unknown attack {name!r}; try `attack list`", err=True)
        sys.exit(EXIT_CONFIG)
    data = report.to_dict()
    if ledger:
        Session = connect_db()
        with Session() as session:
            Run.record(session, "attack", data, seed)
            session.commit()
    emit(data, report_path)


##############################################################################
# Reports


@cli.group()
def report():
    """Acceptance suite and run history."""


@report.command("acceptance")
@click.option("--quick", is_flag=True, help="Scaled-down trial counts.")
@click.option("--only", type=int, multiple=True, help="Run only these criterion numbers.")
@click.option("--ledger", is_flag=True, help="Record each criterion in the ledger.")
@click.option("--json", "json_path", type=click.Path(dir_okay=False), help="Write results JSON here.")
def report_acceptance(quick, only, ledger, json_path):
    """Run the acceptance criteria and print a pass/fail table."""

    results = run_acceptance(quick, set(only))
    for r in results:
        click.echo(f"{r.number:>2}  {'PASS' if r.passed else 'FAIL'}  {r.title:<28} {r.detail}")
    if ledger:
        Session = connect_db()
        with Session() as session:
            for r in results:
                Run.record(session, "acceptance", {"name": f"criterion-{r.number}"}, 0,
                           "PASS" if r.passed else "FAIL")
            session.commit()
    if json_path:
        with open(json_path, "w") as out:
            json.dump([r.to_dict() for r in results], out, indent=2)
    finish(all(r.passed for r in results))


@report.command("history")
@click.option("--name", help="Only runs with this name.")
@click.option("--limit", type=click.IntRange(min=1), default=20, show_default=True)
def report_history(name, limit):
    """Most recent ledger rows."""

    Session = connect_db()
    with Session() as session:
        for run in Run.history(session, name, limit):
            click.echo(json.dumps(run.to_dict(), sort_keys=True))


@cli.command("scenario")
@scenario_option
@log_option
@svg_option
@handle_config_errors
def scenario(scenario_path, log_path, svg_path):
    """Run any scenario file with its own pipeline."""

    cfg = load_scenario(scenario_path)
    outcome = run_scenario(cfg)
    write_artifacts(outcome.sim, log_path, svg_path, cfg.name)
    emit(outcome.summary)
    finish(outcome.accepted)


if __name__ == "__main__":
    cli()
