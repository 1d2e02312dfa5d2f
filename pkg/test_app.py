"""Command-line tests."""

# run these tests like:
#
#    python -m unittest test_app.py


import json
import os
import tempfile
from unittest import TestCase

from click.testing import CliRunner

from acceptance import bundled_scenarios, run_acceptance, run_scenario
from app import EXIT_ACCEPT, EXIT_CONFIG, EXIT_REJECT, cli
from forms import load_scenario

SCENARIO_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "scenarios")


def scenario(name):
    return os.path.join(SCENARIO_DIR, f"{name}.json")


class CliTestCase(TestCase):
    """Commands, exit codes and artifacts."""

    def setUp(self):
        self.runner = CliRunner(mix_stderr=False)
        self.tmp = tempfile.TemporaryDirectory()
        self.env = {"DATABASE_URL": f"sqlite:///{os.path.join(self.tmp.name, 'ledger.db')}"}

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def invoke(self, *args):
        return self.runner.invoke(cli, list(args), env=self.env)

    def test_pv_run(self):
        """Does an honest scenario exit 0 and write its artifacts?"""

        result = self.invoke("pv", "run", "--scenario", scenario("pv-midpoint"),
                             "--log", self.path("run.ndjson"), "--svg", self.path("run.svg"))
        self.assertEqual(result.exit_code, EXIT_ACCEPT, result.stderr)
        self.assertTrue(json.loads(result.stdout)["accepted"])
        with open(self.path("run.ndjson")) as fh:
            kinds = {json.loads(line)["kind"] for line in fh}
        self.assertIn("deliver", kinds)
        self.assertTrue(os.path.exists(self.path("run.svg")))

    def test_commit_and_reveal(self):
        """Do stored state and opening reveal the committed point only?"""

        state, opening = self.path("rho.bin"), self.path("opening.bin")
        result = self.invoke("pc", "commit", "--scenario", scenario("commit-line"),
                             "--state", state, "--opening", opening)
        self.assertEqual(result.exit_code, EXIT_ACCEPT, result.stderr)

        result = self.invoke("pc", "reveal", "--scenario", scenario("commit-line"), "--alpha", "4",
                             "--state", state, "--opening", opening,
                             "--verdict", self.path("verdict.json"))
        self.assertEqual(result.exit_code, EXIT_ACCEPT, result.stderr)
        with open(self.path("verdict.json")) as fh:
            self.assertEqual(json.load(fh)["accepting"], [4])

        result = self.invoke("pc", "reveal", "--scenario", scenario("commit-line"), "--alpha", "3",
                             "--state", state, "--opening", opening)
        self.assertEqual(result.exit_code, EXIT_REJECT)

    def test_corrupt_state(self):
        """Is a damaged state file a configuration error?"""

        state, opening = self.path("rho.bin"), self.path("opening.bin")
        self.invoke("pc", "commit", "--scenario", scenario("commit-line"),
                    "--state", state, "--opening", opening)
        with open(state, "r+b") as fh:
            fh.truncate(10)
        result = self.invoke("pc", "reveal", "--scenario", scenario("commit-line"), "--alpha", "4",
                             "--state", state, "--opening", opening)
        self.assertEqual(result.exit_code, EXIT_CONFIG)
        self.assertIn("error:", result.stderr)

    def test_invalid_scenario(self):
        """Are validation problems printed with pointers and exit 2?"""

        path = self.path("bad.json")
        with open(path, "w") as fh:
            json.dump({"name": "bad", "kind": "pv", "seed": -1}, fh)
        result = self.invoke("pv", "run", "--scenario", path)
        self.assertEqual(result.exit_code, EXIT_CONFIG)
        self.assertIn("/seed:", result.stderr)

    def test_opt_run(self):
        """Does the optimized scheme report its mesh and per-tick work?"""

        result = self.invoke("pc-opt", "run", "--scenario", scenario("opt-line"),
                             "--profile", self.path("profile.csv"))
        self.assertEqual(result.exit_code, EXIT_ACCEPT, result.stderr)
        verdict = json.loads(result.stdout)
        self.assertEqual(verdict["mesh_points"], 13 * 10 - 42)
        self.assertTrue(os.path.exists(self.path("profile.csv")))

    def test_opt_alpha_range(self):
        """Is a mesh index past the mesh refused?"""

        result = self.invoke("pc-opt", "run", "--scenario", scenario("opt-line"), "--alpha", "5000")
        self.assertEqual(result.exit_code, EXIT_CONFIG)

    def test_zkpv_run(self):
        """Is a prover inside R accepted?"""

        result = self.invoke("zkpv", "run", "--scenario", scenario("zkpv-region"), "--reps", "4")
        self.assertEqual(result.exit_code, EXIT_ACCEPT, result.stderr)
        self.assertEqual(json.loads(result.stdout)["reps"], 4)

    def test_attack_list(self):
        """Are the registered attacks listed?"""

        result = self.invoke("attack", "list")
        self.assertIn("epr-plain-bb84", result.stdout.split())

    def test_attack_run_and_history(self):
        """Is an attack report written and kept in the ledger?"""

        result = self.invoke("attack", "run", "--name", "classical-copy", "--trials", "3",
                             "--ledger", "--report", self.path("report.json"))
        self.assertEqual(result.exit_code, 0, result.stderr)
        self.assertEqual(json.loads(result.stdout)["successes"], 3)

        result = self.invoke("report", "history", "--name", "classical-copy")
        rows = [json.loads(line) for line in result.stdout.splitlines()]
        self.assertEqual(len(rows), 1)
        self.assertEqual(rows[0]["trials"], 3)

    def test_unknown_attack(self):
        """Is an unknown attack name exit 2?"""

        result = self.invoke("attack", "run", "--name", "nonsense", "--trials", "1")
        self.assertEqual(result.exit_code, EXIT_CONFIG)

    def test_scenario_command(self):
        """Does the generic command run a commitment scenario?"""

        result = self.invoke("scenario", "--scenario", scenario("commit-plane"))
        self.assertEqual(result.exit_code, EXIT_ACCEPT, result.stderr)


class AcceptanceTestCase(TestCase):
    """Scenario pipelines and a quick criterion."""

    def test_bundled_scenarios_accept(self):
        """Does every bundled scenario end in acceptance?"""

        paths = bundled_scenarios()
        self.assertEqual(len(paths), 7)
        for path in paths:
            outcome = run_scenario(load_scenario(path))
            self.assertTrue(outcome.accepted, path)

    def test_quick_criterion(self):
        """Does the classical copy criterion pass in quick mode?"""

        (result,) = run_acceptance(quick=True, only={4})
        self.assertEqual(result.number, 4)
        self.assertTrue(result.passed, result.detail)
