"""Scenario validation tests."""

# run these tests like:
#
#    python -m unittest test_forms.py


import json
import os
import tempfile
from fractions import Fraction
from unittest import TestCase

from forms import ConfigError, load_scenario, parse_scenario
from spacetime import SpacetimePoint

SCENARIO_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "scenarios")

PV_DOC = {
    "name": "pv",
    "kind": "pv",
    "seed": 1,
    "verifiers": [["0"], ["6"]],
    "target": {"L": ["3"], "t": "3"},
    "params": {"n": 8, "r": 2},
}

COMMIT_DOC = {
    "name": "commit",
    "kind": "commit",
    "seed": 2,
    "verifiers": [["0"], ["6"]],
    "S": [{"L": ["2"], "t": "3"}, {"L": ["3"], "t": "3"}],
    "alpha": 1,
}


class ScenarioFormTestCase(TestCase):
    """Accepted and refused documents."""

    def problems(self, document):
        with self.assertRaises(ConfigError) as caught:
            parse_scenario(document)
        return [pointer for pointer, _ in caught.exception.problems]

    def test_pv_document(self):
        """Does a position verification scenario validate into exact values?"""

        cfg = parse_scenario(PV_DOC)
        self.assertEqual(cfg.kind, "pv")
        self.assertEqual(cfg.target, SpacetimePoint((3,), 3))
        self.assertEqual(cfg.verifiers, ((Fraction(0),), (Fraction(6),)))
        inst = cfg.pv_instance()
        self.assertEqual(inst.r, 2)

    def test_placed_verifiers(self):
        """Are verifiers placed around the target when the scenario has none?"""

        cfg = load_scenario(os.path.join(SCENARIO_DIR, "pv-placed.json"))
        self.assertEqual(list(cfg.placed_verifiers()), [(0,), (6,)])

    def test_commit_document(self):
        """Does a commitment scenario build its committable set?"""

        cfg = parse_scenario(COMMIT_DOC)
        self.assertEqual(len(cfg.committable_set()), 2)
        self.assertEqual(cfg.commit_params().kappa, 64)

    def test_round_trip(self):
        """Does a config validate again from its own dictionary?"""

        cfg = parse_scenario(COMMIT_DOC)
        self.assertEqual(parse_scenario(cfg.to_dict()), cfg)
        self.assertEqual(json.loads(cfg.to_json())["alpha"], 1)

    def test_missing_fields(self):
        """Are name, kind and seed required?"""

        pointers = self.problems({"verifiers": [["0"], ["6"]]})
        for pointer in ("/name", "/kind", "/seed"):
            self.assertIn(pointer, pointers)

    def test_bad_kind(self):
        """Is an unknown kind refused?"""

        self.assertIn("/kind", self.problems({**PV_DOC, "kind": "teleport"}))

    def test_bad_rational(self):
        """Is an unparseable margin reported at its pointer?"""

        self.assertIn("/margin", self.problems({**PV_DOC, "margin": "abc"}))

    def test_negative_margin(self):
        """Is a non-positive margin refused?"""

        self.assertIn("/margin", self.problems({**PV_DOC, "margin": "-1"}))

    def test_pv_without_target(self):
        """Does position verification need a target?"""

        document = {k: v for k, v in PV_DOC.items() if k != "target"}
        self.assertIn("/target/L", self.problems(document))

    def test_region_outside_S(self):
        """Must R be a subset of S?"""

        document = {**COMMIT_DOC, "kind": "zkpv", "R": [{"L": ["5"], "t": "3"}]}
        self.assertIn("/R", self.problems(document))

    def test_alpha_out_of_range(self):
        """Must alpha index S?"""

        self.assertIn("/alpha", self.problems({**COMMIT_DOC, "alpha": 2}))

    def test_opt_needs_ticks(self):
        """Does the optimized scheme need delta and ticks?"""

        document = {"name": "o", "kind": "opt", "seed": 0, "verifiers": [["0"], ["6"]]}
        pointers = self.problems(document)
        self.assertIn("/params/delta", pointers)
        self.assertIn("/params/ticks", pointers)

    def test_not_an_object(self):
        """Is a JSON list refused?"""

        self.assertEqual(self.problems([1, 2]), ["/"])

    def test_invalid_json(self):
        """Is a file that is not JSON reported as a config error?"""

        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "bad.json")
            with open(path, "w") as fh:
                fh.write("{not json")
            with self.assertRaises(ConfigError):
                load_scenario(path)

    def test_bundled_scenarios(self):
        """Does every bundled scenario validate?"""

        for name in sorted(os.listdir(SCENARIO_DIR)):
            if name.endswith(".json") and not name.endswith(".schema.json"):
                load_scenario(os.path.join(SCENARIO_DIR, name))
