"""Spacetime diagram tests."""

# run these tests like:
#
#    python -m unittest test_diagrams.py


import os
import re
import tempfile
from unittest import TestCase

from diagrams import QUANTUM_COLOUR, emit_spacetime_svg, write_svg
from pv import PvInstance, run_singleton_pv
from spacetime import DimensionError, SpacetimePoint

SIGNAL_LINE = re.compile(
    r'<line x1="([-\d.]+)" y1="([-\d.]+)" x2="([-\d.]+)" y2="([-\d.]+)" stroke='
)


class DiagramTestCase(TestCase):
    """SVG rendering of event logs."""

    @classmethod
    def setUpClass(cls):
        inst = PvInstance(((0,), (6,)), SpacetimePoint((3,), 3))
        cls.result = run_singleton_pv(inst, seed=1)

    def test_lines(self):
        """Is there one world-line per party and one line per delivery?"""

        positions = self.result.sim.positions()
        svg = emit_spacetime_svg(self.result.log, positions)
        deliveries = sum(1 for e in self.result.log if e.kind == "deliver")
        self.assertTrue(svg.startswith("<svg"))
        self.assertEqual(svg.count("<line"), len(positions) + deliveries)
        self.assertIn(QUANTUM_COLOUR, svg)

    def test_signal_slope(self):
        """Are signals drawn at 45 degrees?"""

        svg = emit_spacetime_svg(self.result.log, self.result.sim.positions())
        lines = SIGNAL_LINE.findall(svg)
        self.assertTrue(lines)
        for x1, y1, x2, y2 in lines:
            dx, dy = abs(float(x2) - float(x1)), abs(float(y2) - float(y1))
            self.assertGreater(dx, 0)
            self.assertAlmostEqual(dx, dy, delta=0.01)

    def test_escaping(self):
        """Are titles and labels escaped?"""

        svg = emit_spacetime_svg(self.result.log, self.result.sim.positions(), title="a<b")
        self.assertIn("<title>a&lt;b</title>", svg)
        self.assertIn("P -&gt; V1", svg)

    def test_empty_log(self):
        """Does an empty log give a bare document?"""

        svg = emit_spacetime_svg([], {"V1": (0,)})
        self.assertNotIn("<line", svg)
        self.assertTrue(svg.rstrip().endswith("</svg>"))

    def test_bad_axis(self):
        """Is a missing axis refused?"""

        with self.assertRaises(DimensionError):
            emit_spacetime_svg(self.result.log, self.result.sim.positions(), axis=1)

    def test_write(self):
        """Does write_svg put the document on disk?"""

        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "run.svg")
            write_svg(path, self.result.log, self.result.sim.positions())
            with open(path) as fh:
                self.assertIn("</svg>", fh.read())
