"""Spacetime geometry tests."""

# run these tests like:
#
#    python -m unittest test_spacetime.py


from fractions import Fraction
from math import isqrt
from unittest import TestCase

from spacetime import (SCALE, DimensionError, GeometryError, SpacetimePoint,
                       barycentric, distance, enclosing_simplex, format_fixed,
                       from_fixed, in_convex_hull, parse_fixed, rational,
                       rational_sqrt, solve_linear, to_fixed)


class RationalTestCase(TestCase):
    """Coercion of scenario values to exact rationals."""

    def test_strings(self):
        """Are "p/q" and decimal strings exact?"""

        self.assertEqual(rational("1/3"), Fraction(1, 3))
        self.assertEqual(rational(" 2.5 "), Fraction(5, 2))

    def test_float_uses_repr(self):
        """Does 0.1 become exactly one tenth?"""

        self.assertEqual(rational(0.1), Fraction(1, 10))

    def test_bool_rejected(self):
        """Are booleans refused as coordinates?"""

        with self.assertRaises(TypeError):
            rational(True)


class FixedTimeTestCase(TestCase):
    """Fixed-point clock."""

    def test_integer_times(self):
        """Do integer times map to multiples of the scale?"""

        self.assertEqual(to_fixed(3), 3 * SCALE)
        self.assertEqual(from_fixed(3 * SCALE), 3)

    def test_format(self):
        """Does formatting print the exact decimal expansion?"""

        self.assertEqual(format_fixed(to_fixed(7)), "7")
        self.assertEqual(format_fixed(to_fixed(Fraction(1, 2))), "0.5")
        self.assertEqual(format_fixed(-to_fixed(Fraction(5, 4))), "-1.25")

    def test_parse_inverts_format(self):
        """Does parsing a formatted time give back the same integer?"""

        value = to_fixed(Fraction(1, 3))
        self.assertEqual(parse_fixed(format_fixed(value)), value)


class DistanceTestCase(TestCase):
    """Travel times."""

    def test_exact_distance(self):
        """Is a 3-4-5 distance exact?"""

        travel = distance((0, 0), (3, 4))
        self.assertEqual(travel.value, to_fixed(5))
        self.assertTrue(travel.exact)

    def test_irrational_distance(self):
        """Is sqrt(2) rounded to the nearest fixed unit?"""

        travel = distance((0, 0), (1, 1))
        self.assertFalse(travel.exact)
        v = travel.value
        self.assertLess((v - 1) ** 2, 2 * SCALE ** 2)
        self.assertLess(2 * SCALE ** 2, (v + 1) ** 2)

    def test_symmetric(self):
        """Is the distance the same in both directions?"""

        a, b = (Fraction(1, 3), 2), (5, Fraction(-7, 2))
        self.assertEqual(distance(a, b), distance(b, a))

    def test_dimension_mismatch(self):
        """Does mixing dimensions raise?"""

        with self.assertRaises(DimensionError):
            distance((0,), (0, 0))

    def test_rational_sqrt(self):
        """Are perfect squares recognised?"""

        self.assertEqual(rational_sqrt(Fraction(9, 4)), (Fraction(3, 2), True))
        self.assertFalse(rational_sqrt(2)[1])

    def test_rational_sqrt_rounds_like_distance(self):
        """Does an irrational root round to the nearest fixed unit, as distance does?"""

        for q, point in ((2, (1, 1)), (3, (1, 1, 1)), (5, (1, 2)), (Fraction(13, 4), (1, Fraction(3, 2)))):
            root, exact = rational_sqrt(q)
            self.assertFalse(exact)
            self.assertEqual(root, from_fixed(distance((0,) * len(point), point).value))
            q = Fraction(q)
            reference = Fraction(isqrt((q.numerator << 400) // q.denominator), 1 << 200)
            self.assertLessEqual(abs(root - reference), Fraction(1, 2 * SCALE) + Fraction(1, 1 << 199))


class HullTestCase(TestCase):
    """Convex hulls and enclosing simplices."""

    def test_point_dimension(self):
        """Are four-dimensional points rejected?"""

        with self.assertRaises(DimensionError):
            SpacetimePoint((1, 2, 3, 4), 0)

    def test_solve_linear_dependent(self):
        """Are dependent columns reported as None?"""

        self.assertIsNone(solve_linear([[1, 2], [2, 4]], [1, 2]))
        self.assertEqual(solve_linear([[1, 0], [0, 1]], [3, 4]), [3, 4])

    def test_barycentric(self):
        """Is 1 three quarters of the way towards 0 on [0, 4]?"""

        self.assertEqual(barycentric((1,), [(0,), (4,)]), [Fraction(3, 4), Fraction(1, 4)])

    def test_in_convex_hull(self):
        """Are boundary points inside and far points outside?"""

        triangle = [(0, 0), (2, 0), (0, 2)]
        self.assertTrue(in_convex_hull((1, 1), triangle))
        self.assertTrue(in_convex_hull((0, 0), triangle))
        self.assertFalse(in_convex_hull((2, 2), triangle))

    def test_enclosing_simplex_line(self):
        """Does the 1-d simplex grow the interval by the margin?"""

        self.assertEqual(enclosing_simplex([(2,), (4,)], 1), [(1,), (5,)])

    def test_enclosing_simplex_plane(self):
        """Does the 2-d simplex contain every point of S with slack?"""

        S = [(0, 0), (1, 3), (4, 1)]
        vertices = enclosing_simplex(S, 1)
        self.assertEqual(len(vertices), 3)
        for p in S:
            self.assertTrue(in_convex_hull(p, vertices))

    def test_enclosing_simplex_errors(self):
        """Are empty sets and non-positive margins rejected?"""

        with self.assertRaises(GeometryError):
            enclosing_simplex([], 1)
        with self.assertRaises(GeometryError):
            enclosing_simplex([(0,)], 0)
