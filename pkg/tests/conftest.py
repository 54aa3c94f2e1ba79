"""Shared digit-set fixtures used across the suite.

The five-element planar sets below are the standard mod-5 families: two
square-plus-far-corner variants (one mirrored through the x-axis) and the
staircase set; SIERPINSKI is the classic right-triangle mod-3 set.
"""
from fractions import Fraction

from moranspec.masks import DigitSet

SIERPINSKI = DigitSet.from_vectors([(0, 0), (1, 0), (0, 1)])

SQUARE_PLUS = DigitSet.from_vectors([(0, 0), (1, 0), (0, 1), (1, 1), (3, 3)])
SQUARE_PLUS_MIRROR = DigitSet.from_vectors([(0, 0), (1, 0), (0, -1), (1, -1), (3, -3)])
STAIRCASE = DigitSet.from_vectors([(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)])

# Three-element mod-3 sets with a single zero direction, used by the
# triangular-template decision tests.
TRIPLE_A = DigitSet.from_vectors([(0, 0), (1, 2), (1, 3)])
TRIPLE_B = DigitSet.from_vectors([(0, 0), (2, 3), (3, 5)])

LINE_3 = DigitSet.from_vectors([(0,), (1,), (2,)])


def frac(x) -> Fraction:
    return Fraction(x)
