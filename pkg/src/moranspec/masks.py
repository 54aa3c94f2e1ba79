"""Mask polynomials of integer digit sets and their coset-line zero structure.

The mask polynomial of a finite digit set D is the normalized exponential
sum (1/#D) sum_d exp(2*pi*i*<xi, d>). For the model class (#D = m prime)
its zeros are unions of coset lines (j/m)*nu + Z^n, and membership is
decided exactly through residues of inner products mod m.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence

from .errors import DimensionMismatch, ModelViolation
from .exact import IntVec, intvec, vec_dot


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class DigitSet:
    """Finite set of integer vectors, kept in construction order."""

    digits: tuple

    @staticmethod
    def from_vectors(vectors: Iterable) -> "DigitSet":
        digs = tuple(intvec(v) for v in vectors)
        if not digs:
            raise ModelViolation("digit set must be nonempty")
        n = len(digs[0])
        if any(len(d) != n for d in digs):
            raise DimensionMismatch("digits have mixed dimensions")
        if len(set(digs)) != len(digs):
            raise ModelViolation("digits must be pairwise distinct")
        return DigitSet(digs)

    @property
    def n(self) -> int:
        return len(self.digits[0])

    @property
    def size(self) -> int:
        return len(self.digits)

    def max_norm(self) -> float:
        best = max(sum(c * c for c in d) for d in self.digits)
        return math.sqrt(best) * (1 + 1e-12)

    def translate(self, shift) -> "DigitSet":
        shift = intvec(shift)
        return DigitSet.from_vectors(tuple(tuple(a + b for a, b in zip(d, shift)) for d in self.digits))


def _phase(xi, d):
    """<xi, d> reduced mod 1 exactly when xi is rational, else by fmod."""
    total = vec_dot(xi, d)
    if isinstance(total, Fraction) or isinstance(total, int):
        frac = Fraction(total)
        return float(frac - math.floor(frac))
    return math.fmod(total, 1.0)


def mask_eval(digits: DigitSet, xi: Sequence) -> complex:
    """Value of the mask polynomial at xi.

    Rational xi goes through exact mod-1 phase reduction, making the value
    exactly 1-periodic; float xi uses fmod. Always |result| <= 1 and the
    value at 0 is 1.
    """
    if len(xi) != digits.n:
        raise DimensionMismatch(f"point has dimension {len(xi)}, digits have {digits.n}")
    total = 0j
    for d in digits.digits:
        total += cmath.exp(2j * cmath.pi * _phase(xi, d))
    return total / digits.size


def residue_vanishing_test(digits: DigitSet, direction: Sequence, modulus: int) -> bool:
    """Whether <d, direction> mod m hits every residue class exactly once.

    For #D = m prime this is equivalent to the mask vanishing at every
    point (j/m)*direction, j = 1..m-1: a vanishing sum of m prime-order
    roots of unity forces equal multiplicity on all residues.
    """
    if digits.size != modulus:
        raise ModelViolation(f"digit count {digits.size} differs from modulus {modulus}")
    if not is_prime(modulus):
        raise ModelViolation(f"modulus {modulus} is not prime")
    direction = intvec(direction)
    if all(c % modulus == 0 for c in direction):
        raise ModelViolation("direction must be nonzero mod m")
    seen = set()
    for d in digits.digits:
        seen.add(vec_dot(d, direction) % modulus)
    return len(seen) == modulus


@dataclass(frozen=True)
class ZeroStructure:
    """Canonical zero directions of a model digit set.

    Each direction stands for the whole scalar class {j*nu mod m}; the
    canonical representative is the lexicographically smallest class
    member with entries in [0, m-1]. ``model_compliant`` records whether
    all entries are nonzero (the strict form with entries in [1, m-1]).
    """

    modulus: int
    directions: tuple
    model_compliant: tuple

    @property
    def count(self) -> int:
        return len(self.directions)

    def direction_for_residue(self, residue: Sequence):
        """Index of the direction class containing ``residue`` (mod m), else None."""
        key = tuple(int(c) % self.modulus for c in residue)
        return _residue_orbit(self).get(key)


@lru_cache(maxsize=None)
def _residue_orbit(structure: ZeroStructure) -> dict:
    table = {}
    m = structure.modulus
    for idx, nu in enumerate(structure.directions):
        for j in range(1, m):
            table[tuple((j * c) % m for c in nu)] = idx
    return table


def canonical_direction(direction: Sequence, modulus: int) -> IntVec:
    cands = []
    for j in range(1, modulus):
        cands.append(tuple((j * c) % modulus for c in direction))
    return min(cands)


def find_zero_directions(digits: DigitSet, modulus: int) -> ZeroStructure:
    """All zero-direction classes of the digit set, canonical and sorted."""
    if digits.size != modulus:
        raise ModelViolation(f"digit count {digits.size} differs from modulus {modulus}")
    if not is_prime(modulus):
        raise ModelViolation(f"modulus {modulus} is not prime")
    found = []
    for nu in product(range(modulus), repeat=digits.n):
        if all(c == 0 for c in nu):
            continue
        if nu != canonical_direction(nu, modulus):
            continue
        if residue_vanishing_test(digits, nu, modulus):
            found.append(nu)
    found.sort()
    compliant = tuple(all(1 <= c <= modulus - 1 for c in nu) for nu in found)
    return ZeroStructure(modulus=modulus, directions=tuple(found), model_compliant=compliant)


@dataclass(frozen=True)
class ZeroScanReport:
    grid: int
    tol: float
    min_modulus: float
    min_point: tuple
    suspected: tuple

    @property
    def passed(self) -> bool:
        return not self.suspected


def _torus_dist_sq(p, q):
    total = 0.0
    for a, b in zip(p, q):
        d = abs(a - b) % 1.0
        d = min(d, 1.0 - d)
        total += d * d
    return total


def verify_zero_exactness(digits: DigitSet, structure: ZeroStructure, grid: int = 64, tol: float = 1e-3) -> ZeroScanReport:
    """Sampling falsifier for completeness of a claimed zero structure.

    Scans |mask| on a grid^n lattice over [0,1)^n, skipping points within
    ``tol`` (torus metric) of the claimed coset lines, and reports any
    leftover point where the modulus drops below ``tol`` as a suspected
    missing zero. Heuristic by design; it cannot prove completeness.
    """
    if grid < 8:
        raise ValueError("grid must be at least 8")
    m = structure.modulus
    claimed = []
    for nu in structure.directions:
        for j in range(1, m):
            claimed.append(tuple(((j * c) % m) / m for c in nu))
    min_mod = math.inf
    min_point = None
    suspected = []
    for idx in product(range(grid), repeat=digits.n):
        point = tuple(i / grid for i in idx)
        if any(_torus_dist_sq(point, q) < tol * tol for q in claimed):
            continue
        val = abs(mask_eval(digits, point))
        if val < min_mod:
            min_mod = val
            min_point = point
        if val < tol:
            suspected.append(point)
    return ZeroScanReport(grid=grid, tol=tol, min_modulus=min_mod, min_point=min_point, suspected=tuple(suspected))
