"""Eventually-periodic Moran systems: finite preamble plus repeating cycle.

A system encodes the infinite data {(R_k, D_k)} by a preamble of levels
followed by a cycle repeated forever, together with the contraction bound
r, the admissibility box margins delta and beta, and the norm-equivalence
constant c (default 1, sound for the Euclidean operator norm).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import ValidationFailure
from .exact import IntMatrix, RationalMatrix, check_contraction, operator_norm_upper, rational_inverse
from .masks import DigitSet, ZeroStructure, find_zero_directions, is_prime


@dataclass(frozen=True)
class Level:
    matrix: IntMatrix
    digits: DigitSet
    zeros: ZeroStructure


@dataclass(frozen=True)
class MoranSystem:
    dimension: int
    prime: int
    preamble: tuple
    cycle: tuple
    r: float
    delta: Fraction
    beta: Fraction
    c: float = 1.0

    def level(self, k: int) -> Level:
        """Level data for 1-based index k, resolving through the cycle."""
        if k < 1:
            raise IndexError("levels are 1-based")
        if k <= len(self.preamble):
            return self.preamble[k - 1]
        return self.cycle[(k - len(self.preamble) - 1) % len(self.cycle)]

    def level_key(self, k: int):
        """Canonical identity of level k (preamble slot or cycle phase)."""
        if k <= len(self.preamble):
            return ("preamble", k - 1)
        return ("cycle", (k - len(self.preamble) - 1) % len(self.cycle))

    def distinct_levels(self) -> tuple:
        """(first_index, level) for each distinct slot, preamble then cycle."""
        out = []
        for i in range(len(self.preamble)):
            out.append((i + 1, self.preamble[i]))
        for i in range(len(self.cycle)):
            out.append((len(self.preamble) + i + 1, self.cycle[i]))
        return tuple(out)

    def levels_from(self, start: int) -> tuple:
        """(representative_index, level) for every slot that occurs at some k >= start.

        Preamble slots occur once; cycle slots recur forever, so each gets
        a representative index >= start by advancing whole cycles.
        """
        out = []
        for i in range(len(self.preamble)):
            if i + 1 >= start:
                out.append((i + 1, self.preamble[i]))
        for i in range(len(self.cycle)):
            k = len(self.preamble) + i + 1
            while k < start:
                k += len(self.cycle)
            out.append((k, self.cycle[i]))
        return tuple(out)

    @property
    def cycle_start(self) -> int:
        return len(self.preamble) + 1

    def digit_norm_bound(self) -> float:
        return max(lvl.digits.max_norm() for _, lvl in self.distinct_levels())

    def all_levels(self) -> tuple:
        return self.preamble + self.cycle


def _level_from_parts(dimension: int, prime: int, matrix: IntMatrix, digits: DigitSet, zeros, where: str) -> Level:
    if matrix.n != dimension:
        raise ValidationFailure("format", f"{where}: matrix is {matrix.n}x{matrix.n}, expected {dimension}", where)
    if digits.n != dimension:
        raise ValidationFailure("format", f"{where}: digits have dimension {digits.n}, expected {dimension}", where)
    if matrix.det() == 0:
        raise ValidationFailure("expansion", f"{where}: matrix is singular, it cannot be expanding", where)
    if digits.size != prime:
        raise ValidationFailure(
            "digit-count", f"{where}: digit set has {digits.size} elements, the model requires exactly {prime}", where
        )
    computed = find_zero_directions(digits, prime)
    if zeros is not None:
        supplied = tuple(tuple(int(c) % prime for c in nu) for nu in zeros)
        canon = set()
        for nu in supplied:
            canon.add(min(tuple((j * c) % prime for c in nu) for j in range(1, prime)))
        if canon != set(computed.directions):
            raise ValidationFailure(
                "zero-structure",
                f"{where}: supplied zero directions {sorted(canon)} disagree with computed {list(computed.directions)}",
                where,
            )
    if computed.count == 0:
        raise ValidationFailure(
            "zero-structure",
            f"{where}: digit set has no coset-line zero direction mod {prime}; "
            "the zero set is not a union of (j/m)*nu + Z^n lines",
            where,
        )
    return Level(matrix=matrix, digits=digits, zeros=computed)


def build_system(
    dimension: int,
    prime: int,
    preamble: Iterable,
    cycle: Iterable,
    r=None,
    delta=None,
    beta=None,
    c: float = 1.0,
    require_contraction: bool = True,
) -> MoranSystem:
    """Validated construction from (matrix, digits[, zeros]) level tuples.

    ``r`` may be omitted, in which case a certified bound on the largest
    inverse operator norm over the levels is derived. Growth families that
    have no uniform contraction bound are rejected here; pass
    ``require_contraction=False`` only for diagnostic scans.
    """
    if dimension < 1:
        raise ValidationFailure("format", "dimension must be at least 1")
    if not is_prime(prime):
        raise ValidationFailure("primality", f"digit cardinality {prime} must be a prime")
    delta = Fraction(delta) if delta is not None else Fraction(1, 8)
    beta = Fraction(beta) if beta is not None else Fraction(1, 8 * prime)
    if not (0 < delta < Fraction(1, 4)) or not (0 < beta < Fraction(1, 4)):
        raise ValidationFailure("params", "delta and beta must lie strictly inside (0, 1/4)")
    if c < 1:
        raise ValidationFailure("params", "norm-equivalence constant c must be at least 1")

    def make_levels(raw, tag):
        out = []
        for i, item in enumerate(raw):
            matrix, digits, zeros = item if len(item) == 3 else (*item, None)
            matrix = matrix if isinstance(matrix, IntMatrix) else IntMatrix.from_rows(matrix)
            digits = digits if isinstance(digits, DigitSet) else DigitSet.from_vectors(digits)
            out.append(_level_from_parts(dimension, prime, matrix, digits, zeros, f"{tag}[{i}]"))
        return tuple(out)

    preamble_levels = make_levels(preamble, "preamble")
    cycle_levels = make_levels(cycle, "cycle")
    if not cycle_levels:
        raise ValidationFailure("format", "cycle must contain at least one level")

    levels = preamble_levels + cycle_levels
    if r is None:
        bounds = [operator_norm_upper(rational_inverse(lvl.matrix)) for lvl in levels]
        r_val = max(bounds)
        r_exact = None
    else:
        r_exact = Fraction(r)
        r_val = float(r_exact)
    if require_contraction:
        if r_val >= 1:
            raise ValidationFailure(
                "contraction",
                f"derived inverse-norm bound {r_val:.6f} is not below 1; the system has no "
                "uniform contraction ratio and the infinite convolution is not certified to exist",
            )
        if r_exact is not None:
            if not (0 < r_exact < 1):
                raise ValidationFailure("contraction", f"r must lie in (0, 1), got {r_exact}")
            for i, lvl in enumerate(levels):
                if not check_contraction(lvl.matrix, r_exact):
                    raise ValidationFailure(
                        "contraction",
                        f"level {i + 1}: inverse operator norm exceeds the declared bound r = {r_exact}",
                    )
    return MoranSystem(
        dimension=dimension,
        prime=prime,
        preamble=preamble_levels,
        cycle=cycle_levels,
        r=r_val,
        delta=delta,
        beta=beta,
        c=float(c),
    )


@lru_cache(maxsize=None)
def _inverse_transpose_cached(matrix: IntMatrix) -> RationalMatrix:
    return rational_inverse(matrix).transpose()


def inverse_transpose(matrix: IntMatrix) -> RationalMatrix:
    """Cached (R^t)^-1 for the hot iteration paths."""
    return _inverse_transpose_cached(matrix)
