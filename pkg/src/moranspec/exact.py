"""Exact rational and integer linear algebra plus vanishing root-of-unity sums.

Matrices are immutable tuples of tuples; rational entries are
``fractions.Fraction`` so every inverse, product and comparison is exact.
All functions here are pure and safe for unrestricted parallel use.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

from .errors import DimensionMismatch, SingularMatrix

IntVec = tuple
RatVec = tuple


def intvec(values: Iterable) -> IntVec:
    return tuple(int(v) for v in values)


def ratvec(values: Iterable) -> RatVec:
    return tuple(Fraction(v) for v in values)


def vec_add(u: Sequence, v: Sequence) -> tuple:
    return tuple(a + b for a, b in zip(u, v, strict=True))


def vec_sub(u: Sequence, v: Sequence) -> tuple:
    return tuple(a - b for a, b in zip(u, v, strict=True))


def vec_neg(u: Sequence) -> tuple:
    return tuple(-a for a in u)


def vec_dot(u: Sequence, v: Sequence):
    return sum(a * b for a, b in zip(u, v, strict=True))


def _as_rows(rows) -> tuple:
    out = tuple(tuple(row) for row in rows)
    n = len(out)
    if n == 0 or any(len(row) != n for row in out):
        raise DimensionMismatch("matrix must be square and nonempty")
    return out


@dataclass(frozen=True)
class IntMatrix:
    """Square integer matrix with arbitrary-precision entries."""

    rows: tuple

    @staticmethod
    def from_rows(rows) -> "IntMatrix":
        return IntMatrix(tuple(tuple(int(v) for v in row) for row in _as_rows(rows)))

    @staticmethod
    def identity(n: int) -> "IntMatrix":
        return IntMatrix(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @staticmethod
    def diagonal(entries) -> "IntMatrix":
        entries = [int(e) for e in entries]
        n = len(entries)
        return IntMatrix(tuple(tuple(entries[i] if i == j else 0 for j in range(n)) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(tuple(zip(*self.rows)))

    def mul(self, other: "IntMatrix") -> "IntMatrix":
        if self.n != other.n:
            raise DimensionMismatch("matrix sizes differ")
        cols = other.transpose().rows
        return IntMatrix(tuple(tuple(vec_dot(r, c) for c in cols) for r in self.rows))

    def __matmul__(self, other):
        return self.mul(other)

    def mul_vec(self, v: Sequence) -> tuple:
        if len(v) != self.n:
            raise DimensionMismatch("vector length differs from matrix size")
        return tuple(vec_dot(r, v) for r in self.rows)

    def det(self) -> int:
        d = _det_fraction([[Fraction(v) for v in row] for row in self.rows])
        assert d.denominator == 1
        return int(d)

    def is_diagonal(self) -> bool:
        return all(self.rows[i][j] == 0 for i in range(self.n) for j in range(self.n) if i != j)

    def to_rational(self) -> "RationalMatrix":
        return RationalMatrix(tuple(tuple(Fraction(v) for v in row) for row in self.rows))


@dataclass(frozen=True)
class RationalMatrix:
    """Square matrix of Fractions."""

    rows: tuple

    @staticmethod
    def from_rows(rows) -> "RationalMatrix":
        return RationalMatrix(tuple(tuple(Fraction(v) for v in row) for row in _as_rows(rows)))

    @staticmethod
    def identity(n: int) -> "RationalMatrix":
        return RationalMatrix(tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(tuple(zip(*self.rows)))

    def mul(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.n != other.n:
            raise DimensionMismatch("matrix sizes differ")
        cols = other.transpose().rows
        return RationalMatrix(tuple(tuple(vec_dot(r, c) for c in cols) for r in self.rows))

    def __matmul__(self, other):
        return self.mul(other)

    def mul_vec(self, v: Sequence) -> tuple:
        if len(v) != self.n:
            raise DimensionMismatch("vector length differs from matrix size")
        return tuple(vec_dot(r, v) for r in self.rows)

    def trace(self) -> Fraction:
        return sum((self.rows[i][i] for i in range(self.n)), Fraction(0))

    def inverse(self) -> "RationalMatrix":
        return _gauss_jordan_inverse(self.rows)

    def is_integer(self) -> bool:
        return all(v.denominator == 1 for row in self.rows for v in row)

    def denominator_lcm(self) -> int:
        out = 1
        for row in self.rows:
            for v in row:
                out = out * v.denominator // math.gcd(out, v.denominator)
        return out


def _det_fraction(rows) -> Fraction:
    # Gaussian elimination with exact pivots; rows is a mutable list copy.
    n = len(rows)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            det = -det
        det *= rows[col][col]
        inv = 1 / rows[col][col]
        for r in range(col + 1, n):
            factor = rows[r][col] * inv
            if factor:
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[col])]
    return det


def _gauss_jordan_inverse(rows) -> RationalMatrix:
    n = len(rows)
    a = [[Fraction(v) for v in row] for row in rows]
    b = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise SingularMatrix("matrix is singular")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            b[col], b[pivot] = b[pivot], b[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        b[col] = [v * inv for v in b[col]]
        for r in range(n):
            if r != col and a[r][col]:
                factor = a[r][col]
                a[r] = [v - factor * w for v, w in zip(a[r], a[col])]
                b[r] = [v - factor * w for v, w in zip(b[r], b[col])]
    return RationalMatrix(tuple(tuple(row) for row in b))


def rational_inverse(m: IntMatrix) -> RationalMatrix:
    """Exact inverse of an integer matrix; raises SingularMatrix on det 0."""
    return _gauss_jordan_inverse(m.rows)


def _log2_fraction(x: Fraction) -> float:
    # math.log2 accepts arbitrary-size ints, so this never overflows.
    return math.log2(x.numerator) - math.log2(x.denominator)


def _sqrt_fraction_exact(x: Fraction):
    """Float of sqrt(x) if x is a perfect rational square, else None."""
    sn = math.isqrt(x.numerator)
    sd = math.isqrt(x.denominator)
    if sn * sn == x.numerator and sd * sd == x.denominator:
        return Fraction(sn, sd)
    return None


def operator_norm_upper(m: RationalMatrix, squarings: int = 6) -> float:
    """Certified upper bound on the Euclidean operator norm of ``m``.

    Uses trace(G^k)^(1/2k) for the Gram matrix G = m^T m, which bounds the
    top singular value from above for every k because G is positive
    semidefinite, and is never larger than the Frobenius norm (the k=1
    case). Repeated exact squaring drives the overshoot factor down to
    n^(1/2k). The returned float is inflated by a tiny safety factor so
    rounding can never drop it below the true norm.
    """
    g = m.transpose().mul(m)
    frob_sq = g.trace()
    if frob_sq == 0:
        return 0.0
    exact = _sqrt_fraction_exact(frob_sq)
    frob = float(exact) if exact is not None else 2.0 ** (_log2_fraction(frob_sq) / 2.0) * (1 + 1e-12)
    for _ in range(squarings):
        g = g.mul(g)
    k = 2 ** squarings
    bound = 2.0 ** (_log2_fraction(g.trace()) / (2.0 * k)) * (1 + 1e-9)
    return min(bound, frob)


def _principal_minors_nonneg(rows) -> bool:
    n = len(rows)
    for size in range(1, n + 1):
        for subset in combinations(range(n), size):
            sub = [[rows[i][j] for j in subset] for i in subset]
            if _det_fraction(sub) < 0:
                return False
    return True


def _leading_minors_positive(rows) -> bool:
    n = len(rows)
    for size in range(1, n + 1):
        sub = [[rows[i][j] for j in range(size)] for i in range(size)]
        if _det_fraction(sub) <= 0:
            return False
    return True


def norm_bound_holds(m: RationalMatrix, bound, strict: bool = False) -> bool:
    """Exact test of ``operator norm of m <= bound`` (or ``<`` when strict).

    Equivalent to positive (semi)definiteness of bound^2 I - m^T m, decided
    by principal minors in exact rational arithmetic. Unlike the float
    bound above, this is sharp at equality.
    """
    b = Fraction(bound)
    if b < 0:
        return False
    g = m.transpose().mul(m)
    n = g.n
    s = [[(b * b if i == j else Fraction(0)) - g.rows[i][j] for j in range(n)] for i in range(n)]
    if strict:
        return _leading_minors_positive(s)
    return _principal_minors_nonneg(s)


def check_contraction(m: IntMatrix, r, strict: bool = False) -> bool:
    """True iff the inverse of ``m`` has Euclidean operator norm <= r.

    Decided exactly, so boundary cases such as diag[m,...,m] with r = 1/m
    come out true. Raises SingularMatrix when det(m) = 0.
    """
    inv = rational_inverse(m)
    return norm_bound_holds(inv, Fraction(r), strict=strict)


def _poly_divmod_int(num, den):
    # Exact division of integer polynomials; den must be monic.
    num = list(num)
    out = [0] * max(0, len(num) - len(den) + 1)
    while len(num) >= len(den) and any(num):
        shift = len(num) - len(den)
        coeff = num[-1]
        out[shift] = coeff
        for i, d in enumerate(den):
            num[shift + i] -= coeff * d
        while num and num[-1] == 0:
            num.pop()
    while num and num[-1] == 0:
        num.pop()
    return out, num


@lru_cache(maxsize=None)
def cyclotomic_polynomial(q: int) -> tuple:
    """Coefficients (ascending) of the q-th cyclotomic polynomial.

    Built from x^q - 1 = prod over divisors d of q of Phi_d(x), by exact
    integer polynomial division.
    """
    if q < 1:
        raise ValueError("q must be positive")
    num = [-1] + [0] * (q - 1) + [1]
    for d in range(1, q):
        if q % d == 0:
            num, rem = _poly_divmod_int(num, list(cyclotomic_polynomial(d)))
            assert not rem
    return tuple(num)


def cyclotomic_vanishes(exponents: Iterable[int], q: int) -> bool:
    """Whether sum of exp(2*pi*i*p/q) over the multiset vanishes exactly.

    The sum is zero iff the q-th cyclotomic polynomial divides
    sum_p x^(p mod q), tested by exact polynomial remainder. For prime q
    this reduces to all residue classes appearing with equal multiplicity.
    """
    if q < 1:
        raise ValueError("q must be positive")
    counts = [0] * q
    for p in exponents:
        counts[p % q] += 1
    if not any(counts):
        return True
    _, rem = _poly_divmod_int(counts, list(cyclotomic_polynomial(q)))
    return not rem
