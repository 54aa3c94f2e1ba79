"""Hadamard triples / compatible pairs and their closure operations.

(R, D, L) is a Hadamard triple when H = (1/sqrt(#D)) [exp(2*pi*i*<R^-1 d, l>)]
is unitary. Column orthogonality says that for every pair of distinct
labels the sum over digits of exp(2*pi*i*<R^-1 d, l - l'>) vanishes, which
the exact mode decides through the cyclotomic test on the rational inner
products; the numeric mode builds H and measures |H H* - I|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import CongruenceViolation, DimensionMismatch, SizeMismatch
from .exact import IntMatrix, RationalMatrix, intvec, rational_inverse, vec_add, vec_dot, vec_sub


@dataclass(frozen=True)
class CompatiblePair:
    """Verified (R^-1 D, L) pair; ``status`` is "exact", "numeric" or "failed"."""

    matrix: IntMatrix
    digits: tuple
    labels: tuple
    status: str = "unverified"

    @property
    def size(self) -> int:
        return len(self.digits)


def _normalize_vectors(vectors) -> tuple:
    return tuple(intvec(v) for v in vectors)


def is_compatible_pair(matrix: IntMatrix, digits, labels, mode: str = "exact", tol: float = 1e-9):
    """Check unitarity of the pair matrix; returns (ok, witness).

    ``witness`` is the offending label pair on failure, else None. Exact
    mode routes every label difference through the cyclotomic vanishing
    test with the least common denominator of the inner products, so it
    also covers composite denominators outside the prime model class.
    """
    digits = _normalize_vectors(digits)
    labels = _normalize_vectors(labels)
    if len(digits) != len(labels):
        raise SizeMismatch(f"{len(digits)} digits vs {len(labels)} labels")
    n = matrix.n
    if any(len(v) != n for v in digits) or any(len(v) != n for v in labels):
        raise DimensionMismatch("vector dimension differs from matrix size")
    inv_t = rational_inverse(matrix).transpose()

    if mode == "exact":
        for a in range(len(labels)):
            for b in range(a + 1, len(labels)):
                diff = vec_sub(labels[a], labels[b])
                w = inv_t.mul_vec(diff)
                inner = [vec_dot(d, w) for d in digits]
                q = 1
                for x in inner:
                    q = q * x.denominator // math.gcd(q, x.denominator)
                exps = [int(x * q) % q for x in inner]
                if not _roots_sum_vanishes(exps, q):
                    return False, (labels[a], labels[b])
        return True, None

    if mode == "numeric":
        inv = np.array([[float(v) for v in row] for row in rational_inverse(matrix).rows])
        d_arr = np.array(digits, dtype=float)
        l_arr = np.array(labels, dtype=float)
        phases = (d_arr @ inv.T) @ l_arr.T
        h = np.exp(2j * np.pi * phases) / math.sqrt(len(digits))
        gram = h.conj().T @ h
        err = np.abs(gram - np.eye(len(labels)))
        if err.max() < tol:
            return True, None
        a, b = np.unravel_index(int(err.argmax()), err.shape)
        if a == b:
            return False, (labels[a], labels[a])
        return False, (labels[a], labels[b])

    raise ValueError(f"unknown mode {mode!r}")


def _roots_sum_vanishes(exps, q):
    from .exact import cyclotomic_vanishes

    return cyclotomic_vanishes(exps, q)


def verify_pair(matrix: IntMatrix, digits, labels, mode: str = "exact", tol: float = 1e-9) -> CompatiblePair:
    ok, _ = is_compatible_pair(matrix, digits, labels, mode=mode, tol=tol)
    return CompatiblePair(
        matrix=matrix,
        digits=_normalize_vectors(digits),
        labels=_normalize_vectors(labels),
        status=mode if ok else "failed",
    )


def translate_pair(pair: CompatiblePair, label_shift, digit_shift) -> CompatiblePair:
    """Shift labels by s and digits by d0; compatibility is preserved."""
    s = intvec(label_shift)
    d0 = intvec(digit_shift)
    return replace(
        pair,
        digits=tuple(vec_add(d, d0) for d in pair.digits),
        labels=tuple(vec_add(l, s) for l in pair.labels),
    )


def reduce_pair_mod(pair: CompatiblePair, new_digits, new_labels) -> CompatiblePair:
    """Replace digits mod R^t Z^n and labels mod R Z^n by congruent sets.

    Verifies the elementwise congruences exactly and raises
    CongruenceViolation otherwise. The reduced pair stays compatible.
    """
    new_digits = _normalize_vectors(new_digits)
    new_labels = _normalize_vectors(new_labels)
    if len(new_digits) != len(pair.digits) or len(new_labels) != len(pair.labels):
        raise SizeMismatch("replacement sets must match the original sizes")
    inv = rational_inverse(pair.matrix)
    inv_t = inv.transpose()
    for old, new in zip(pair.digits, new_digits):
        quot = inv_t.mul_vec(vec_sub(new, old))
        if any(x.denominator != 1 for x in quot):
            raise CongruenceViolation(f"digit {new} is not congruent to {old} mod R^t")
    for old, new in zip(pair.labels, new_labels):
        quot = inv.mul_vec(vec_sub(new, old))
        if any(x.denominator != 1 for x in quot):
            raise CongruenceViolation(f"label {new} is not congruent to {old} mod R")
    return replace(pair, digits=new_digits, labels=new_labels)


def tower_pair(pairs: Sequence[CompatiblePair]) -> CompatiblePair:
    """Product pair over consecutive levels.

    For levels 1..K the product matrix is R_K ... R_1, the digit tower is
    D_K + R_K D_{K-1} + ... + R_K...R_2 D_1 and the label tower is
    L_1 + R_1^t L_2 + ... + R_1^t...R_{K-1}^t L_K. The result of combining
    compatible levels is compatible, with cardinality the product of the
    level cardinalities.
    """
    if not pairs:
        raise SizeMismatch("tower needs at least one level")
    n = pairs[0].matrix.n
    if any(p.matrix.n != n for p in pairs):
        raise DimensionMismatch("levels have mixed dimensions")
    K = len(pairs)
    # coefficient of level j digits: product of the matrices above it
    digit_coef = [IntMatrix.identity(n)] * K
    for j in range(K - 2, -1, -1):
        digit_coef[j] = digit_coef[j + 1].mul(pairs[j + 1].matrix)
    label_coef = [IntMatrix.identity(n)] * K
    for j in range(1, K):
        label_coef[j] = label_coef[j - 1].mul(pairs[j - 1].matrix.transpose())

    digit_terms = [[coef.mul_vec(d) for d in p.digits] for coef, p in zip(digit_coef, pairs)]
    label_terms = [[coef.mul_vec(l) for l in p.labels] for coef, p in zip(label_coef, pairs)]

    def sums(terms):
        acc = [tuple([0] * n)]
        for level in terms:
            acc = [vec_add(base, t) for t in level for base in acc]
        return acc

    digits = sums(digit_terms)
    labels = sums(label_terms)
    if len(set(digits)) != len(digits) or len(set(labels)) != len(labels):
        raise CongruenceViolation("tower produced colliding elements")
    matrix = pairs[-1].matrix
    for p in reversed(pairs[:-1]):
        matrix = matrix.mul(p.matrix)
    return CompatiblePair(matrix=matrix, digits=tuple(digits), labels=tuple(labels), status="unverified")


def distinct_mod(vectors, matrix: IntMatrix) -> bool:
    """Whether all vectors fall in distinct cosets of Z^n / matrix Z^n."""
    inv = rational_inverse(matrix)
    seen = set()
    for v in vectors:
        y = inv.mul_vec(v)
        key = tuple(Fraction(c) - math.floor(c) for c in y)
        if key in seen:
            return False
        seen.add(key)
    return True
