import random

import numpy as np
import pytest

from conftest import SIERPINSKI
from moranspec.errors import CongruenceViolation, SizeMismatch
from moranspec.exact import IntMatrix, rational_inverse, vec_dot
from moranspec.pairs import (
    CompatiblePair,
    distinct_mod,
    is_compatible_pair,
    reduce_pair_mod,
    tower_pair,
    translate_pair,
    verify_pair,
)

R3 = IntMatrix.diagonal([3, 3])
SIERP_LABELS = ((0, 0), (1, 2), (2, 1))


def gram_defect(matrix, digits, labels):
    """Numeric oracle: max entry of |H H* - I|."""
    inv = np.linalg.inv(np.array(matrix.rows, dtype=float))
    phases = (np.array(digits, float) @ inv.T) @ np.array(labels, float).T
    h = np.exp(2j * np.pi * phases) / np.sqrt(len(digits))
    return np.abs(h.conj().T @ h - np.eye(len(labels))).max()


def test_sierpinski_pair_exact_and_numeric():
    ok, witness = is_compatible_pair(R3, SIERPINSKI.digits, SIERP_LABELS, mode="exact")
    assert ok and witness is None
    ok, _ = is_compatible_pair(R3, SIERPINSKI.digits, SIERP_LABELS, mode="numeric", tol=1e-12)
    assert ok
    assert gram_defect(R3, SIERPINSKI.digits, SIERP_LABELS) < 1e-12


def test_singleton_pair_trivially_compatible():
    ok, _ = is_compatible_pair(IntMatrix.diagonal([5, 5]), [(0, 0)], [(0, 0)], mode="exact")
    assert ok


def test_diagonal_labels_fail_with_witness():
    bad = ((0, 0), (1, 1), (2, 2))
    ok, witness = is_compatible_pair(R3, SIERPINSKI.digits, bad, mode="exact")
    assert not ok
    assert set(witness) == {(1, 1), (0, 0)}
    ok, witness = is_compatible_pair(R3, SIERPINSKI.digits, bad, mode="numeric")
    assert not ok and witness is not None


def test_quarter_cantor_pair_composite_denominator():
    ok, _ = is_compatible_pair(IntMatrix.from_rows([[4]]), [(0,), (2,)], [(0,), (1,)], mode="exact")
    assert ok


def test_size_mismatch():
    with pytest.raises(SizeMismatch):
        is_compatible_pair(R3, SIERPINSKI.digits, [(0, 0), (1, 2)])


def test_translate_pair():
    pair = verify_pair(R3, SIERPINSKI.digits, SIERP_LABELS)
    assert pair.status == "exact"
    same = translate_pair(pair, (0, 0), (0, 0))
    assert same.digits == pair.digits and same.labels == pair.labels
    moved = translate_pair(pair, (2, -1), (1, 1))
    ok, _ = is_compatible_pair(moved.matrix, moved.digits, moved.labels, mode="exact")
    assert ok
    assert moved.digits[0] == (1, 1)


def test_reduce_pair_mod():
    pair = verify_pair(R3, SIERPINSKI.digits, SIERP_LABELS)
    same = reduce_pair_mod(pair, pair.digits, pair.labels)
    assert same.labels == pair.labels
    # representatives of the labels inside 3(-1/2,1/2]^2
    reduced = reduce_pair_mod(pair, pair.digits, ((0, 0), (1, -1), (-1, 1)))
    ok, _ = is_compatible_pair(reduced.matrix, reduced.digits, reduced.labels, mode="exact")
    assert ok
    with pytest.raises(CongruenceViolation):
        reduce_pair_mod(pair, pair.digits, ((0, 0), (1, 1), (2, 1)))


def test_tower_pair_single_level_identity():
    pair = verify_pair(R3, SIERPINSKI.digits, SIERP_LABELS)
    tower = tower_pair([pair])
    assert set(tower.digits) == set(pair.digits)
    assert set(tower.labels) == set(pair.labels)
    assert tower.matrix == pair.matrix


def test_tower_pair_two_sierpinski_levels():
    pair = verify_pair(R3, SIERPINSKI.digits, SIERP_LABELS)
    tower = tower_pair([pair, pair])
    assert tower.size == 9
    assert len(tower.labels) == 9
    assert tower.matrix == IntMatrix.diagonal([9, 9])
    assert gram_defect(tower.matrix, tower.digits, tower.labels) < 1e-10
    ok, _ = is_compatible_pair(tower.matrix, tower.digits, tower.labels, mode="exact")
    assert ok


def test_verified_pairs_have_distinct_cosets():
    pair = verify_pair(R3, SIERPINSKI.digits, SIERP_LABELS)
    assert distinct_mod(pair.digits, pair.matrix.transpose())
    assert distinct_mod(pair.labels, pair.matrix)


def _random_unimodular(rng, n):
    m = IntMatrix.identity(n)
    for _ in range(2):
        if n == 1:
            continue
        a = rng.randint(-2, 2)
        upper = IntMatrix.from_rows([[1, a], [0, 1]])
        lower = IntMatrix.from_rows([[1, 0], [rng.randint(-2, 2), 1]])
        m = m.mul(upper if rng.random() < 0.5 else lower)
    return m


def _random_compatible(rng, n, m):
    """Model-class pair: R = mI, digits hit all residues along a direction."""
    while True:
        nu = tuple(rng.randint(0, m - 1) for _ in range(n))
        if any(c % m for c in nu):
            break
    # w with <w, nu> = 1 mod m
    while True:
        w = tuple(rng.randint(-3, 3) for _ in range(n))
        if vec_dot(w, nu) % m == 1:
            break
    digits = []
    for j in range(m):
        shift = tuple(m * rng.randint(-1, 1) for _ in range(n))
        digits.append(tuple(j * a + s for a, s in zip(w, shift)))
    labels = []
    for j in range(m):
        shift = tuple(m * rng.randint(-1, 1) for _ in range(n))
        labels.append(tuple(j * a + s for a, s in zip(nu, shift)))
    if len(set(digits)) < m or len(set(labels)) < m:
        return None
    return IntMatrix.diagonal([m] * n), tuple(digits), tuple(labels)


def _random_junk(rng, n, m):
    while True:
        mat = IntMatrix.from_rows([[rng.randint(-6, 6) for _ in range(n)] for _ in range(n)])
        if mat.det() != 0:
            break
    seen = set()
    while len(seen) < 2 * m:
        seen.add(tuple(rng.randint(-6, 6) for _ in range(n)))
    seen = sorted(seen)
    return mat, tuple(seen[:m]), tuple(seen[m : 2 * m])


def test_exact_and_numeric_agree_on_random_pairs():
    rng = random.Random(9157)
    true_count = 0
    for trial in range(200):
        n = rng.choice([1, 2])
        m = rng.choice([2, 3, 5])
        made = _random_compatible(rng, n, m) if trial % 2 == 0 else None
        if made is None:
            made = _random_junk(rng, n, m)
        mat, digits, labels = made
        exact_ok, _ = is_compatible_pair(mat, digits, labels, mode="exact")
        numeric_ok, _ = is_compatible_pair(mat, digits, labels, mode="numeric", tol=1e-9)
        assert exact_ok == numeric_ok, (mat.rows, digits, labels)
        true_count += exact_ok
    assert true_count >= 40  # both branches exercised


def test_closure_operations_reverify_on_random_towers():
    rng = random.Random(40912)
    done = 0
    while done < 50:
        n = rng.choice([1, 2])
        m = rng.choice([2, 3, 5])
        depth = rng.choice([1, 2, 3] if m < 5 else [1, 2])
        levels = []
        while len(levels) < depth:
            made = _random_compatible(rng, n, m)
            if made is None:
                continue
            mat, digits, labels = made
            u = _random_unimodular(rng, n)
            mat = mat.mul(u) if n > 1 and rng.random() < 0.3 else mat
            ok, _ = is_compatible_pair(mat, digits, labels, mode="exact")
            if not ok:
                continue
            levels.append(CompatiblePair(mat, digits, labels, "exact"))

        # (ii) translation closure
        shifted = translate_pair(levels[0], tuple(rng.randint(-3, 3) for _ in range(n)), tuple(rng.randint(-3, 3) for _ in range(n)))
        ok, _ = is_compatible_pair(shifted.matrix, shifted.digits, shifted.labels, mode="exact")
        assert ok

        # (v) congruence reduction closure
        base = levels[0]
        rt = base.matrix.transpose()
        new_digits = tuple(
            tuple(a + b for a, b in zip(d, rt.mul_vec(tuple(rng.randint(-1, 1) for _ in range(n)))))
            for d in base.digits
        )
        new_labels = tuple(
            tuple(a + b for a, b in zip(l, base.matrix.mul_vec(tuple(rng.randint(-1, 1) for _ in range(n)))))
            for l in base.labels
        )
        if len(set(new_digits)) == base.size and len(set(new_labels)) == base.size:
            red = reduce_pair_mod(base, new_digits, new_labels)
            ok, _ = is_compatible_pair(red.matrix, red.digits, red.labels, mode="exact")
            assert ok

        # (vi) tower closure
        tower = tower_pair(levels)
        assert tower.size == m ** depth
        if tower.size <= 27:
            ok, _ = is_compatible_pair(tower.matrix, tower.digits, tower.labels, mode="exact")
        else:
            ok, _ = is_compatible_pair(tower.matrix, tower.digits, tower.labels, mode="numeric", tol=1e-10)
        assert ok
        done += 1
