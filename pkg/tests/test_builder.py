import math
import random
from fractions import Fraction

import pytest

from conftest import SIERPINSKI, STAIRCASE
from moranspec.builder import (
    block_size_parameters,
    build_blocks,
    build_spectrum_level,
    choose_block_size,
    find_admissible_direction,
    normalize_first_level,
    spectrum_levels,
)
from moranspec.errors import CapExceeded, ContainmentViolation, NoAdmissibleDirection
from moranspec.exact import IntMatrix, rational_inverse
from moranspec.pairs import is_compatible_pair
from moranspec.system import build_system


def sierpinski_3i():
    level = ([[3, 0], [0, 3]], SIERPINSKI.digits)
    return build_system(2, 3, [], [level], r="1/3")


def staircase_system(cycle_diag=(10, 5)):
    first = ([[5, 0], [0, 5]], STAIRCASE.digits)
    rep = ([list(r) for r in ((cycle_diag[0], 0), (0, cycle_diag[1]))], STAIRCASE.digits)
    return build_system(2, 5, [first], [rep], r="1/5")


def test_normalize_identity_case():
    sys3 = sierpinski_3i()
    normalized, record = normalize_first_level(sys3)
    assert normalized is sys3
    assert record.is_identity


def test_normalize_nine_to_three():
    sys9 = build_system(2, 3, [], [([[9, 0], [0, 3 * 3]], SIERPINSKI.digits)], r="1/3")
    normalized, record = normalize_first_level(sys9)
    assert normalized.level(1).matrix == IntMatrix.diagonal([3, 3])
    assert normalized.level(2).matrix == IntMatrix.diagonal([9, 9])
    # forward = 3 * (9 I)^-1 = (1/3) I
    assert record.forward.rows == ((Fraction(1, 3), 0), (0, Fraction(1, 3)))
    assert record.back.rows == ((Fraction(3), 0), (0, Fraction(3)))
    assert not record.is_identity


def test_normalize_preserves_transform_values():
    # The transformed measure composed with the recorded map has the same
    # truncated transform as the original at random rational points.
    from moranspec.analyzer import truncated_transform

    sys9 = build_system(2, 3, [], [([[9, 0], [0, 9]], SIERPINSKI.digits)], r="1/3")
    normalized, record = normalize_first_level(sys9)
    rng = random.Random(5)
    for _ in range(10):
        xi = tuple(Fraction(rng.randint(-40, 40), rng.randint(1, 7)) for _ in range(2))
        eta = record.forward.mul_vec(xi)
        a = truncated_transform(sys9, xi, 6).value
        b = truncated_transform(normalized, eta, 6).value
        assert a == pytest.approx(b, abs=1e-12)


def test_admissible_direction_examples():
    sys_good = staircase_system((10, 5))
    assert find_admissible_direction(sys_good, 2) == 0  # direction (1,1)
    sys_bad = staircase_system((6, 5))
    assert find_admissible_direction(sys_bad, 2) is None
    sys3 = sierpinski_3i()
    assert find_admissible_direction(sys3, 1) == 0


def test_block_size_formula_closed_form():
    # n=2, r=1/3, c=1. With s=1 (Sierpinski digits) the warmup needs
    # 2*pi*s*(3*sqrt(2)/2)*(1/3)^M <= 1/2, first true at M=3, and the
    # geometric tail (sqrt(2)/2)*3^-K/(1-3^-K) <= 1/32 already at K=3.
    info = block_size_parameters(sierpinski_3i())
    assert info.warmup == 3
    assert info.block == 3
    assert math.sqrt(2) / 2 * 3.0**-3 / (1 - 3.0**-3) <= 1 / 32
    assert 2 * math.pi * 1.0 * (3 * math.sqrt(2) / 2) * (1 / 3) ** 3 <= 0.5
    assert 2 * math.pi * 1.0 * (3 * math.sqrt(2) / 2) * (1 / 3) ** 2 > 0.5


def test_block_size_with_larger_digit_norm():
    # Same closed form with s = sqrt(2): the warmup constant becomes 6*pi,
    # pushing M (and with it K) to 4 even though the tail bound alone
    # would already hold at K=3.
    sys_s2 = build_system(
        2, 3, [], [([[3, 0], [0, 3]], [(0, 0), (1, 0), (1, 1)])], r="1/3"
    )
    assert sys_s2.digit_norm_bound() == pytest.approx(math.sqrt(2), rel=1e-9)
    info = block_size_parameters(sys_s2)
    assert info.warmup == 4
    assert info.block == 4
    assert math.sqrt(2) / 2 * 3.0**-3 / (1 - 3.0**-3) <= 1 / 32


def test_block_size_monotone_in_delta():
    base = sierpinski_3i()
    smaller = build_system(2, 3, [], [([[3, 0], [0, 3]], SIERPINSKI.digits)], r="1/3", delta="1/100")
    assert block_size_parameters(smaller).block >= block_size_parameters(base).block


def test_choose_block_size_requires_admissible_directions():
    sys_bad = staircase_system((6, 5))
    with pytest.raises(NoAdmissibleDirection) as err:
        choose_block_size(sys_bad)
    assert err.value.level == 2


def test_build_blocks_sierpinski_k1():
    decomp = build_blocks(sierpinski_3i(), K=1, blocks=2)
    block = decomp.block(0)
    assert block.labels[0] == (0, 0)
    assert set(block.labels) == {(0, 0), (1, -1), (-1, 1)}
    assert set(block.digits) == set(SIERPINSKI.digits)
    ok, _ = is_compatible_pair(block.matrix, block.digits, block.labels, mode="exact")
    assert ok
    assert not decomp.meets_certified_bound


def test_build_blocks_first_level_already_reduced():
    # R_1 = m I makes C/m sit inside (-1/2,1/2]^n, so L_0 is C itself.
    decomp = build_blocks(staircase_system(), K=1, blocks=1)
    assert set(decomp.block(0).labels) == {(0, 0), (1, 1), (2, 2), (-2, -2), (-1, -1)}


def test_build_blocks_cardinality():
    decomp = build_blocks(sierpinski_3i(), K=2, blocks=2)
    for block in decomp.blocks:
        assert len(block.digits) == 9
        assert len(block.labels) == 9


def test_spectrum_level_zero_is_first_block_labels():
    decomp = build_blocks(sierpinski_3i(), K=1, blocks=1)
    lvl = build_spectrum_level(decomp, 0)
    assert set(lvl.elements) == set(decomp.block(0).labels)


def test_spectrum_levels_nested_and_distinct():
    decomp = build_blocks(sierpinski_3i(), K=2, blocks=3)
    levels = spectrum_levels(decomp, 2)
    sizes = [lvl.size for lvl in levels]
    assert sizes == [9, 81, 729]
    for small, big in zip(levels, levels[1:]):
        assert big.elements[: small.size] == small.elements
        assert set(small.elements) <= set(big.elements)
    for lvl in levels:
        assert lvl.elements[0] == (0, 0)
        assert len(set(lvl.elements)) == lvl.size


def test_spectrum_containment_with_certified_block_size():
    system = sierpinski_3i()
    decomp = build_blocks(system, blocks=4)  # K = 3 certified
    assert decomp.meets_certified_bound
    levels = spectrum_levels(decomp, 3, cap=10**6)
    assert [lvl.size for lvl in levels] == [27, 729, 19683, 531441]
    assert all(lvl.containment_checked for lvl in levels)


def test_spectrum_containment_violation_detected():
    # A label congruent mod R~^t but outside the fundamental domain must
    # trip the exact containment check: (4,-1) is (1,-1) shifted by 3*(1,0).
    from moranspec.builder import Block, BlockDecomposition

    system = sierpinski_3i()
    good = build_blocks(system, K=1, blocks=1)
    bad_block = Block(
        index=0,
        matrix=good.block(0).matrix,
        digits=good.block(0).digits,
        labels=((0, 0), (4, -1), (-1, 1)),
        direction_indices=good.block(0).direction_indices,
    )
    bad = BlockDecomposition(system=system, K=1, blocks=(bad_block,), meets_certified_bound=False)
    with pytest.raises(ContainmentViolation):
        spectrum_levels(bad, 0, enforce_containment=True)


def test_spectrum_containment_holds_even_at_small_k_for_diagonal_system():
    # For R = 3I the rescaled levels converge inside [-1/2, 1/2]^2, so even
    # the uncertified K=1 build satisfies the padded box exactly.
    decomp = build_blocks(sierpinski_3i(), K=1, blocks=3)
    levels = spectrum_levels(decomp, 2, enforce_containment=True)
    assert all(lvl.containment_checked for lvl in levels)


def test_spectrum_cap():
    decomp = build_blocks(sierpinski_3i(), K=3, blocks=4)
    with pytest.raises(CapExceeded):
        spectrum_levels(decomp, 3, cap=1000)


def test_fundamental_domain_reduction_idempotent_and_congruent():
    from moranspec.builder import _reduce_into_fundamental_domain

    rng = random.Random(77)
    mat = IntMatrix.from_rows([[3, 1], [0, 3]])
    rt = mat.transpose()
    rt_inv = rational_inverse(rt)
    for _ in range(50):
        v = (rng.randint(-30, 30), rng.randint(-30, 30))
        red = _reduce_into_fundamental_domain(v, rt, rt_inv)
        again = _reduce_into_fundamental_domain(red, rt, rt_inv)
        assert red == again
        quot = rt_inv.mul_vec(tuple(a - b for a, b in zip(v, red)))
        assert all(x.denominator == 1 for x in quot)
        y = rt_inv.mul_vec(red)
        assert all(Fraction(-1, 2) < c <= Fraction(1, 2) for c in y)


def test_normalized_spectrum_pulls_back_to_orthogonal_set():
    from moranspec.analyzer import verify_orthogonality

    sys9 = build_system(2, 3, [], [([[9, 0], [0, 9]], SIERPINSKI.digits)], r="1/3")
    normalized, record = normalize_first_level(sys9)
    decomp = build_blocks(normalized, K=1, blocks=2)
    levels = spectrum_levels(decomp, 1, enforce_containment=False)
    pulled = []
    for lam in levels[1].elements:
        back = record.back.mul_vec(lam)
        assert all(v.denominator == 1 for v in back)
        pulled.append(tuple(int(v) for v in back))
    report = verify_orthogonality(sys9, pulled)
    assert report.passed
