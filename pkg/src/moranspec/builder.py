"""Candidate spectrum construction by blocks.

Levels are grouped K at a time into block matrices and digit towers. Each
level contributes a centered coset label set C = {0, c^(1), ..., c^(m-1)},
c^(l) congruent to l*nu mod m with c^(l)/m inside (-1/2, 1/2]^n; the block
label set is the tower sum (1/m) * (R_1^t C_1 + R_1^t R_2^t C_2 + ...),
integral exactly when each chosen direction nu satisfies m | nu^t R. The
tower is then reduced into the fundamental domain N = R~^t(-1/2,1/2]^n
and re-verified exactly as a compatible pair. Spectrum level k is the
mixed-radix sum L_0 + R~_0^t L_1 + ... + R~_0^t...R~_{k-1}^t L_k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (
    CapExceeded,
    CollisionDetected,
    ContainmentViolation,
    NoAdmissibleDirection,
    PairVerificationFailed,
)
from .exact import IntMatrix, RationalMatrix, rational_inverse, vec_add
from .pairs import is_compatible_pair
from .system import Level, MoranSystem, inverse_transpose


@dataclass(frozen=True)
class TransformRecord:
    """Linear change of variables between a system and its normalized form.

    ``forward`` maps spectra of the original system to spectra of the
    normalized one; ``back`` is its inverse.
    """

    forward: RationalMatrix
    back: RationalMatrix

    @property
    def is_identity(self) -> bool:
        return self.forward == RationalMatrix.identity(self.forward.n)


def normalize_first_level(system: MoranSystem):
    """Replace R_1 by m*I, returning the conjugated system and the transform.

    The transformed measure is the original composed with a linear map, so
    spectrality is preserved and spectra translate through the recorded
    matrices: forward = m (R_1^t)^-1 applied to original spectra, back its
    inverse applied to constructed ones.
    """
    m = system.prime
    n = system.dimension
    first = system.level(1)
    target = IntMatrix.diagonal([m] * n)
    forward = RationalMatrix.from_rows(
        [[Fraction(m) * v for v in row] for row in rational_inverse(first.matrix.transpose()).rows]
    )
    back = forward.inverse()
    record = TransformRecord(forward=forward, back=back)
    if first.matrix == target:
        return system, record
    new_first = Level(matrix=target, digits=first.digits, zeros=first.zeros)
    if system.preamble:
        preamble = (new_first,) + system.preamble[1:]
        cycle = system.cycle
    else:
        preamble = (new_first,)
        cycle = tuple(system.cycle[(i + 1) % len(system.cycle)] for i in range(len(system.cycle)))
    r = max(system.r, (1.0 / m) * (1 + 1e-12))
    normalized = MoranSystem(
        dimension=n,
        prime=m,
        preamble=preamble,
        cycle=cycle,
        r=r,
        delta=system.delta,
        beta=system.beta,
        c=system.c,
    )
    return normalized, record


def find_admissible_direction(system: MoranSystem, k: int):
    """Least direction index i at level k with m | nu_i^t R_k, else None."""
    level = system.level(k)
    m = system.prime
    rt = level.matrix.transpose()
    for idx, nu in enumerate(level.zeros.directions):
        if all(x % m == 0 for x in rt.mul_vec(nu)):
            return idx
    return None


@dataclass(frozen=True)
class BlockSizeInfo:
    warmup: int  # least depth M after which every remaining mask factor is >= 1/2
    block: int  # chosen K
    contraction: float
    digit_norm: float
    tail_bound: float  # value of the geometric bound at K

    @property
    def K(self) -> int:
        return self.block


def block_size_parameters(system: MoranSystem) -> BlockSizeInfo:
    s = system.digit_norm_bound()
    r = system.r
    c = system.c
    n = system.dimension
    delta = float(system.delta)
    if not (0 < r < 1):
        raise ValueError(f"contraction bound r = {r} outside (0, 1)")
    warm_coeff = 2 * math.pi * s * (3 * math.sqrt(n) / 2) * c * c
    M = 1
    while warm_coeff * r**M > 0.5:
        M += 1
        if M > 10_000:
            raise ValueError("contraction too weak, warmup depth exploded")

    def tail(K):
        return c * c * (math.sqrt(n) / 2) * r**K / (1 - r**K)

    K = max(M, 1)
    while tail(K) > delta / 4:
        K += 1
        if K > 10_000:
            raise ValueError("contraction too weak, block size exploded")
    return BlockSizeInfo(warmup=M, block=K, contraction=r, digit_norm=s, tail_bound=tail(K))


def choose_block_size(system: MoranSystem) -> int:
    """Least block size K that makes the spectrum containment bound hold.

    Also checks that every level beyond the first has an admissible zero
    direction, raising NoAdmissibleDirection otherwise.
    """
    for k, _ in system.levels_from(2):
        if find_admissible_direction(system, k) is None:
            raise NoAdmissibleDirection(k)
    return block_size_parameters(system).block


def _centered_class(nu, m: int) -> tuple:
    """{0, c^(1), ..., c^(m-1)} with c^(l) = l*nu mod m, entries in (-m/2, m/2]."""
    out = [tuple([0] * len(nu))]
    for l in range(1, m):
        vec = []
        for comp in nu:
            e = (l * comp) % m
            if 2 * e > m:
                e -= m
            vec.append(e)
        out.append(tuple(vec))
    return tuple(out)


@dataclass(frozen=True)
class Block:
    index: int
    matrix: IntMatrix  # R~ = R_{(k+1)K} ... R_{kK+1}
    digits: tuple
    labels: tuple  # 0 first
    direction_indices: tuple


@dataclass(frozen=True)
class BlockDecomposition:
    system: MoranSystem
    K: int
    blocks: tuple
    meets_certified_bound: bool

    def block(self, k: int) -> Block:
        return self.blocks[k]


def _reduce_into_fundamental_domain(vec, rt: IntMatrix, rt_inv: RationalMatrix):
    """Representative of vec mod R~^t Z^n inside R~^t (-1/2, 1/2]^n.

    Componentwise z = ceil(R~^-t v - 1/2) maps the boundary 1/2 into the
    half-open domain.
    """
    y = rt_inv.mul_vec(vec)
    z = tuple(math.ceil(c - Fraction(1, 2)) for c in y)
    shift = rt.mul_vec(z)
    return tuple(a - b for a, b in zip(vec, shift))


def build_blocks(system: MoranSystem, K=None, blocks: int = 4) -> BlockDecomposition:
    """Materialize the first ``blocks`` block pairs for block size K.

    K defaults to choose_block_size. Each block is re-verified exactly as
    a compatible pair; failure raises PairVerificationFailed and signals
    an index-interpretation bug rather than a valid state.
    """
    certified_K = None
    if K is None:
        certified_K = choose_block_size(system)
        K = certified_K
    m = system.prime
    n = system.dimension
    built = []
    for b in range(blocks):
        level_ids = list(range(b * K + 1, (b + 1) * K + 1))
        levels = [system.level(k) for k in level_ids]
        dir_idx = []
        for k in level_ids:
            idx = find_admissible_direction(system, k)
            if idx is None:
                raise NoAdmissibleDirection(
                    k,
                    f"level {k} has no admissible direction"
                    + (" (normalize the first level to m*I first)" if k == 1 else ""),
                )
            dir_idx.append(idx)

        digit_coef = [IntMatrix.identity(n)] * K
        for j in range(K - 2, -1, -1):
            digit_coef[j] = digit_coef[j + 1].mul(levels[j + 1].matrix)
        label_coef = [None] * K  # (1/m) R_1^t ... R_j^t as RationalMatrix
        acc = RationalMatrix.identity(n)
        for j in range(K):
            acc = acc.mul(levels[j].matrix.transpose().to_rational())
            label_coef[j] = RationalMatrix.from_rows([[v / m for v in row] for row in acc.rows])

        digit_terms = [[digit_coef[j].mul_vec(d) for d in levels[j].digits.digits] for j in range(K)]
        label_terms = []
        for j in range(K):
            reps = _centered_class(levels[j].zeros.directions[dir_idx[j]], m)
            terms = []
            for c in reps:
                val = label_coef[j].mul_vec(c)
                if any(x.denominator != 1 for x in val):
                    raise PairVerificationFailed(
                        b,
                        message=f"block {b}: label tower term at level {level_ids[j]} is not integral; "
                        "the chosen direction does not divide the matrix",
                    )
                terms.append(tuple(int(x) for x in val))
            label_terms.append(terms)

        # odometer with the earliest level fastest; keeps 0 as the first label
        def tower(terms):
            acc_elems = [tuple([0] * n)]
            for level_list in terms:
                acc_elems = [vec_add(base, t) for t in level_list for base in acc_elems]
            return acc_elems

        digits = tower(digit_terms)
        raw_labels = tower(label_terms)

        rtilde = levels[-1].matrix
        for lvl in reversed(levels[:-1]):
            rtilde = rtilde.mul(lvl.matrix)
        rt = rtilde.transpose()
        rt_inv = rational_inverse(rt)
        labels = [_reduce_into_fundamental_domain(v, rt, rt_inv) for v in raw_labels]

        if len(set(digits)) != m**K:
            raise PairVerificationFailed(b, message=f"block {b}: digit tower collided")
        if len(set(labels)) != m**K:
            raise PairVerificationFailed(b, message=f"block {b}: label tower collided after reduction")
        ok, witness = is_compatible_pair(rtilde, digits, labels, mode="exact")
        if not ok:
            raise PairVerificationFailed(b, witness=witness)
        built.append(
            Block(index=b, matrix=rtilde, digits=tuple(digits), labels=tuple(labels), direction_indices=tuple(dir_idx))
        )
    meets = certified_K is not None or K >= block_size_parameters(system).block
    return BlockDecomposition(system=system, K=K, blocks=tuple(built), meets_certified_bound=meets)


@dataclass(frozen=True)
class SpectrumLevel:
    index: int
    K: int
    elements: tuple  # prefix-ordered: the first m^(K*k) entries form level k-1
    containment_checked: bool

    @property
    def size(self) -> int:
        return len(self.elements)


def spectrum_levels(decomp: BlockDecomposition, upto: int, cap: int = 10**6, enforce_containment=None):
    """Spectrum levels 0..upto, each nested as a prefix of the next.

    Raises CapExceeded before materializing more than ``cap`` elements,
    CollisionDetected if the sums are not pairwise distinct, and
    ContainmentViolation when the exact box check fails (checked by
    default only when K meets the certified bound).
    """
    system = decomp.system
    m = system.prime
    n = system.dimension
    K = decomp.K
    if enforce_containment is None:
        enforce_containment = decomp.meets_certified_bound
    if upto >= len(decomp.blocks):
        raise ValueError(f"only {len(decomp.blocks)} blocks built, need {upto + 1}")
    if m ** (K * (upto + 1)) > cap:
        raise CapExceeded(f"level {upto} holds m^(K*(k+1)) = {m ** (K * (upto + 1))} elements, cap is {cap}")

    levels = []
    elements = [tuple([0] * n)]
    coef = IntMatrix.identity(n)  # R~_0^t ... R~_{k-1}^t
    for k in range(upto + 1):
        block = decomp.block(k)
        shifted = [coef.mul_vec(l) for l in block.labels]
        assert shifted[0] == tuple([0] * n)
        elements = [vec_add(base, t) for t in shifted for base in elements]
        if len(set(elements)) != len(elements):
            raise CollisionDetected(f"level {k} sums are not pairwise distinct")
        checked = False
        if enforce_containment:
            _check_containment(decomp, k, elements)
            checked = True
        levels.append(SpectrumLevel(index=k, K=K, elements=tuple(elements), containment_checked=checked))
        coef = coef.mul(block.matrix.transpose())
    return tuple(levels)


def build_spectrum_level(decomp: BlockDecomposition, k: int, cap: int = 10**6, enforce_containment=None) -> SpectrumLevel:
    return spectrum_levels(decomp, k, cap=cap, enforce_containment=enforce_containment)[k]


def _check_containment(decomp: BlockDecomposition, k: int, elements):
    """Exact check of (R~_0^t ... R~_k^t)^-1 Lambda_k inside the padded box.

    A cheap per-block bound (sum of coordinate maxima) is tried first; only
    if it is inconclusive does the element-by-element rational check run.
    """
    system = decomp.system
    n = system.dimension
    bound = Fraction(1, 2) + system.delta / 4

    prod = IntMatrix.identity(n)
    for j in range(k + 1):
        prod = prod.mul(decomp.block(j).matrix.transpose())
    # conservative: coordinate maxima of (R~_j^t ... R~_k^t)^-1 L_j summed over j
    total = [Fraction(0)] * n
    tail = IntMatrix.identity(n)
    for j in range(k, -1, -1):
        tail = decomp.block(j).matrix.transpose().mul(tail)
        w = rational_inverse(tail)
        maxima = [Fraction(0)] * n
        for l in decomp.block(j).labels:
            y = w.mul_vec(l)
            for i in range(n):
                maxima[i] = max(maxima[i], abs(y[i]))
        total = [a + b for a, b in zip(total, maxima)]
    if all(t <= bound for t in total):
        return
    inv = rational_inverse(prod)
    for lam in elements:
        y = inv.mul_vec(lam)
        if any(abs(c) > bound for c in y):
            raise ContainmentViolation(f"level {k}: element {lam} maps to {tuple(map(str, y))} outside the box")
