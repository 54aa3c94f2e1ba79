"""Decidable spectrality criteria and the admissibility-class scan.

Eventual periodicity makes the "for every level k >= 2" quantifiers
decidable: the preamble tail and one full cycle are checked. Verdicts are
issued only when the cited criterion's hypotheses were machine-verified;
everything else is an explicit Unknown with caveats.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .builder import find_admissible_direction
from .errors import (
    DeterminantViolation,
    HypothesisViolation,
    ModelViolation,
    TemplateMismatch,
    ValidationFailure,
)
from .exact import IntMatrix, RationalMatrix, rational_inverse
from .masks import DigitSet, find_zero_directions
from .system import MoranSystem

SPECTRAL = "Spectral"
NOT_SPECTRAL = "NotSpectral"
UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Verdict:
    outcome: str
    criterion: str
    certificate: dict = field(default_factory=dict)
    caveats: tuple = ()

    @property
    def exit_code(self) -> int:
        return {SPECTRAL: 0, NOT_SPECTRAL: 1}.get(self.outcome, 2)


def _levels_from_two(system: MoranSystem):
    """Distinct levels occurring at some index >= 2 (preamble tail plus cycle)."""
    return list(system.levels_from(2))


def decide_diagonal(system: MoranSystem) -> Verdict:
    """Divisibility criterion for diagonal systems.

    With every R_k = diag[p_k1, ..., p_kn] and m > 2 prime, the measure is
    spectral exactly when m divides every diagonal entry from level 2 on.
    No admissibility hypothesis is needed in the diagonal case.
    """
    if system.prime <= 2:
        raise HypothesisViolation("the diagonal criterion needs a prime larger than 2")
    caveats = ()
    for k, lvl in system.distinct_levels():
        if not lvl.matrix.is_diagonal():
            raise HypothesisViolation(f"level {k} is not diagonal")
        if not all(lvl.zeros.model_compliant):
            caveats = (
                "some zero directions have zero entries; the strict coset-line model assumes none",
            )
    for k, lvl in _levels_from_two(system):
        for i in range(system.dimension):
            if lvl.matrix[i, i] % system.prime != 0:
                return Verdict(
                    outcome=NOT_SPECTRAL,
                    criterion="diagonal-divisibility",
                    certificate={"witness": (k, i + 1), "entry": lvl.matrix[i, i]},
                    caveats=caveats,
                )
    return Verdict(
        outcome=SPECTRAL,
        criterion="diagonal-divisibility",
        certificate={"checked_levels": [k for k, _ in _levels_from_two(system)]},
        caveats=caveats,
    )


def has_infinite_orthogonal_set(system: MoranSystem) -> bool:
    """Whether some infinite orthogonal exponential family exists.

    For diagonal systems this holds exactly when every coordinate sees
    infinitely many divisible levels, i.e. each coordinate has at least
    one divisible level inside the cycle.
    """
    for k, lvl in system.distinct_levels():
        if not lvl.matrix.is_diagonal():
            raise HypothesisViolation(f"level {k} is not diagonal")
    for i in range(system.dimension):
        if not any(lvl.matrix[i, i] % system.prime == 0 for lvl in system.cycle):
            return False
    return True


def _phi_is_one(system: MoranSystem):
    for k, lvl in system.distinct_levels():
        if lvl.zeros.count != 1:
            return k, lvl.zeros.count
    return None


def decide_single_direction(system: MoranSystem, horizon=None) -> Verdict:
    """Divisibility criterion when every level has exactly one direction.

    Requires the admissibility scan to certify the box condition first;
    if it cannot, the verdict is Unknown. Otherwise the measure is
    spectral exactly when m | nu_k^t R_k for every level k >= 2.
    """
    if system.prime <= 2:
        raise HypothesisViolation("criterion needs a prime larger than 2")
    bad = _phi_is_one(system)
    if bad is not None:
        raise HypothesisViolation(f"level {bad[0]} has {bad[1]} zero directions, criterion needs exactly 1")
    scan = admissibility_scan(system, horizon=horizon)
    if scan.status != "certified":
        return Verdict(
            outcome=UNKNOWN,
            criterion="single-direction-divisibility",
            certificate={"admissibility": scan.status},
            caveats=("box condition could not be certified",) + scan.caveats,
        )
    caveats = scan.caveats
    for k, lvl in _levels_from_two(system):
        nu = lvl.zeros.directions[0]
        row = lvl.matrix.transpose().mul_vec(nu)
        if any(x % system.prime != 0 for x in row):
            return Verdict(
                outcome=NOT_SPECTRAL,
                criterion="single-direction-divisibility",
                certificate={"witness": k, "direction": nu, "product": tuple(row)},
                caveats=caveats,
            )
    return Verdict(
        outcome=SPECTRAL,
        criterion="single-direction-divisibility",
        certificate={"checked_levels": [k for k, _ in _levels_from_two(system)], "admissibility": scan.status},
        caveats=caveats,
    )


_TEMPLATES = ("upper-row", "upper-col", "lower-row", "lower-col")


def _matches_template(matrix: IntMatrix, kind: str) -> bool:
    n = matrix.n
    diag = [matrix[i, i] for i in range(n)]
    for i in range(n):
        for j in range(n):
            if kind == "upper-row":
                want = diag[i] if j >= i else 0
            elif kind == "upper-col":
                want = diag[j] if j >= i else 0
            elif kind == "lower-row":
                want = diag[i] if j <= i else 0
            else:
                want = diag[j] if j <= i else 0
            if matrix[i, j] != want:
                return False
    return True


def matching_templates(matrix: IntMatrix) -> tuple:
    return tuple(kind for kind in _TEMPLATES if _matches_template(matrix, kind))


def decide_triangular(system: MoranSystem) -> Verdict:
    """Divisibility criterion for the constant-band triangular templates.

    All levels must share one of the four supported shapes (upper or lower
    triangular with constant rows or columns); the diagonal entries play
    the role of the divisibility targets.
    """
    if system.prime <= 2:
        raise HypothesisViolation("criterion needs a prime larger than 2")
    bad = _phi_is_one(system)
    if bad is not None:
        raise HypothesisViolation(f"level {bad[0]} has {bad[1]} zero directions, criterion needs exactly 1")
    common = set(_TEMPLATES)
    for k, lvl in system.distinct_levels():
        common &= set(matching_templates(lvl.matrix))
        if not common:
            raise TemplateMismatch(f"level {k} breaks every shared triangular template")
    for k, lvl in _levels_from_two(system):
        for i in range(system.dimension):
            if lvl.matrix[i, i] % system.prime != 0:
                return Verdict(
                    outcome=NOT_SPECTRAL,
                    criterion="triangular-template",
                    certificate={"witness": (k, i + 1), "entry": lvl.matrix[i, i], "template": sorted(common)},
                )
    return Verdict(
        outcome=SPECTRAL,
        criterion="triangular-template",
        certificate={"template": sorted(common), "checked_levels": [k for k, _ in _levels_from_two(system)]},
    )


@dataclass(frozen=True)
class PlanarClass:
    family: int | None  # 1 -> direction (1,1); 2 -> direction (1,2); None otherwise
    direction: tuple | None


def classify_planar_digit_set(digits: DigitSet) -> PlanarClass:
    """Classify {0,(a,b),(c,d)} with |ad-bc| = 1 by its mod-3 congruence.

    Family 1 (a+b+c+d = 0 mod 3) forces zero direction (1,1); family 2
    (d-c = a-b mod 3) forces (1,2). The result is cross-validated against
    the direction enumeration.
    """
    if digits.n != 2 or digits.size != 3:
        raise ModelViolation("classifier needs three planar digits")
    if (0, 0) not in digits.digits:
        raise ModelViolation("digit set must contain the origin")
    others = [d for d in digits.digits if d != (0, 0)]
    (a, b), (c, d) = others
    det = a * d - b * c
    if abs(det) != 1:
        raise DeterminantViolation(f"|ad - bc| = {abs(det)} is not 1")
    fam1 = (-d - c) % 3 == (a + b) % 3
    fam2 = (d - c) % 3 == (a - b) % 3
    assert not (fam1 and fam2), "families are disjoint when the determinant is a unit"
    zeros = find_zero_directions(digits, 3)
    if fam1:
        assert zeros.directions == ((1, 1),)
        return PlanarClass(family=1, direction=(1, 1))
    if fam2:
        assert zeros.directions == ((1, 2),)
        return PlanarClass(family=2, direction=(1, 2))
    assert (1, 1) not in zeros.directions and (1, 2) not in zeros.directions
    return PlanarClass(family=None, direction=None)


@dataclass(frozen=True)
class AdmissibilityResult:
    status: str  # "certified" | "violation" | "inconclusive"
    unconditional: bool
    horizon: int
    tail_start: int | None
    start_level: int
    products_checked: int
    witness: dict | None
    caveats: tuple

    @property
    def exit_code(self) -> int:
        return {"certified": 0, "violation": 1}.get(self.status, 2)


def _box_widths(inv: RationalMatrix, half_ext: Fraction):
    n = inv.n
    return [half_ext * sum(abs(inv.rows[i][t]) for t in range(n)) for i in range(n)]


def _support_lower_bound_ok(inv: RationalMatrix, half_ext: Fraction, point, u, beta: Fraction) -> bool:
    """Exact check of (<u, q> - h_P(u)) >= beta * |u| for the box image P."""
    n = inv.n
    h = half_ext * sum(abs(sum(u[i] * inv.rows[i][t] for i in range(n))) for t in range(n))
    num = sum(a * b for a, b in zip(u, point)) - h
    if num < 0:
        return False
    u_sq = sum(a * a for a in u)
    return num * num >= beta * beta * u_sq


def _violation_candidate(inv: RationalMatrix, half_ext: Fraction, point, beta: Fraction):
    """Search for x in the box with |A^-1 x - q| < beta; exact on success."""
    n = inv.n
    g = np.array([[float(v) for v in row] for row in inv.rows])
    q = np.array([float(v) for v in point])
    half = float(half_ext)
    x = np.clip(np.linalg.lstsq(g, q, rcond=None)[0], -half, half)
    lip = 2 * np.linalg.norm(g, 2) ** 2
    step = 1.0 / max(lip, 1e-9)
    for _ in range(300):
        grad = 2 * g.T @ (g @ x - q)
        x = np.clip(x - step * grad, -half, half)
    cand = [Fraction(v).limit_denominator(10**6) for v in x]
    cand = [max(-half_ext, min(half_ext, v)) for v in cand]
    y = inv.mul_vec(cand)
    dist_sq = sum((a - b) ** 2 for a, b in zip(y, point))
    if dist_sq < beta * beta:
        return {"box_point": tuple(str(v) for v in cand), "image": tuple(str(v) for v in y)}
    return None


def _certify_product_against_family(inv, half_ext, beta, nu, m):
    """Certificate for one product and one direction family.

    Returns (ok, witness_or_none, conclusive). Tries the coordinate-slab
    argument first: along any coordinate with nu_i nonzero mod m, every
    coset point sits at distance >= 1/m from 0, so a box image thinner
    than 1/m - beta in that coordinate clears the whole family at once.
    Falls back to per-point support-function bounds.
    """
    n = inv.n
    widths = _box_widths(inv, half_ext)
    inv_m = Fraction(1, m)
    for i in range(n):
        if nu[i] % m != 0 and inv_m - widths[i] >= beta:
            return True, None, True
    # enumerate candidate coset points inside the inflated bounding box
    ranges = []
    for i in range(n):
        lo = widths[i] + beta
        ranges.append((math.floor(-lo), math.ceil(lo)))
    candidates = []
    for j in range(1, m):
        base = [Fraction(j * c % m, m) for c in nu]
        spans = []
        for i in range(n):
            lo = math.floor(ranges[i][0] - base[i]) - 1
            hi = math.ceil(ranges[i][1] - base[i]) + 1
            spans.append(range(lo, hi + 1))
        for z in itertools.product(*spans):
            q = tuple(base[i] + z[i] for i in range(n))
            if all(abs(q[i]) <= widths[i] + beta for i in range(n)):
                candidates.append(q)
    if len(candidates) > 100_000:
        return False, None, False
    for q in candidates:
        if _support_lower_bound_ok(inv, half_ext, q, q, beta):
            continue
        # refine the separating direction from the float nearest point
        g = np.array([[float(v) for v in row] for row in inv.rows])
        qf = np.array([float(v) for v in q])
        half = float(half_ext)
        x = np.clip(np.linalg.lstsq(g, qf, rcond=None)[0], -half, half)
        for _ in range(200):
            grad = 2 * g.T @ (g @ x - qf)
            x = np.clip(x - grad / max(2 * np.linalg.norm(g, 2) ** 2, 1e-9), -half, half)
        u = [Fraction(v).limit_denominator(10**4) for v in (qf - g @ x)]
        if any(u) and _support_lower_bound_ok(inv, half_ext, q, tuple(u), beta):
            continue
        witness = _violation_candidate(inv, half_ext, q, beta)
        if witness is not None:
            witness["coset_point"] = tuple(str(v) for v in q)
            return False, witness, True
        return False, {"coset_point": tuple(str(v) for v in q)}, False
    return True, None, True


def admissibility_scan(system: MoranSystem, horizon=None, delta=None, beta=None) -> AdmissibilityResult:
    """Certify that transpose products keep the padded box off the zero set.

    Checks every product of consecutive level transposes: lengths up to
    the tail threshold explicitly (exact rational certificates), and all
    longer products at once through the contraction radius bound
    |A^-1| <= r^p, which keeps the box image inside the ball of radius
    1/m - beta where no coset point lives. When the tail threshold is
    within the horizon the certificate is unconditional for the whole
    eventually-periodic system.
    """
    delta = Fraction(delta) if delta is not None else system.delta
    beta = Fraction(beta) if beta is not None else system.beta
    if not (0 < delta < Fraction(1, 4)) or not (0 < beta < Fraction(1, 4)):
        raise ValidationFailure("params", "delta and beta must lie strictly inside (0, 1/4)")
    m = system.prime
    half_ext = Fraction(1, 2) + delta
    r = Fraction(system.r)
    n = system.dimension

    families = []
    seen = set()
    for _, lvl in system.distinct_levels():
        for nu in lvl.zeros.directions:
            if nu not in seen:
                seen.add(nu)
                families.append(nu)

    # tail threshold: r^p * half_ext * sqrt(n) + beta <= 1/m
    tail_start = None
    gap = Fraction(1, m) - beta
    if gap > 0 and 0 < r < 1:
        p = 1
        while p <= 512:
            if (r**p * half_ext) ** 2 * n <= gap * gap:
                tail_start = p
                break
            p += 1

    cycle_len = len(system.cycle)
    if horizon is None:
        horizon = max(3 * cycle_len, 6)
        if tail_start is not None:
            horizon = max(horizon, min(tail_start - 1, 64))
    if horizon < 1:
        raise ValidationFailure("params", "horizon must be at least 1")
    p_max = horizon if tail_start is None else min(horizon, tail_start - 1)

    starts = list(range(1, len(system.preamble) + cycle_len + 1))
    failures = []
    witness = None
    inconclusive = []
    products_checked = 0
    for start in starts:
        acc = None
        for p in range(1, p_max + 1):
            mat_t = system.level(start + p - 1).matrix.transpose()
            acc = mat_t if acc is None else acc.mul(mat_t)
            inv = rational_inverse(acc)
            products_checked += 1
            for nu in families:
                ok, wit, conclusive = _certify_product_against_family(inv, half_ext, beta, nu, m)
                if ok:
                    continue
                if conclusive:
                    failures.append((start, p))
                    if witness is None:
                        witness = {"start_level": start, "length": p, **(wit or {})}
                else:
                    inconclusive.append((start, p, nu))

    cycle_starts = set(range(len(system.preamble) + 1, len(system.preamble) + cycle_len + 1))
    hard_failures = [f for f in failures if f[0] in cycle_starts]
    caveats = []
    unconditional = tail_start is not None and p_max >= tail_start - 1
    if not unconditional:
        caveats.append(f"product lengths beyond {p_max} were not certified (horizon limit)")
    if inconclusive:
        first = inconclusive[0]
        return AdmissibilityResult(
            status="inconclusive",
            unconditional=False,
            horizon=horizon,
            tail_start=tail_start,
            start_level=0,
            products_checked=products_checked,
            witness={"start_level": first[0], "length": first[1]},
            caveats=tuple(caveats + ["support-function certificate failed without an exact violation"]),
        )
    if hard_failures:
        return AdmissibilityResult(
            status="violation",
            unconditional=False,
            horizon=horizon,
            tail_start=tail_start,
            start_level=0,
            products_checked=products_checked,
            witness=witness,
            caveats=tuple(caveats),
        )
    start_level = max((f[0] for f in failures), default=0)
    if failures:
        caveats.append(f"products starting at levels <= {start_level} fail; condition holds from level {start_level + 1} on")
    return AdmissibilityResult(
        status="certified",
        unconditional=unconditional,
        horizon=horizon,
        tail_start=tail_start,
        start_level=start_level,
        products_checked=products_checked,
        witness=None,
        caveats=tuple(caveats),
    )


def resample_admissibility(system: MoranSystem, samples: int = 10_000, lengths=(1, 2, 3), seed: int = 0) -> bool:
    """Soundness cross-check: random box points never land beta-close to a coset.

    Draws uniform points in the padded box, pushes them through each
    product inverse, and measures the true distance to the nearest coset
    point of every family in floats.
    """
    rng = np.random.default_rng(seed)
    m = system.prime
    beta = float(system.beta)
    half = float(Fraction(1, 2) + system.delta)
    families = []
    for _, lvl in system.distinct_levels():
        families.extend(lvl.zeros.directions)
    per_product = max(1, samples // (len(lengths) * (len(system.preamble) + len(system.cycle))))
    for start in range(1, len(system.preamble) + len(system.cycle) + 1):
        acc = None
        for p in range(1, max(lengths) + 1):
            mat_t = system.level(start + p - 1).matrix.transpose()
            acc = mat_t if acc is None else acc.mul(mat_t)
            if p not in lengths:
                continue
            inv = np.array([[float(v) for v in row] for row in rational_inverse(acc).rows])
            pts = rng.uniform(-half, half, size=(per_product, system.dimension))
            images = pts @ inv.T
            for nu in set(families):
                for j in range(1, m):
                    target = np.array([((j * c) % m) / m for c in nu])
                    diff = images - target
                    frac = diff - np.round(diff)
                    dist = np.sqrt((frac**2).sum(axis=1))
                    if (dist < beta - 1e-12).any():
                        return False
    return True


def _planar_families(system: MoranSystem):
    """Congruence family per level when the planar classifier applies."""
    if system.dimension != 2 or system.prime != 3:
        return None
    families = {}
    for k, lvl in system.distinct_levels():
        try:
            got = classify_planar_digit_set(lvl.digits)
        except (ModelViolation, DeterminantViolation):
            return None
        if got.family is None:
            return None
        families[k] = got.family
    return families


def decide(system: MoranSystem, horizon=None) -> Verdict:
    """Route to the sharpest applicable criterion.

    Diagonal systems use the unconditional diagonal test; triangular
    templates and single-direction systems use their divisibility tests
    gated on admissibility; remaining systems fall back to the block
    construction sufficiency (divisible direction at every level plus a
    certified box condition), which can only return Spectral or Unknown.
    """
    if system.prime <= 2:
        return Verdict(
            outcome=UNKNOWN,
            criterion="none",
            caveats=("no implemented criterion covers digit cardinality 2",),
        )
    if all(lvl.matrix.is_diagonal() for _, lvl in system.distinct_levels()):
        return decide_diagonal(system)
    phi_one = _phi_is_one(system) is None
    if phi_one:
        annotate = _planar_families(system)
        try:
            verdict = decide_triangular(system)
        except TemplateMismatch:
            verdict = decide_single_direction(system, horizon=horizon)
        if annotate:
            verdict = Verdict(
                outcome=verdict.outcome,
                criterion=verdict.criterion,
                certificate={**verdict.certificate, "planar_families": annotate},
                caveats=verdict.caveats,
            )
        return verdict
    missing = [k for k, _ in system.levels_from(2) if find_admissible_direction(system, k) is None]
    if missing:
        return Verdict(
            outcome=UNKNOWN,
            criterion="block-construction-sufficiency",
            certificate={"levels_without_admissible_direction": missing},
            caveats=("sufficiency needs a divisible direction at every level from 2 on",),
        )
    scan = admissibility_scan(system, horizon=horizon)
    if scan.status != "certified":
        return Verdict(
            outcome=UNKNOWN,
            criterion="block-construction-sufficiency",
            certificate={"admissibility": scan.status},
            caveats=("box condition could not be certified",) + scan.caveats,
        )
    return Verdict(
        outcome=SPECTRAL,
        criterion="block-construction-sufficiency",
        certificate={"admissibility": scan.status},
        caveats=scan.caveats,
    )
