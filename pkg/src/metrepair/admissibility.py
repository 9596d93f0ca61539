"""Epsilon-entropy, ball-mass profiles and the three-way admissibility check.

A kernel on a finite space is admissible in three equivalent ways:

1. for every ``eps`` finitely many ``eps``-balls cover mass ``>= 1 - eps``;
2. a full-mass set is separable (covered by balls at every scale);
3. almost every point has only positive-mass balls around it.

In a finite model all three hold automatically for a semimetric; the
checks below are still useful as consistency audits, and they tell
apart kernels with a nonzero diagonal or planted zero-mass outliers.
Balls are closed: ``B(c, r) = {y : K[c, y] <= r}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _cover
from .core import Kernel, NonFiniteKernelError, PointSpace, SizeLimitError, require_valid
from .correction import SupportResult, separable_support

CORE_ATOL = 1e-9


@dataclass(frozen=True)
class EntropyReport:
    epsilon: float
    count: int
    centers: tuple[int, ...]
    covered_mass: float
    method: str
    deficit: float | None = None
    reached: bool = True

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "deficit": self.epsilon if self.deficit is None else self.deficit,
            "count": self.count,
            "centers": list(self.centers),
            "covered_mass": self.covered_mass,
            "method": self.method,
            "reached": self.reached,
        }


def _finite(kernel: Kernel, space: PointSpace) -> np.ndarray:
    require_valid(kernel, space)
    if not kernel.is_finite:
        raise NonFiniteKernelError("entropy and ball computations need a finite kernel")
    return kernel.values


def ball(kernel: Kernel, center: int, r: float) -> list[int]:
    row = kernel.values[center]
    if not np.isfinite(row).all():
        raise NonFiniteKernelError(f"row {center} has infinite entries")
    return [int(i) for i in np.flatnonzero(row <= r)]


def epsilon_entropy_greedy(kernel: Kernel, space: PointSpace, epsilon: float,
                           deficit: float | None = None) -> EntropyReport:
    """Greedy max-coverage count of ``epsilon``-balls reaching mass ``1 - deficit``.

    ``deficit`` defaults to ``epsilon``.  Any point may be a center; the
    ball adding most uncovered mass wins, lowest index on ties.
    """
    v = _finite(kernel, space)
    d = epsilon if deficit is None else deficit
    target = 1.0 - d
    table = _cover.ball_table(v, epsilon)
    centers, covered = _cover.greedy_cover(table, space.masses, target)
    mass = _cover.covered_mass(space.masses, covered)
    return EntropyReport(float(epsilon), len(centers), tuple(centers), mass, "greedy",
                         deficit, mass >= target - _cover.COVER_SLACK)


class _BitMass:
    """Mass of a bitmask over positive-mass points via 8-bit lookup tables."""

    def __init__(self, masses: list[float]):
        self.tables = []
        for start in range(0, len(masses), 8):
            chunk = masses[start:start + 8]
            table = [0.0] * 256
            for b in range(1, 256):
                low = (b & -b).bit_length() - 1
                table[b] = table[b & (b - 1)] + (chunk[low] if low < len(chunk) else 0.0)
            self.tables.append(table)
        self.masses = masses

    def approx(self, mask: int) -> float:
        total = 0.0
        for table in self.tables:
            if not mask:
                break
            total += table[mask & 0xFF]
            mask >>= 8
        return total

    def exact(self, mask: int) -> float:
        terms = []
        i = 0
        while mask:
            if mask & 1:
                terms.append(self.masses[i])
            mask >>= 1
            i += 1
        return math.fsum(terms)


def epsilon_entropy_exact(kernel: Kernel, space: PointSpace, epsilon: float,
                          deficit: float | None = None, size_limit: int = 16) -> EntropyReport:
    """Minimum number of ``epsilon``-balls covering mass ``1 - deficit``.

    Depth-first search by increasing cardinality with a mass bound
    (current mass plus the best remaining gains); balls contained in
    another ball are discarded first.  Raises :class:`SizeLimitError`
    when ``n > size_limit``.
    """
    if kernel.n > size_limit:
        raise SizeLimitError(f"exact entropy limited to n <= {size_limit}, got n={kernel.n}")
    v = _finite(kernel, space)
    d = epsilon if deficit is None else deficit
    target = 1.0 - d
    greedy = epsilon_entropy_greedy(kernel, space, epsilon, deficit)

    pos = space.positive()
    bit = {int(p): k for k, p in enumerate(pos)}
    bm = _BitMass([float(space.masses[p]) for p in pos])
    table = _cover.ball_table(v, epsilon)

    def need(mass: float) -> bool:
        return mass < target - _cover.COVER_SLACK

    masks: dict[int, int] = {}
    for c in range(kernel.n):
        mask = 0
        for y in np.flatnonzero(table[c]):
            if int(y) in bit:
                mask |= 1 << bit[int(y)]
        if mask and mask not in masks:
            masks[mask] = c
    items = sorted((c, mask) for mask, c in masks.items())
    kept = [(c, m) for c, m in items
            if not any(o != m and (m | o) == o for _, o in items)]

    if not need(0.0):
        return EntropyReport(float(epsilon), 0, (), 0.0, "exact", deficit, True)
    if not greedy.reached:
        return EntropyReport(float(epsilon), greedy.count, greedy.centers, greedy.covered_mass,
                             "exact", deficit, False)

    sizes = sorted((bm.approx(m) for _, m in kept), reverse=True)
    lower = 1
    while lower < greedy.count and sum(sizes[:lower]) < target - 1e-9:
        lower += 1

    def search(k, start, chosen, covered):
        mass = bm.exact(covered)
        if not need(mass):
            return list(chosen)
        left = k - len(chosen)
        if left == 0:
            return None
        gains = [(bm.approx(m & ~covered), i) for i, (_, m) in enumerate(kept[start:], start)]
        best = sorted((g for g, _ in gains), reverse=True)[:left]
        if mass + sum(best) < target - 1e-9:
            return None
        for g, i in gains:
            if g <= 0:
                continue
            chosen.append(i)
            found = search(k, i + 1, chosen, covered | kept[i][1])
            chosen.pop()
            if found is not None:
                return found
        return None

    for k in range(lower, greedy.count):
        found = search(k, 0, [], 0)
        if found is not None:
            centers = tuple(kept[i][0] for i in found)
            covered = np.zeros(kernel.n, dtype=bool)
            for c in centers:
                covered |= table[c]
            mass = _cover.covered_mass(space.masses, covered)
            return EntropyReport(float(epsilon), len(centers), centers, mass, "exact",
                                 deficit, True)
    return EntropyReport(float(epsilon), greedy.count, greedy.centers, greedy.covered_mass,
                         "exact", deficit, True)


@dataclass(frozen=True)
class BallMassProfile:
    radii: tuple[float, ...]
    table: np.ndarray
    flagged: tuple[int, ...]
    null_points: tuple[int, ...] = field(default=())

    def to_rows(self) -> list[tuple[int, float, float]]:
        return [(int(x), r, float(self.table[x, j]))
                for x in range(self.table.shape[0]) for j, r in enumerate(self.radii)]

    def to_csv(self) -> str:
        lines = ["point,radius,mass"]
        lines += [f"{x},{r!r},{m!r}" for x, r, m in self.to_rows()]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "radii": list(self.radii),
            "flagged": list(self.flagged),
            "null_points": list(self.null_points),
        }


def ball_mass_profile(kernel: Kernel, space: PointSpace, radii) -> BallMassProfile:
    """``table[x, j] = mass(B(x, radii[j]))``.

    ``flagged`` lists positive-mass points with a zero-mass ball at some
    radius, which can only happen off a zero diagonal.  ``null_points``
    lists zero-mass points in the same situation.
    """
    radii = tuple(float(r) for r in radii)
    if list(radii) != sorted(radii):
        raise ValueError("radii must be sorted ascending")
    v = _finite(kernel, space)
    m = space.masses
    table = np.empty((kernel.n, len(radii)))
    for j, r in enumerate(radii):
        table[:, j] = np.where(v <= r, m[None, :], 0.0).sum(axis=1)
    empty = (table <= 0).any(axis=1) if radii else np.zeros(kernel.n, dtype=bool)
    flagged = tuple(int(x) for x in np.flatnonzero(empty & (m > 0)))
    null = tuple(int(x) for x in np.flatnonzero(empty & (m == 0)))
    return BallMassProfile(radii, table, flagged, null)


@dataclass(frozen=True)
class CrossCheckReport:
    statements: dict
    core_mass: dict
    entropy: tuple[EntropyReport, ...]
    support: SupportResult
    profile: BallMassProfile
    discrepancies: tuple[str, ...]

    @property
    def consistent(self) -> bool:
        return not self.discrepancies

    @property
    def passed(self) -> bool:
        return self.consistent and all(self.statements.values())

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "consistent": self.consistent,
            "statements": dict(self.statements),
            "core_mass": dict(self.core_mass),
            "discrepancies": list(self.discrepancies),
            "entropy": [e.to_dict() for e in self.entropy],
            "support": {"points": list(self.support.points), "mass": self.support.mass},
            "profile": self.profile.to_dict(),
        }


def lemma1_crosscheck(kernel: Kernel, space: PointSpace, epsilon_ladder) -> CrossCheckReport:
    """Run the three admissibility criteria side by side.

    Statement truth values: (1) every greedy cover reaches ``1 - eps``;
    (2) the separable support has full positive mass; (3) no positive-mass
    point is flagged by the ball profile.  Each criterion also yields a
    core mass: the mass coverable at every scale, the support mass, and
    the positive mass minus flagged mass.  The report is consistent when
    the three statements agree and the cores match within 1e-9.
    """
    eps = sorted(float(e) for e in epsilon_ladder)
    if not eps:
        raise ValueError("epsilon ladder is empty")
    v = _finite(kernel, space)
    m = space.masses
    positive_mass = math.fsum(m[m > 0].tolist())

    entropy = tuple(epsilon_entropy_greedy(kernel, space, e) for e in eps)
    coverable = np.ones(kernel.n, dtype=bool)
    for e in eps:
        table = _cover.ball_table(v, e)
        _, covered = _cover.greedy_cover(table, m, math.inf)
        coverable &= covered
    core1 = math.fsum(m[coverable & (m > 0)].tolist())

    support = separable_support(kernel, space, eps)
    profile = ball_mass_profile(kernel, space, eps)
    flagged_mass = space.mass_of(profile.flagged)
    core3 = positive_mass - flagged_mass

    statements = {
        "entropy_finite": all(r.reached for r in entropy),
        "separable_full_mass": support.mass >= positive_mass - CORE_ATOL,
        "balls_positive": not profile.flagged,
    }
    cores = {"entropy": core1, "support": support.mass, "profile": core3}
    problems = []
    if len(set(statements.values())) > 1:
        held = [k for k, ok in statements.items() if ok]
        failed = [k for k, ok in statements.items() if not ok]
        problems.append(f"statements disagree: {held} hold but {failed} fail")
    names = list(cores)
    for a, b in zip(names, names[1:] + names[:1]):
        if abs(cores[a] - cores[b]) > CORE_ATOL:
            problems.append(f"core mass {a}={cores[a]:.12g} differs from {b}={cores[b]:.12g}")
    return CrossCheckReport(statements, cores, entropy, support, profile, tuple(problems))
