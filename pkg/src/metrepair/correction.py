"""Turning an almost-metric on a discretized circle into a semimetric.

Pipeline pieces, usable separately:

* :func:`renormalize_measure` reweights the space so the distance to a
  base point becomes integrable.
* :func:`window_average` is the forward-anchored cyclic box average
  ``(1/w**2) * sum_{t,s < w} K[x+t, y+s]``.
* :func:`limsup_correct` combines averages over a dyadic ladder of
  windows (a finite stand-in for an upper limit as the window shrinks)
  and zeroes the diagonal.
* :func:`patch_from_basepoint` rewrites everything outside a good set
  ``S1`` by collapsing the complement onto a base point.
* :func:`separable_support` extracts the points covered at every scale
  of an epsilon ladder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _cover
from .core import (
    Kernel,
    MetricInputError,
    NonFiniteKernelError,
    PointSpace,
    default_tolerance,
    require_valid,
    require_valid_space,
    symmetrize_upper,
    triangle_defect_scan,
    zero_diagonal,
)

TAIL_MODES = ("finest", "max_over_tail")


class WindowError(MetricInputError):
    pass


@dataclass(frozen=True)
class CorrectionParams:
    """Window ladder and combination rule for :func:`limsup_correct`.

    ``ladder`` lists windows in increasing order, each twice the previous.
    ``tail_mode="finest"`` keeps the smallest window only;
    ``"max_over_tail"`` takes the entrywise maximum over the
    ``tail_length`` smallest windows (default: two, or one for a
    single-window ladder).
    """

    ladder: tuple[int, ...] = (1,)
    tail_mode: str = "max_over_tail"
    tail_length: int | None = None
    tolerance: float | None = None
    base_point: int | None = None

    def __post_init__(self):
        ladder = tuple(int(w) for w in self.ladder)
        object.__setattr__(self, "ladder", ladder)
        if not ladder:
            raise ValueError("window ladder is empty")
        if ladder[0] < 1:
            raise ValueError("windows must be >= 1")
        for a, b in zip(ladder, ladder[1:]):
            if b != 2 * a:
                raise ValueError(f"ladder must be dyadic, got {a} followed by {b}")
        if self.tail_mode not in TAIL_MODES:
            raise ValueError(f"unknown tail mode {self.tail_mode!r}")
        L = self.effective_tail
        if not 1 <= L <= len(ladder):
            raise ValueError(f"tail length {L} outside 1..{len(ladder)}")

    @classmethod
    def dyadic(cls, w_min: int, w_max: int, **kw) -> "CorrectionParams":
        ladder = [w_min]
        while ladder[-1] < w_max:
            ladder.append(ladder[-1] * 2)
        if ladder[-1] != w_max:
            raise ValueError(f"{w_max} is not {w_min} times a power of two")
        return cls(tuple(ladder), **kw)

    @property
    def window(self) -> int:
        return self.ladder[0]

    @property
    def effective_tail(self) -> int:
        if self.tail_mode == "finest":
            return 1
        if self.tail_length is None:
            return min(2, len(self.ladder))
        return int(self.tail_length)

    def check(self, n: int) -> None:
        if self.ladder[-1] > n:
            raise ValueError(f"largest window {self.ladder[-1]} exceeds n={n}")
        for w in self.ladder:
            if n % w:
                raise ValueError(f"window {w} does not divide n={n}")

    def to_dict(self) -> dict:
        return {
            "ladder": list(self.ladder),
            "tail_mode": self.tail_mode,
            "tail_length": self.effective_tail,
            "tolerance": self.tolerance,
            "base_point": self.base_point,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CorrectionParams":
        keys = ("ladder", "tail_mode", "tail_length", "tolerance", "base_point")
        return cls(**{k: d[k] for k in keys if k in d})


@dataclass(frozen=True)
class PatchSpec:
    s1: tuple[int, ...]
    x0: int

    def __post_init__(self):
        object.__setattr__(self, "s1", tuple(sorted({int(i) for i in self.s1})))
        if int(self.x0) not in self.s1:
            raise ValueError(f"base point {self.x0} is not in S1")


@dataclass(frozen=True)
class Renormalized:
    space: PointSpace
    buckets: np.ndarray
    infinite_points: tuple[int, ...] = field(default=())


def renormalize_measure(space: PointSpace, kernel: Kernel, x0: int) -> Renormalized:
    """Reweight by ``2**-k`` on the bucket ``f in [k-1, k)``, ``f = kernel[x0]``.

    Points with ``f = inf`` get mass zero and are listed in
    ``infinite_points``.  Weights are shifted by the smallest occupied
    bucket before exponentiating, which the final normalization cancels.
    """
    if not 0 <= x0 < kernel.n:
        raise IndexError(f"base point {x0} out of range for n={kernel.n}")
    if kernel.n != space.n:
        raise MetricInputError("kernel and space sizes differ")
    f = kernel.values[x0]
    finite = np.isfinite(f)
    buckets = np.zeros(kernel.n, dtype=np.int64)
    buckets[finite] = np.floor(np.minimum(f[finite], 2.0**52)).astype(np.int64) + 1
    live = finite & (space.masses > 0)
    if not live.any():
        raise ValueError("every finite-distance point has zero mass; cannot normalize")
    shift = buckets[live].min()
    weights = np.zeros(kernel.n)
    weights[finite] = np.ldexp(space.masses[finite], -(buckets[finite] - shift).astype(int))
    masses = weights / math.fsum(weights.tolist())
    inf_points = tuple(int(i) for i in np.flatnonzero(~finite))
    return Renormalized(PointSpace(masses, "unordered"), buckets, inf_points)


def _require_circle(space: PointSpace, n: int) -> None:
    if space.n != n:
        raise MetricInputError(f"kernel is {n}x{n} but space has {space.n} points")
    if space.layout != "circle":
        raise MetricInputError("window operators need a circle layout with equal masses")
    require_valid_space(space)


def cyclic_window_sum(values: np.ndarray, w: int) -> np.ndarray:
    """``out[x, y] = sum_{t,s < w} values[(x+t) % n, (y+s) % n]``, rows first."""
    rows = np.array(values, dtype=np.float64, copy=True)
    for t in range(1, w):
        rows += np.roll(values, -t, axis=0)
    out = rows.copy()
    for s in range(1, w):
        out += np.roll(rows, -s, axis=1)
    return out


def cyclic_window_max(values: np.ndarray, w: int) -> np.ndarray:
    rows = np.array(values, dtype=np.float64, copy=True)
    for t in range(1, w):
        np.maximum(rows, np.roll(values, -t, axis=0), out=rows)
    out = rows.copy()
    for s in range(1, w):
        np.maximum(out, np.roll(rows, -s, axis=1), out=out)
    return out


def _check_window(n: int, w: int) -> None:
    if w < 1 or w > n:
        raise WindowError(f"window {w} outside 1..{n}")
    if n % w:
        raise WindowError(f"window {w} does not divide n={n}")


def _require_finite_windows(values: np.ndarray, w: int) -> None:
    bad = ~np.isfinite(values)
    if bad.any():
        counts = cyclic_window_sum(bad.astype(np.float64), w)
        x, y = np.unravel_index(int(np.argmax(counts > 0)), counts.shape)
        raise NonFiniteKernelError(f"window anchored at ({x}, {y}) with width {w} contains +inf")


def window_average(kernel: Kernel, space: PointSpace, w: int) -> Kernel:
    """Forward-anchored cyclic ``w x w`` box average of the kernel.

    The upper triangle is computed and mirrored, so the output is exactly
    symmetric when the input is.  The diagonal is left as averaged.
    """
    n = kernel.n
    _require_circle(space, n)
    _check_window(n, w)
    _require_finite_windows(kernel.values, w)
    out = cyclic_window_sum(kernel.values, w) / float(w * w)
    return Kernel(symmetrize_upper(out), "corrected")


def limsup_correct(kernel: Kernel, space: PointSpace, params: CorrectionParams) -> Kernel:
    """Combine window averages over the ladder tail, then zero the diagonal."""
    params.check(kernel.n)
    tail = params.ladder[: params.effective_tail]
    out = None
    for w in tail:
        avg = window_average(kernel, space, w).values
        out = avg if out is None else np.maximum(out, avg)
    return Kernel(zero_diagonal(out), "corrected")


def patch_from_basepoint(kernel: Kernel, patch: PatchSpec,
                         tolerance: float | None = None) -> Kernel:
    """Collapse every point outside ``patch.s1`` onto ``patch.x0``.

    ``out[x, y] = kernel[p(x), p(y)]`` where ``p`` is the identity on S1
    and sends the rest to ``x0``; pairs outside S1 x S1 therefore read
    row ``x0`` and the complement is at distance 0 from itself.  Fails
    when ``kernel`` restricted to S1 is not finite or not a semimetric
    within ``tolerance``.
    """
    n = kernel.n
    s1 = np.array(patch.s1, dtype=int)
    if s1.size and (s1.min() < 0 or s1.max() >= n):
        raise IndexError(f"S1 indices out of range for n={n}")
    x0 = int(patch.x0)
    sub = kernel.values[np.ix_(s1, s1)]
    row = kernel.values[x0, s1]
    if not np.isfinite(row).all():
        j = int(s1[np.argmax(~np.isfinite(row))])
        raise NonFiniteKernelError(f"row of base point {x0} is infinite at {j}")
    if not np.isfinite(sub).all():
        a, b = np.argwhere(~np.isfinite(sub))[0]
        raise NonFiniteKernelError(f"entry ({s1[a]}, {s1[b]}) inside S1 is infinite")
    sub_kernel = Kernel(zero_diagonal(sub))
    tol = default_tolerance(sub) if tolerance is None else tolerance
    report = triangle_defect_scan(sub_kernel, PointSpace.uniform(len(s1)), tolerance=tol)
    if report.max_defect > tol:
        x, y, z = (int(s1[i]) for i in report.witness)
        raise ValueError(
            f"kernel on S1 violates the triangle inequality: defect {report.max_defect:.3g} "
            f"at ({x}, {y}, {z})"
        )
    inside = np.zeros(n, dtype=bool)
    inside[s1] = True
    proj = np.where(inside, np.arange(n), x0)
    out = kernel.values[np.ix_(proj, proj)].copy()
    out[np.ix_(~inside, ~inside)] = 0.0
    return Kernel(zero_diagonal(out), "corrected")


@dataclass(frozen=True)
class BallCover:
    epsilon: float
    balls: tuple[tuple[int, tuple[int, ...]], ...]

    @property
    def centers(self) -> list[int]:
        return [c for c, _ in self.balls]

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "balls": [{"center": c, "covered": list(pts)} for c, pts in self.balls],
        }


@dataclass(frozen=True)
class SupportResult:
    points: tuple[int, ...]
    mass: float
    covers: tuple[BallCover, ...]
    dropped: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "points": list(self.points),
            "mass": self.mass,
            "dropped": list(self.dropped),
            "covers": [c.to_dict() for c in self.covers],
        }


def separable_support(kernel: Kernel, space: PointSpace, epsilon_ladder) -> SupportResult:
    """Greedy closed-ball covers of the positive mass, one per epsilon.

    Centers are positive-mass points picked by largest uncovered mass.
    The support is the set of points covered at every scale, minus the
    points having a zero-mass ball at some scale of the ladder.
    """
    eps = [float(e) for e in epsilon_ladder]
    if not eps:
        raise ValueError("epsilon ladder is empty")
    require_valid(kernel, space)
    if not kernel.is_finite:
        raise NonFiniteKernelError("separable_support needs a finite kernel")
    v = kernel.values
    m = space.masses
    cand = space.positive()
    keep = np.ones(kernel.n, dtype=bool)
    covers = []
    for e in eps:
        table = _cover.ball_table(v, e)
        centers, covered = _cover.greedy_cover(table, m, math.inf, cand)
        balls = tuple((c, tuple(int(i) for i in np.flatnonzero(table[c]))) for c in centers)
        covers.append(BallCover(e, balls))
        ball_mass = np.where(table, m[None, :], 0.0).sum(axis=1)
        keep &= covered & (ball_mass > 0)
    points = tuple(int(i) for i in np.flatnonzero(keep))
    dropped = tuple(int(i) for i in np.flatnonzero(~keep))
    return SupportResult(points, space.mass_of(points), tuple(covers), dropped)
