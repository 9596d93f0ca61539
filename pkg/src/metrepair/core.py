"""Finite metric-measure spaces, kernels, validation and triple scans.

A :class:`PointSpace` is a finite discretization of a probability space:
``n`` points carrying nonnegative masses that sum to one.  Zero masses
stand in for null sets.  A :class:`Kernel` is an ``n x n`` table of
nonnegative values (``+inf`` allowed) playing the role of a distance
function on that space.

The two scans in this module enumerate all ``n**3`` ordered triples.
Work is split by the middle index ``y``; every slice is computed by the
same code whatever the number of workers, and slices are combined in a
fixed order, so reports are bit-identical for any ``workers`` value.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

LAYOUTS = ("circle", "unordered")
KERNEL_TAGS = ("raw", "corrected", "generated")
MASS_SUM_ATOL = 1e-9
CIRCLE_MASS_RTOL = 1e-12


class MetricInputError(ValueError):
    """Structural problem with a kernel or a space."""


class NonFiniteKernelError(MetricInputError):
    """An operation that needs finite entries met ``+inf``."""


class SizeLimitError(ValueError):
    """An exhaustive search was asked to run above its size guard."""


def _frozen(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        raise MetricInputError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PointSpace:
    """Points with probability masses.

    ``layout="circle"`` means the points are consecutive cells of equal
    mass on the unit circle; window operators require it.  The
    constructor only checks shape and layout name; use :func:`validate`
    for the mass invariants.
    """

    masses: np.ndarray
    layout: str = "unordered"

    def __post_init__(self):
        object.__setattr__(self, "masses", _frozen(self.masses, 1))
        if self.layout not in LAYOUTS:
            raise MetricInputError(f"unknown layout {self.layout!r}")

    @property
    def n(self) -> int:
        return int(self.masses.shape[0])

    @classmethod
    def uniform(cls, n: int, layout: str = "unordered") -> "PointSpace":
        if n < 1:
            raise MetricInputError("a space needs at least one point")
        return cls(np.full(n, 1.0 / n), layout)

    @classmethod
    def circle(cls, n: int) -> "PointSpace":
        return cls.uniform(n, "circle")

    def positive(self) -> np.ndarray:
        """Indices of points with positive mass."""
        return np.flatnonzero(self.masses > 0)

    def mass_of(self, points: Iterable[int]) -> float:
        return math.fsum(float(self.masses[i]) for i in points)


@dataclass(frozen=True, eq=False)
class Kernel:
    """Square table of pairwise values in ``[0, +inf]``."""

    values: np.ndarray
    meta: str = "raw"

    def __post_init__(self):
        arr = _frozen(self.values, 2)
        if arr.shape[0] != arr.shape[1]:
            raise MetricInputError(f"kernel must be square, got shape {arr.shape}")
        object.__setattr__(self, "values", arr)
        if self.meta not in KERNEL_TAGS:
            raise MetricInputError(f"unknown provenance tag {self.meta!r}")

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())

    def max_finite(self) -> float:
        finite = self.values[np.isfinite(self.values)]
        return float(finite.max()) if finite.size else 0.0

    def with_values(self, values, meta: str | None = None) -> "Kernel":
        return Kernel(values, self.meta if meta is None else meta)


def default_tolerance(values) -> float:
    """Violation threshold separating float noise from genuine defects."""
    if isinstance(values, Kernel):
        values = values.values
    arr = np.asarray(values, dtype=np.float64)
    finite = arr[np.isfinite(arr)]
    scale = float(finite.max()) if finite.size else 0.0
    return 1e-12 + 1e-9 * scale


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Issue:
    kind: str
    message: str
    where: tuple = ()


@dataclass(frozen=True)
class Verdict:
    issues: tuple[Issue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues

    def kinds(self) -> list[str]:
        return [i.kind for i in self.issues]

    def raise_if_invalid(self) -> None:
        if self.issues:
            raise MetricInputError("; ".join(i.message for i in self.issues))

    def to_dict(self) -> dict:
        return {
            "valid": self.ok,
            "issues": [
                {"kind": i.kind, "message": i.message, "where": list(i.where)}
                for i in self.issues
            ],
        }


def _space_issues(space: PointSpace) -> list[Issue]:
    issues = []
    m = space.masses
    if not np.isfinite(m).all() or (m < 0).any():
        bad = int(np.argmax(~np.isfinite(m) | (m < 0)))
        issues.append(Issue("mass_sign", f"mass of point {bad} is {m[bad]!r}", (bad,)))
    else:
        total = math.fsum(m.tolist())
        if abs(total - 1.0) > MASS_SUM_ATOL:
            issues.append(Issue("normalization", f"masses sum to {total:.12g}, not 1", (total,)))
        if space.layout == "circle" and not np.allclose(m, 1.0 / space.n,
                                                        rtol=CIRCLE_MASS_RTOL, atol=0.0):
            issues.append(Issue("circle_masses", "circle layout needs equal masses 1/n"))
    return issues


def validate(kernel: Kernel, space: PointSpace) -> Verdict:
    """Check structural invariants of a kernel on a space.

    Triangle violations are not structural and are left to the scans.
    The asymmetry and negativity issues name the worst offending entry
    (lowest index on ties).
    """
    issues: list[Issue] = []
    if kernel.n != space.n:
        issues.append(
            Issue("dimension", f"kernel is {kernel.n}x{kernel.n} but space has {space.n} points",
                  (kernel.n, space.n))
        )
    v = kernel.values
    if np.isnan(v).any():
        i, j = np.argwhere(np.isnan(v))[0]
        issues.append(Issue("nan", f"NaN entry at ({i}, {j})", (int(i), int(j))))
    else:
        if np.isneginf(v).any():
            i, j = np.argwhere(np.isneginf(v))[0]
            issues.append(Issue("negative", f"entry ({i}, {j}) is -inf", (int(i), int(j))))
        with np.errstate(invalid="ignore"):
            diff = np.abs(v - v.T)
        both_inf = np.isinf(v) & np.isinf(v.T) & (v == v.T)
        diff = np.where(both_inf, 0.0, diff)
        diff = np.where(np.isnan(diff), np.inf, diff)
        upper = np.triu(diff, 1)
        if (upper > 0).any():
            i, j = np.unravel_index(int(np.argmax(upper)), upper.shape)
            issues.append(
                Issue("asymmetry",
                      f"asymmetric pair ({i}, {j}): {v[i, j]!r} != {v[j, i]!r}",
                      (int(i), int(j)))
            )
        neg = np.where(np.isfinite(v), v, 0.0)
        if (neg < 0).any():
            i, j = np.unravel_index(int(np.argmin(neg)), neg.shape)
            issues.append(Issue("negative", f"negative entry {v[i, j]!r} at ({i}, {j})",
                                (int(i), int(j))))

    issues.extend(_space_issues(space))
    return Verdict(tuple(issues))


def require_valid(kernel: Kernel, space: PointSpace) -> None:
    validate(kernel, space).raise_if_invalid()


def require_valid_space(space: PointSpace) -> None:
    Verdict(tuple(_space_issues(space))).raise_if_invalid()


def require_finite(kernel: Kernel, what: str = "this operation") -> None:
    if not kernel.is_finite:
        i, j = np.argwhere(~np.isfinite(kernel.values))[0]
        raise NonFiniteKernelError(
            f"{what} needs finite entries; entry ({i}, {j}) is infinite (patch first)"
        )


# --------------------------------------------------------------------------
# scans


@dataclass(frozen=True)
class ViolationReport:
    max_defect: float
    witness: tuple[int, int, int] | None
    violating_mass: float
    count_checked: int
    mode: str
    tolerance: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        return {
            "max_defect": self.max_defect,
            "witness": list(self.witness) if self.witness is not None else None,
            "violating_mass": self.violating_mass,
            "count_checked": self.count_checked,
            "mode": self.mode,
        }


def _triangle_slice(v: np.ndarray, y: int) -> np.ndarray:
    return (v - v[:, y][:, None]) - v[y, :][None, :]


def _ultra_slice(v: np.ndarray, y: int) -> np.ndarray:
    return v - np.maximum(v[:, y][:, None], v[y, :][None, :])


DEFECTS: dict[str, Callable[[np.ndarray, int], np.ndarray]] = {
    "triangle": _triangle_slice,
    "ultrametric": _ultra_slice,
}


def _triangle_defects(a, b, c):
    return (a - b) - c


def _ultra_defects(a, b, c):
    return a - np.maximum(b, c)


_TRIPLE_DEFECTS = {"triangle": _triangle_defects, "ultrametric": _ultra_defects}


def _scan_slice(v, m, y, tol, kind):
    d = DEFECTS[kind](v, y)
    k = int(np.argmax(d))
    x, z = divmod(k, v.shape[0])
    best = float(d[x, z])
    mask = d > tol
    if mask.any():
        inner = np.where(mask, m[None, :], 0.0).sum(axis=1)
        part = float(m[y]) * math.fsum((m * inner).tolist())
    else:
        part = 0.0
    return best, (x, y, z), part


def _merge(results) -> tuple[float, tuple[int, int, int] | None, float]:
    # partials ordered by y; key is (defect desc, triple lex asc)
    best, witness = -math.inf, None
    for d, triple, _ in results:
        if d > best or (d == best and triple < witness):
            best, witness = d, triple
    mass = math.fsum(p for _, _, p in results)
    return best, witness, mass


def _chunks(n: int, parts: int) -> list[range]:
    parts = max(1, min(parts, n))
    bounds = np.linspace(0, n, parts + 1).astype(int)
    return [range(bounds[i], bounds[i + 1]) for i in range(parts)]


def _scan(kernel, space, tolerance, mode, count, seed, workers, kind) -> ViolationReport:
    require_valid(kernel, space)
    require_finite(kernel, f"{kind} scan")
    v = kernel.values
    m = space.masses
    n = kernel.n
    tol = default_tolerance(v) if tolerance is None else float(tolerance)

    if mode == "sampled":
        if not count or count <= 0:
            raise ValueError("sampled scan needs a positive sample count")
        rng = np.random.default_rng(seed)
        p = m / m.sum()
        idx = rng.choice(n, size=(int(count), 3), p=p)
        x, y, z = idx[:, 0], idx[:, 1], idx[:, 2]
        d = _TRIPLE_DEFECTS[kind](v[x, z], v[x, y], v[y, z])
        best = float(d.max())
        ties = idx[d == best]
        order = np.lexsort((ties[:, 2], ties[:, 1], ties[:, 0]))
        witness = tuple(int(t) for t in ties[order[0]])
        frac = float(np.count_nonzero(d > tol)) / count
        if best <= 0:
            best, witness = 0.0, None
        return ViolationReport(best, witness, frac, int(count), "sampled", tol)
    if mode != "exact":
        raise ValueError(f"unknown scan mode {mode!r}")

    def run(ys):
        return [_scan_slice(v, m, y, tol, kind) for y in ys]

    if workers <= 1 or n < 2:
        results = run(range(n))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, _chunks(n, workers)))
        results = [r for part in parts for r in part]
    best, witness, mass = _merge(results)
    if best <= 0:
        best, witness = 0.0, None
    return ViolationReport(best, witness, mass, n**3, "exact", tol)


def triangle_defect_scan(
    kernel: Kernel,
    space: PointSpace,
    tolerance: float | None = None,
    mode: str = "exact",
    count: int | None = None,
    seed: int | None = None,
    workers: int = 1,
) -> ViolationReport:
    """Scan ordered triples for ``v[x,z] - v[x,y] - v[y,z] > tolerance``.

    In exact mode all ``n**3`` ordered triples are checked and
    ``violating_mass`` is the product mass of the violating ones.  In
    sampled mode ``count`` triples are drawn by product mass and
    ``violating_mass`` is the violating fraction.  The witness is the
    lexicographically smallest triple attaining ``max_defect``; it is
    ``None`` when no triple has a positive defect.
    """
    return _scan(kernel, space, tolerance, mode, count, seed, workers, "triangle")


def ultrametric_defect_scan(
    kernel: Kernel,
    space: PointSpace,
    tolerance: float | None = None,
    mode: str = "exact",
    count: int | None = None,
    seed: int | None = None,
    workers: int = 1,
) -> ViolationReport:
    """Same contract as :func:`triangle_defect_scan` with defect
    ``v[x,z] - max(v[x,y], v[y,z])``."""
    return _scan(kernel, space, tolerance, mode, count, seed, workers, "ultrametric")


def violating_pairs(kernel: Kernel, tolerance: float | None = None,
                    kind: str = "triangle") -> list[tuple[int, int]]:
    """Unordered pairs ``(x, z)``, ``x <= z``, that are the long side of
    at least one violating triple."""
    require_finite(kernel, "violating_pairs")
    v = kernel.values
    tol = default_tolerance(v) if tolerance is None else float(tolerance)
    hit = np.zeros(v.shape, dtype=bool)
    for y in range(kernel.n):
        hit |= DEFECTS[kind](v, y) > tol
    hit |= hit.T
    xs, zs = np.nonzero(np.triu(hit))
    return [(int(a), int(b)) for a, b in zip(xs, zs)]


def pair_mass(space: PointSpace, pairs: Sequence[tuple[int, int]]) -> float:
    """Product mass of the ordered pairs generated by unordered ``pairs``."""
    m = space.masses
    terms = []
    for a, b in pairs:
        w = float(m[a]) * float(m[b])
        terms.append(w if a == b else 2.0 * w)
    return math.fsum(terms)


def zero_diagonal(values: np.ndarray) -> np.ndarray:
    out = np.array(values, dtype=np.float64, copy=True)
    np.fill_diagonal(out, 0.0)
    return out


def symmetrize_upper(values: np.ndarray) -> np.ndarray:
    """Mirror the upper triangle so the result is exactly symmetric."""
    upper = np.triu(values)
    return upper + np.triu(values, 1).T
