"""Extract a large set on which two almost-equal kernels agree exactly.

Two kernels that differ only on a sparse set of pairs induce a
disagreement graph on the positive-mass points.  Removing a vertex cover
of that graph leaves a set ``X'`` with ``k1 == k2`` on ``X' x X'``; the
cover is chosen to lose as little mass as possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Kernel, MetricInputError, PointSpace, SizeLimitError, default_tolerance

METHODS = ("greedy_cover", "exact_cover")


def _tolerance(k1: Kernel, k2: Kernel, tolerance: float | None) -> float:
    if tolerance is not None:
        return float(tolerance)
    return max(default_tolerance(k1), default_tolerance(k2))


def _check_pair(k1: Kernel, k2: Kernel, space: PointSpace) -> None:
    if k1.n != k2.n or k1.n != space.n:
        raise MetricInputError(f"dimension mismatch: {k1.n}, {k2.n}, space {space.n}")
    if not (k1.is_finite and k2.is_finite):
        raise MetricInputError("disagreement graph needs finite kernels")


def disagreement_graph(k1: Kernel, k2: Kernel, space: PointSpace,
                       tolerance: float | None = None) -> list[tuple[int, int]]:
    """Edges ``(x, y)``, ``x < y``, both of positive mass, with
    ``|k1 - k2| > tolerance``; sorted lexicographically."""
    _check_pair(k1, k2, space)
    tol = _tolerance(k1, k2, tolerance)
    bad = np.abs(k1.values - k2.values) > tol
    pos = space.masses > 0
    bad &= pos[:, None] & pos[None, :]
    xs, ys = np.nonzero(np.triu(bad | bad.T, 1))
    return [(int(a), int(b)) for a, b in zip(xs, ys)]


@dataclass(frozen=True)
class CoincidenceResult:
    retained: tuple[int, ...]
    retained_mass: float
    removed: dict = field(default_factory=dict)
    method: str = "greedy_cover"

    def to_dict(self) -> dict:
        return {
            "retained": list(self.retained),
            "retained_mass": self.retained_mass,
            "removed": {str(k): v for k, v in sorted(self.removed.items())},
            "method": self.method,
        }


def _adjacency(edges) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {}
    for a, b in edges:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    return adj


def _incident_mass(adj, m, v) -> float:
    return math.fsum(float(m[u]) for u in adj.get(v, ()))


def _greedy_cover(adj, m) -> list[int]:
    adj = {v: set(nb) for v, nb in adj.items()}
    removed = []
    while any(adj.values()):
        live = [v for v, nb in adj.items() if nb]
        v = min(live, key=lambda u: (-_incident_mass(adj, m, u), -len(adj[u]), u))
        removed.append(v)
        for u in adj.pop(v):
            adj[u].discard(v)
    return removed


def _exact_cover(adj, m) -> list[int]:
    """Minimum-mass vertex cover by branching on a max-degree vertex:
    either it is in the cover or all its neighbours are."""
    best_cost = [math.inf]
    best: list[list[int]] = [[]]

    def drop(adj, vs):
        vs = set(vs)
        return {v: nb - vs for v, nb in adj.items() if v not in vs}

    def rec(adj, chosen, cost):
        if cost >= best_cost[0]:
            return
        live = [v for v, nb in adj.items() if nb]
        if not live:
            best_cost[0], best[0] = cost, sorted(chosen)
            return
        v = min(live, key=lambda u: (-len(adj[u]), u))
        rec(drop(adj, [v]), chosen + [v], math.fsum([cost, float(m[v])]))
        nbs = sorted(adj[v])
        rec(drop(adj, nbs), chosen + nbs, math.fsum([cost] + [float(m[u]) for u in nbs]))

    rec(adj, [], 0.0)
    return best[0]


def coincidence_support(k1: Kernel, k2: Kernel, space: PointSpace,
                        tolerance: float | None = None, method: str = "greedy_cover",
                        size_limit: int = 20) -> CoincidenceResult:
    """Remove a vertex cover of the disagreement graph, keep the rest.

    ``greedy_cover`` repeatedly removes the vertex whose disagreeing
    partners carry the most mass (then the most partners, then the lowest
    index).  ``exact_cover`` finds a minimum-mass cover by branch and
    bound and refuses ``n > size_limit``.  ``removed`` maps each removed
    point to the mass of its disagreeing partners in the original graph.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if method == "exact_cover" and k1.n > size_limit:
        raise SizeLimitError(f"exact cover limited to n <= {size_limit}, got n={k1.n}")
    edges = disagreement_graph(k1, k2, space, tolerance)
    adj = _adjacency(edges)
    m = space.masses
    cover = _exact_cover(adj, m) if method == "exact_cover" else _greedy_cover(adj, m)
    gone = set(cover)
    retained = tuple(int(i) for i in space.positive() if int(i) not in gone)
    removed = {int(v): _incident_mass(adj, m, v) for v in sorted(gone)}
    return CoincidenceResult(retained, space.mass_of(retained), removed, method)


@dataclass(frozen=True)
class TransferReport:
    radius: float
    pairs_checked: int
    verified: int
    no_witness: tuple[tuple[int, int], ...]
    failures: tuple[dict, ...]

    @property
    def ok(self) -> bool:
        return not self.failures and not self.no_witness

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "pairs_checked": self.pairs_checked,
            "verified": self.verified,
            "no_witness": [list(p) for p in self.no_witness],
            "failures": list(self.failures),
            "ok": self.ok,
        }


def transfer_inequality_check(k1: Kernel, k2: Kernel, space: PointSpace, retained,
                              r: float, trials: int = 1000, seed: int | None = 0,
                              tolerance: float | None = None) -> TransferReport:
    """Check ``k2[x1,x2] <= k2[x1,y] + k2[y,x2] = k1[x1,y] + k1[y,x2] <= 2r + k1[x1,x2]``.

    Pairs ``(x1, x2)`` are drawn from ``retained`` by mass.  Every
    positive-mass ``y`` with ``k1[x1, y] < r`` at which both rows agree
    serves as a witness, and each link of the chain is checked for each
    witness.  Failures name the link: ``"triangle_k2"``, ``"agreement"``
    or ``"radius_k1"``.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    _check_pair(k1, k2, space)
    tol = _tolerance(k1, k2, tolerance)
    a, b = k1.values, k2.values
    ret = np.array(sorted(set(int(i) for i in retained)), dtype=int)
    if ret.size == 0:
        return TransferReport(float(r), 0, 0, (), ())
    w = space.masses[ret]
    if w.sum() <= 0:
        raise ValueError("retained set has zero mass")
    rng = np.random.default_rng(seed)
    draws = ret[rng.choice(ret.size, size=(trials, 2), p=w / w.sum())]
    agree = np.abs(a - b) <= tol
    pos = space.masses > 0
    no_witness, failures = [], []
    verified = 0
    for x1, x2 in draws:
        x1, x2 = int(x1), int(x2)
        ys = np.flatnonzero(pos & (a[x1] < r) & agree[x1] & agree[x2])
        if ys.size == 0:
            no_witness.append((x1, x2))
            continue
        lhs = b[x1, x2]
        mid2 = b[x1, ys] + b[ys, x2]
        mid1 = a[x1, ys] + a[ys, x2]
        bound = 2 * r + a[x1, x2]
        ok = True
        for step, bad in (("triangle_k2", lhs > mid2 + tol),
                          ("agreement", np.abs(mid2 - mid1) > 2 * tol),
                          ("radius_k1", mid1 > bound + tol)):
            if bad.any():
                j = int(np.argmax(bad))
                failures.append({"pair": [x1, x2], "witness": int(ys[j]), "step": step})
                ok = False
        verified += ok
    return TransferReport(float(r), int(trials), verified, tuple(no_witness), tuple(failures))
