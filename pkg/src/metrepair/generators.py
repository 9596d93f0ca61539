"""Ground-truth instances with controlled corruption.

Families (all on ``n`` equal-mass cells, circle layout):

``circle``
    arc distance between cell centers, ``min(|i-j|, n-|i-j|) / n``.
``embedding``
    Euclidean distances of ``n`` seeded points in the unit cube.
``dyadic_ultrametric``
    ``2**-(common binary prefix length)`` of the cell indices; with
    ``block > 1`` cells in the same aligned block are at distance 0.
``dendrogram``
    cophenetic heights of an average-linkage tree over seeded points.
``constant``
    every off-diagonal entry equals ``constant``.

Randomness comes from ``numpy.random.default_rng(seed)`` (PCG64); the
generator identifier is recorded in every manifest.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.cluster.hierarchy import cophenet, linkage
from scipy.spatial.distance import pdist, squareform

from .core import (
    Kernel,
    PointSpace,
    pair_mass,
    violating_pairs,
)

GENERATOR_ID = "metrepair.generators/1 numpy-PCG64"
FAMILIES = ("circle", "embedding", "dyadic_ultrametric", "dendrogram", "constant")
ULTRAMETRIC_FAMILIES = ("dyadic_ultrametric", "dendrogram", "constant")


@dataclass(frozen=True)
class Corruption:
    """``rows``: overwrite rows/columns ``indices``; ``cells``: overwrite the
    symmetric pairs ``pairs``; ``scaled_noise``: overwrite a seeded
    ``fraction`` of off-diagonal pairs with ``magnitude * max * (1 + u)``.

    ``value=None`` means three times the largest clean entry.
    """

    kind: str
    indices: tuple[int, ...] = ()
    pairs: tuple[tuple[int, int], ...] = ()
    value: float | None = None
    fraction: float = 0.0
    magnitude: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("rows", "cells", "scaled_noise"):
            raise ValueError(f"unknown corruption kind {self.kind!r}")
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        object.__setattr__(self, "pairs", tuple((int(a), int(b)) for a, b in self.pairs))


@dataclass(frozen=True)
class InstanceSpec:
    family: str
    n: int
    dim: int = 2
    block: int = 1
    constant: float = 1.0
    corruption: Corruption | None = None
    outliers: int = 0
    outlier_distance: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.family == "dyadic_ultrametric":
            if self.n & (self.n - 1):
                raise ValueError("dyadic ultrametric needs n a power of two")
            if self.block < 1 or self.block & (self.block - 1) or self.n % self.block:
                raise ValueError("block must be a power of two dividing n")


@dataclass(frozen=True)
class Instance:
    space: PointSpace
    kernel: Kernel
    clean: Kernel
    manifest: dict = field(default_factory=dict)


def circle_distances(n: int) -> np.ndarray:
    i = np.arange(n)
    gap = np.abs(i[:, None] - i[None, :])
    return np.minimum(gap, n - gap) / n


def dyadic_distances(n: int, block: int = 1) -> np.ndarray:
    bits = int(round(math.log2(n))) if n > 1 else 0
    i = np.arange(n)
    x = i[:, None] ^ i[None, :]
    # common prefix length over `bits` bits = bits - bit_length(x)
    length = np.zeros_like(x)
    nz = x > 0
    length[nz] = np.floor(np.log2(x[nz])).astype(int) + 1
    out = np.ldexp(1.0, -(bits - length))
    out[x == 0] = 0.0
    if block > 1:
        same = (i[:, None] // block) == (i[None, :] // block)
        out[same] = 0.0
    return out


def _clean_values(spec: InstanceSpec, seed: int) -> np.ndarray:
    n = spec.n
    if spec.family == "circle":
        return circle_distances(n)
    if spec.family == "dyadic_ultrametric":
        return dyadic_distances(n, spec.block)
    if spec.family == "constant":
        out = np.full((n, n), float(spec.constant))
        np.fill_diagonal(out, 0.0)
        return out
    rng = np.random.default_rng(seed)
    if spec.family == "embedding":
        return squareform(pdist(rng.random((n, spec.dim))))
    # dendrogram
    if n == 1:
        return np.zeros((1, 1))
    return squareform(cophenet(linkage(rng.random((n, 2)), method="average")))


def _corrupt(values: np.ndarray, c: Corruption) -> tuple[np.ndarray, list[tuple[int, int]]]:
    n = values.shape[0]
    out = values.copy()
    top = float(values.max()) if values.size else 0.0
    value = 3.0 * top if c.value is None else float(c.value)
    touched: set[tuple[int, int]] = set()
    if c.kind == "rows":
        for i in c.indices:
            if not 0 <= i < n:
                raise IndexError(f"corrupted row {i} out of range for n={n}")
        for i in c.indices:
            # a constant overwrite is a valid metric extension; alternating
            # value and value/2 makes the row break the triangle inequality
            # whenever value/2 exceeds the clean diameter
            j = np.arange(n)
            row = np.where((np.abs(j - i) % 2) == 0, value, value / 2)
            out[i, :] = row
            out[:, i] = row
        for i in c.indices:
            out[i, i] = 0.0
        # the overwritten region is the whole row and column, diagonal cell included
        for i in c.indices:
            for j in range(n):
                touched.add((min(i, j), max(i, j)))
        if value / 2 <= top and n > 2:
            warnings.warn("row corruption value is too small to guarantee violations")
    elif c.kind == "cells":
        for a, b in c.pairs:
            if not (0 <= a < n and 0 <= b < n):
                raise IndexError(f"corrupted cell ({a}, {b}) out of range for n={n}")
            out[a, b] = out[b, a] = value
            touched.add((min(a, b), max(a, b)))
    else:
        rng = np.random.default_rng(c.seed)
        iu, ju = np.triu_indices(n, 1)
        k = int(round(c.fraction * iu.size))
        pick = np.sort(rng.choice(iu.size, size=k, replace=False))
        noise = c.magnitude * top * (1.0 + rng.random(k))
        out[iu[pick], ju[pick]] = noise
        out[ju[pick], iu[pick]] = noise
        touched.update(zip(iu[pick].tolist(), ju[pick].tolist()))
    return out, sorted(touched)


def _add_outliers(values: np.ndarray, count: int, distance: float) -> np.ndarray:
    n = values.shape[0]
    out = np.full((n + count, n + count), float(distance))
    out[:n, :n] = values
    np.fill_diagonal(out, 0.0)
    return out


def generate(spec: InstanceSpec, seed: int = 0) -> Instance:
    """Build ``(space, kernel, clean kernel, manifest)`` for ``spec``.

    Zero-mass outliers are appended after the family's points at distance
    ``outlier_distance`` (default ``max(1, max clean entry)``) from every
    other point.  The manifest lists the perturbed pairs, their ordered
    product mass and, for corrupted instances, the pairs that are the
    long side of some violating triple.
    """
    clean = _clean_values(spec, seed)
    corrupted, touched = (clean.copy(), [])
    if spec.corruption is not None:
        corrupted, touched = _corrupt(clean, spec.corruption)
    n = spec.n
    if spec.outliers:
        dist = spec.outlier_distance
        if dist is None:
            dist = max(1.0, float(clean.max()))
        clean = _add_outliers(clean, spec.outliers, dist)
        corrupted = _add_outliers(corrupted, spec.outliers, dist)
        masses = np.concatenate([np.full(n, 1.0 / n), np.zeros(spec.outliers)])
        space = PointSpace(masses, "unordered")
    else:
        space = PointSpace.circle(n)
    kernel = Kernel(corrupted, "generated")
    clean_k = Kernel(clean, "generated")
    manifest = {
        "generator": GENERATOR_ID,
        "family": spec.family,
        "n": n,
        "seed": seed,
        "dim": spec.dim,
        "block": spec.block,
        "outliers": list(range(n, n + spec.outliers)),
        "corruption": None,
        "corrupted_pairs": [list(p) for p in touched],
        "corrupted_mass": pair_mass(space, touched),
    }
    if spec.corruption is not None:
        c = spec.corruption
        manifest["corruption"] = {
            "kind": c.kind,
            "indices": list(c.indices),
            "pairs": [list(p) for p in c.pairs],
            "value": c.value,
            "fraction": c.fraction,
            "magnitude": c.magnitude,
            "seed": c.seed,
        }
        kind = "ultrametric" if spec.family in ULTRAMETRIC_FAMILIES else "triangle"
        manifest["violation_kind"] = kind
        manifest["violating_pairs"] = [list(p) for p in violating_pairs(kernel, kind=kind)]
    return Instance(space, kernel, clean_k, manifest)


def essential_diameter_sets(spec: InstanceSpec, delta: float, seed: int = 0) -> list[list[int]]:
    """Partition the clean kernel's points into sets of diameter ``<= delta``.

    Sweep in index order: open a set at the first unassigned point and
    admit each later unassigned point within ``delta`` of every member.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    v = generate(spec, seed).clean.values
    n = v.shape[0]
    assigned = np.zeros(n, dtype=bool)
    sets = []
    for p in range(n):
        if assigned[p]:
            continue
        members = [p]
        assigned[p] = True
        for q in range(p + 1, n):
            if not assigned[q] and all(v[q, u] <= delta for u in members):
                members.append(q)
                assigned[q] = True
        sets.append(members)
    return sets
