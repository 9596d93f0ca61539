"""Random distance matrices of i.i.d. sample points and their fingerprints."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.stats import ks_2samp

from .core import Kernel, PointSpace, require_finite


def _probabilities(space: PointSpace) -> np.ndarray:
    m = np.asarray(space.masses, dtype=np.float64)
    total = m.sum()
    if total <= 0:
        raise ValueError("all masses are zero; nothing to sample")
    return m / total


def _trial_rng(seed, trial: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(trial)])


def sample_distance_matrix(kernel: Kernel, space: PointSpace, k: int, seed=0) -> np.ndarray:
    """Kernel values at ``k`` indices drawn i.i.d. proportionally to mass."""
    require_finite(kernel, "sampling")
    p = _probabilities(space)
    idx = np.random.default_rng(seed).choice(kernel.n, size=k, p=p)
    return kernel.values[np.ix_(idx, idx)].copy()


@dataclass(frozen=True)
class Fingerprint:
    k: int
    trials: int
    entry_ecdf: np.ndarray
    defect_ecdf: np.ndarray

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "trials": self.trials,
            "entry_ecdf": self.entry_ecdf.tolist(),
            "defect_ecdf": self.defect_ecdf.tolist(),
        }


def fingerprint(kernel: Kernel, space: PointSpace, k: int, trials: int, seed=0) -> Fingerprint:
    """Pool ``trials`` sampled ``k x k`` matrices.

    Entries are the ``k(k-1)/2`` upper-triangle values of each matrix;
    defects are ``d[a,c] - d[a,b] - d[b,c]`` over ordered triples of
    distinct sample positions.  Trial ``t`` draws from
    ``default_rng([seed, t])``.
    """
    if k < 2:
        raise ValueError("fingerprints need k >= 2")
    require_finite(kernel, "sampling")
    p = _probabilities(space)
    v = kernel.values
    iu = np.triu_indices(k, 1)
    triples = np.array(list(permutations(range(k), 3)), dtype=int).reshape(-1, 3)
    entries, defects = [], []
    for t in range(trials):
        idx = _trial_rng(seed, t).choice(kernel.n, size=k, p=p)
        d = v[np.ix_(idx, idx)]
        entries.append(d[iu])
        if triples.size:
            a, b, c = triples.T
            defects.append((d[a, c] - d[a, b]) - d[b, c])
    entry = np.sort(np.concatenate(entries)) if entries else np.empty(0)
    defect = np.sort(np.concatenate(defects)) if defects else np.empty(0)
    return Fingerprint(k, trials, entry, defect)


def ecdf_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Sup-norm distance between two empirical CDFs (0 if either is empty)."""
    if a.size == 0 or b.size == 0:
        return 0.0
    return float(ks_2samp(a, b, method="asymp").statistic)


def fingerprint_compare(kernel_a: Kernel, space_a: PointSpace, kernel_b: Kernel,
                        space_b: PointSpace, k: int, trials: int, seed_a=0, seed_b=1) -> float:
    """Larger of the entry and defect ECDF sup-distances, in ``[0, 1]``."""
    fa = fingerprint(kernel_a, space_a, k, trials, seed_a)
    fb = fingerprint(kernel_b, space_b, k, trials, seed_b)
    return max(ecdf_distance(fa.entry_ecdf, fb.entry_ecdf),
               ecdf_distance(fa.defect_ecdf, fb.defect_ecdf))
