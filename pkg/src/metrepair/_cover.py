"""Closed-ball tables and the greedy max-coverage loop shared by the
entropy and support computations."""

from __future__ import annotations

import math

import numpy as np

# slack on "covered mass >= target" so exact sums such as 0.5 >= 0.5 are
# not lost to the last bit of a float
COVER_SLACK = 1e-12


def ball_table(values: np.ndarray, radius: float) -> np.ndarray:
    """``table[c, y]`` is True when ``y`` lies in the closed ball ``B(c, radius)``."""
    return values <= radius


def covered_mass(masses: np.ndarray, covered: np.ndarray) -> float:
    return math.fsum(masses[covered].tolist())


def greedy_cover(table: np.ndarray, masses: np.ndarray, target: float,
                 candidates=None) -> tuple[list[int], np.ndarray]:
    """Add the ball with the largest uncovered mass (lowest index on ties)
    until ``target`` mass is covered or no ball adds anything.

    Returns the chosen centers and the boolean covered set.
    """
    n = table.shape[1]
    cand = np.arange(table.shape[0]) if candidates is None else np.asarray(candidates, dtype=int)
    covered = np.zeros(n, dtype=bool)
    centers: list[int] = []
    while covered_mass(masses, covered) < target - COVER_SLACK:
        fresh = table[cand] & ~covered[None, :]
        gains = [math.fsum(masses[row].tolist()) for row in fresh]
        if not gains:
            break
        k = int(np.argmax(gains))
        if gains[k] <= 0.0:
            break
        centers.append(int(cand[k]))
        covered |= table[cand[k]]
    return centers, covered
