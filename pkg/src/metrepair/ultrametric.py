"""Power-mean ladder correction for almost-ultrametrics.

For an exponent ``p`` the corrected value at ``(x, y)`` is the ``p``-th
power mean of the kernel over the ``w x w`` forward window anchored
there.  Power means increase with ``p`` and tend to the window maximum,
which is the ``INF`` rung of the ladder.  The window maximum of an
ultrametric is again an ultrametric.

With ``r`` bad rows of magnitude ``M`` inside a window whose clean
values are 0, the rung ``p`` reads ``M * (r / w) ** (1 / p)``: larger
windows suppress the bad rows, larger exponents let them back in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    Kernel,
    NonFiniteKernelError,
    PointSpace,
    symmetrize_upper,
    ultrametric_defect_scan,
    zero_diagonal,
)
from .correction import _check_window, _require_circle, cyclic_window_max, window_average

INF = math.inf
# exp(709) is the largest double; stay clear of it
_SAFE_LOG = 600.0

__all__ = [
    "INF",
    "PowerLadder",
    "power_mean_correct",
    "monotonicity_report",
    "ultrametric_defect_scan",
]


@dataclass(frozen=True)
class PowerLadder:
    exponents: tuple = (1, 2, 4, 8, INF)
    window: int = 2

    def __post_init__(self):
        exps = []
        for e in self.exponents:
            if isinstance(e, str):
                e = INF if e.strip().lower() == "inf" else int(e)
            exps.append(INF if e == INF else int(e))
        if not exps:
            raise ValueError("empty exponent ladder")
        if any(e < 1 for e in exps):
            raise ValueError("exponents must be >= 1")
        if INF in exps[:-1]:
            raise ValueError("INF may only terminate the ladder")
        if any(b <= a for a, b in zip(exps, exps[1:])):
            raise ValueError(f"exponents must be strictly increasing: {exps}")
        object.__setattr__(self, "exponents", tuple(exps))
        if self.window < 1:
            raise ValueError("window must be >= 1")

    @classmethod
    def parse(cls, text: str, window: int) -> "PowerLadder":
        return cls(tuple(t for t in text.split(",") if t.strip()), window)

    def labels(self) -> list[str]:
        return ["inf" if e == INF else str(e) for e in self.exponents]


def _power_mean(values: np.ndarray, space: PointSpace, w: int, p: int,
                wmax: np.ndarray) -> np.ndarray:
    top = float(values.max())
    pos = values[values > 0]
    low = float(pos.min()) if pos.size else 1.0
    if top <= 0 or (p * math.log(top) < _SAFE_LOG and p * math.log(low) > -_SAFE_LOG):
        avg = window_average(Kernel(values**p), space, w).values
        return avg ** (1.0 / p)
    # log-domain fallback: scale every window by its own maximum
    scale = np.where(wmax > 0, wmax, 1.0)
    acc = np.zeros_like(values)
    for t in range(w):
        for s in range(w):
            shifted = np.roll(values, (-t, -s), axis=(0, 1))
            acc += (shifted / scale) ** p
    out = scale * (acc / float(w * w)) ** (1.0 / p)
    out = np.where(wmax > 0, out, 0.0)
    return symmetrize_upper(out)


def power_mean_correct(kernel: Kernel, space: PointSpace, ladder: PowerLadder) -> list[Kernel]:
    """One corrected kernel per exponent of ``ladder``; diagonals are zeroed."""
    n = kernel.n
    _require_circle(space, n)
    _check_window(n, ladder.window)
    if not kernel.is_finite:
        raise NonFiniteKernelError("power-mean ladder needs finite entries (patch first)")
    v = kernel.values
    w = ladder.window
    wmax = symmetrize_upper(cyclic_window_max(v, w))
    outputs = []
    for p in ladder.exponents:
        out = wmax if p == INF else _power_mean(v, space, w, p, wmax)
        outputs.append(Kernel(zero_diagonal(out), "corrected"))
    return outputs


def monotonicity_report(outputs: list[Kernel], ladder: PowerLadder) -> dict:
    """Largest drop between consecutive rungs, absolute and relative to scale."""
    scale = max((k.max_finite() for k in outputs), default=0.0)
    steps = []
    for (a, ka), (b, kb) in zip(zip(ladder.labels(), outputs),
                                zip(ladder.labels()[1:], outputs[1:])):
        drop = float(np.max(ka.values - kb.values)) if ka.n else 0.0
        steps.append({"from": a, "to": b, "max_drop": max(drop, 0.0)})
    worst = max((s["max_drop"] for s in steps), default=0.0)
    return {
        "exponents": ladder.labels(),
        "window": ladder.window,
        "scale": scale,
        "steps": steps,
        "monotone": worst <= 1e-12 * max(scale, 1e-300),
    }
