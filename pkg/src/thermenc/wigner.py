"""Radial Wigner functions of Fock-diagonal (phase-symmetric) states.

Convention: quadratures with vacuum variance 1/2, so the vacuum peaks at
W(0) = 1/pi and W integrates to one over the plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import PhotonDistribution

__all__ = ["RadialProfile", "wigner_radial", "wigner_plane", "radial_normalization"]


@dataclass(frozen=True)
class RadialProfile:
    radii: np.ndarray
    values: np.ndarray

    def normalization(self) -> float:
        """2 pi * integral of W(r) r dr over the sampled radii (trapezoid)."""
        return radial_normalization(self.radii, self.values)


def radial_normalization(radii, values) -> float:
    r = np.asarray(radii, dtype=float)
    w = np.asarray(values, dtype=float)
    return float(2.0 * math.pi * np.trapezoid(w * r, r))


def _weighted_laguerre_sum(probs: np.ndarray, x: np.ndarray) -> np.ndarray:
    """sum_n probs[n] (-1)^n e^{-x/2} L_n(x), evaluated by forward recurrence.

    The recurrence is run on the damped functions e^{-x/2} L_n(x) so large
    radii neither overflow nor lose the exponential factor.
    """
    prev = np.zeros_like(x)
    cur = np.exp(-0.5 * x)
    total = probs[0] * cur
    sign = 1.0
    for k in range(probs.size - 1):
        nxt = ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
        prev, cur = cur, nxt
        sign = -sign
        total = total + sign * probs[k + 1] * cur
    return total


def wigner_radial(dist: PhotonDistribution, radii) -> RadialProfile:
    """W(r) = sum_n p_n (-1)^n / pi * e^{-r^2} L_n(2 r^2)."""
    probs = dist.probs if isinstance(dist, PhotonDistribution) else np.asarray(dist, dtype=float)
    r = np.asarray(radii, dtype=float)
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise ValueError("radii must be finite and nonnegative")
    values = _weighted_laguerre_sum(np.asarray(probs, dtype=float), 2.0 * r * r) / math.pi
    r = r.copy()
    r.setflags(write=False)
    values.setflags(write=False)
    return RadialProfile(r, values)


def wigner_plane(dist: PhotonDistribution, x, p) -> np.ndarray:
    """W on the grid ``meshgrid(x, p)``; the state is phase-symmetric."""
    X, P = np.meshgrid(np.asarray(x, dtype=float), np.asarray(p, dtype=float))
    rad = np.hypot(X, P)
    return np.asarray(wigner_radial(dist, rad.ravel()).values).reshape(rad.shape)
