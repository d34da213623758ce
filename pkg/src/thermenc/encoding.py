"""Finite circularly symmetric encodings and their information quantities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelContext, codeword_entropy, ring_distribution
from .fock import PhotonDistribution, shannon_entropy

__all__ = [
    "MERGE_TOL",
    "KKT_TOL",
    "SupportMismatchError",
    "Encoding",
    "OptimalityReport",
    "average_distribution",
    "holevo",
    "marginal_info_density",
    "ring_matrix",
    "verification_grid",
    "kkt_residuals",
]

MERGE_TOL = 1e-7
KKT_TOL = 1e-6
_WEIGHT_SUM_TOL = 1e-12


class SupportMismatchError(ValueError):
    """A ring puts weight on a Fock level where the average state has none."""


@dataclass(frozen=True)
class Encoding:
    """Atoms ``(support[j], weights[j])`` of a distribution over attenuation."""

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        s = np.array(self.support, dtype=float).ravel()
        w = np.array(self.weights, dtype=float).ravel()
        if s.size == 0 or s.size != w.size:
            raise ValueError("support and weights must be non-empty and equally long")
        if np.any(s < 0) or np.any(s > 1):
            raise ValueError("support must lie in [0, 1]")
        if np.any(np.diff(s) <= MERGE_TOL):
            raise ValueError("support must be strictly increasing with gaps > MERGE_TOL")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}")
        s.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_atoms(cls, support, weights, merge_tol: float = MERGE_TOL,
                   drop_below: float = 0.0) -> "Encoding":
        """Sort, merge atoms closer than ``merge_tol`` and renormalize."""
        s = np.clip(np.asarray(support, dtype=float).ravel(), 0.0, 1.0)
        w = np.asarray(weights, dtype=float).ravel()
        keep = w > drop_below
        if not np.any(keep):
            raise ValueError("all weights are zero")
        s, w = s[keep], w[keep]
        order = np.argsort(s, kind="stable")
        s, w = s[order], w[order]
        merged_s, merged_w = [s[0]], [w[0]]
        for x, p in zip(s[1:], w[1:]):
            if x - merged_s[-1] <= merge_tol:
                tot = merged_w[-1] + p
                # weighted position, heavier atom dominates
                if tot > 0:
                    merged_s[-1] = (merged_s[-1] * merged_w[-1] + x * p) / tot
                merged_w[-1] = tot
            else:
                merged_s.append(x)
                merged_w.append(p)
        w = np.array(merged_w)
        return cls(np.array(merged_s), w / w.sum())

    @classmethod
    def point(cls, eta: float) -> "Encoding":
        return cls(np.array([eta]), np.array([1.0]))

    def __len__(self) -> int:
        return self.support.size

    def ring_energies(self, energy: float) -> np.ndarray:
        return self.support * energy


@dataclass
class OptimalityReport:
    chi: float
    support_residuals: np.ndarray
    grid_residuals: float
    grid_size: int
    converged: bool
    tolerance: float = KKT_TOL
    argmax_eta: float = float("nan")
    weights: np.ndarray | None = None
    grid: np.ndarray | None = None
    residual_profile: np.ndarray | None = None
    iterations: int = 0
    message: str = ""

    @property
    def weighted_support_residual(self) -> float:
        """sum_j p_j (i[eta_j, F] - chi); zero up to rounding for any encoding."""
        if self.weights is None:
            return float("nan")
        return float(self.weights @ self.support_residuals)


def ring_matrix(ctx: ChannelContext, etas, length: int | None = None) -> np.ndarray:
    """Stack ring distributions row-wise on a common Fock length."""
    etas = np.atleast_1d(np.asarray(etas, dtype=float))
    if length is None:
        length = max(len(ring_distribution(ctx, e)) for e in etas)
    return np.vstack([ring_distribution(ctx, e, length).probs[:length] for e in etas])


def _common_length(ctx: ChannelContext, etas) -> int:
    return max(len(ring_distribution(ctx, e)) for e in np.atleast_1d(etas))


def average_distribution(enc: Encoding, ctx: ChannelContext,
                         length: int | None = None) -> PhotonDistribution:
    """Fock diagonal of the ensemble average: sum_j p_j P_n[ring(eta_j)]."""
    L = max(_common_length(ctx, enc.support), length or 0)
    rows = ring_matrix(ctx, enc.support, L)
    tails = np.array([ring_distribution(ctx, e, L).tail_mass for e in enc.support])
    probs = enc.weights @ rows
    return PhotonDistribution(probs, float(enc.weights @ tails))


def _codeword_entropies(ctx, etas) -> np.ndarray:
    return np.array([codeword_entropy(ctx, e) for e in np.atleast_1d(etas)])


def holevo(enc: Encoding, ctx: ChannelContext, length: int | None = None) -> float:
    """Holevo information (bits) of the encoding.

    Values down to -1e-9 are numerical noise and are reported as 0.
    """
    avg = average_distribution(enc, ctx, length)
    chi = shannon_entropy(avg) - float(enc.weights @ _codeword_entropies(ctx, enc.support))
    if -1e-9 <= chi < 0:
        return 0.0
    return chi


def _cross_entropy(rows: np.ndarray, avg: np.ndarray) -> np.ndarray:
    """-sum_n rows[:, n] log2 avg[n] for every row."""
    positive = avg > 0
    if np.any(rows[:, ~positive] > 0):
        bad = int(np.flatnonzero(np.any(rows[:, ~positive] > 0, axis=0))[0])
        raise SupportMismatchError(
            f"support mismatch: ring has weight on Fock level "
            f"{np.flatnonzero(~positive)[bad]} where the average state has none"
        )
    log_avg = np.zeros_like(avg)
    log_avg[positive] = np.log2(avg[positive])
    return -(rows @ log_avg)


def marginal_info_density(eta, enc: Encoding, ctx: ChannelContext):
    """Information density i[eta, F] of the ring at ``eta`` against ``enc``.

    Accepts a scalar or an array of attenuations.
    """
    etas = np.atleast_1d(np.asarray(eta, dtype=float))
    L = max(_common_length(ctx, etas), _common_length(ctx, enc.support))
    avg = average_distribution(enc, ctx, L).probs
    rows = ring_matrix(ctx, etas, L)
    dens = _cross_entropy(rows, avg) - _codeword_entropies(ctx, etas)
    return float(dens[0]) if np.ndim(eta) == 0 else dens


def verification_grid(enc: Encoding | None = None, size: int = 1001,
                      densify: int = 10) -> np.ndarray:
    """Uniform grid on [0, 1], refined ``densify``-fold around support points."""
    base = np.linspace(0.0, 1.0, size)
    if enc is None or densify <= 1:
        return base
    h = 1.0 / (size - 1)
    fine = h / densify
    extra = [s + fine * np.arange(-densify, densify + 1) for s in enc.support]
    pts = np.concatenate([base, *extra])
    pts = pts[(pts >= 0.0) & (pts <= 1.0)]
    return np.unique(pts)


def kkt_residuals(enc: Encoding, ctx: ChannelContext, grid=None,
                  tol: float = KKT_TOL) -> OptimalityReport:
    """Check i[eta, F] <= chi on ``grid`` with equality on the support.

    Ties for the largest grid residual resolve to the smallest eta.
    """
    grid = verification_grid(enc) if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be non-empty")
    if np.any(grid < 0) or np.any(grid > 1):
        raise ValueError("grid must lie in [0, 1]")
    L = max(_common_length(ctx, grid), _common_length(ctx, enc.support))
    avg_dist = average_distribution(enc, ctx, L)
    avg = avg_dist.probs
    chi = shannon_entropy(avg_dist) - float(enc.weights @ _codeword_entropies(ctx, enc.support))

    sup_dens = _cross_entropy(ring_matrix(ctx, enc.support, L), avg) - _codeword_entropies(ctx, enc.support)
    grid_dens = _cross_entropy(ring_matrix(ctx, grid, L), avg) - _codeword_entropies(ctx, grid)
    sup_res = sup_dens - chi
    profile = grid_dens - chi
    k = int(np.argmax(profile))  # first occurrence -> smallest eta
    gmax = float(profile[k])
    converged = bool(gmax <= tol and np.all(np.abs(sup_res[enc.weights > 0]) <= tol))
    return OptimalityReport(
        chi=float(chi),
        support_residuals=sup_res,
        grid_residuals=gmax,
        grid_size=int(grid.size),
        converged=converged,
        tolerance=tol,
        argmax_eta=float(grid[k]),
        weights=enc.weights,
        grid=grid,
        residual_profile=profile,
    )
