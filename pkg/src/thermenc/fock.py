"""Truncated photon-number distributions, special functions and entropies.

Everything in this package is measured in bits. Distributions over the Fock
basis are truncated at the smallest cutoff whose discarded tail mass is below
``CutoffPolicy.tail_tolerance``; the discarded mass is kept on the
distribution so downstream code can account for it.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, pdtrc

__all__ = [
    "CutoffOverflowError",
    "NumericalInstabilityError",
    "CutoffPolicy",
    "PhotonDistribution",
    "default_policy",
    "poisson_pmf",
    "thermal_pmf",
    "displaced_thermal_pmf",
    "pure_fock_photon_pmf",
    "shannon_entropy",
    "g_function",
    "laguerre",
    "upper_incomplete_gamma_int",
    "log_upper_incomplete_gamma_int",
]

TAIL_TOL_ENV = "THERMENC_TAIL_TOL"
_NORM_TOL = 1e-9


class CutoffOverflowError(RuntimeError):
    """The requested tail tolerance needs more Fock levels than allowed."""

    def __init__(self, required_cutoff: int, max_cutoff: int):
        self.required_cutoff = int(required_cutoff)
        self.max_cutoff = int(max_cutoff)
        super().__init__(
            f"cutoff overflow: need about {self.required_cutoff} Fock levels, "
            f"ceiling is {self.max_cutoff}"
        )


class NumericalInstabilityError(FloatingPointError):
    pass


@dataclass(frozen=True)
class CutoffPolicy:
    tail_tolerance: float = 1e-12
    max_cutoff: int = 4096

    def __post_init__(self):
        if not 0.0 < self.tail_tolerance < 1.0:
            raise ValueError("tail_tolerance must lie in (0, 1)")
        if self.max_cutoff < 1:
            raise ValueError("max_cutoff must be >= 1")


def default_policy() -> CutoffPolicy:
    """Policy with the tail tolerance taken from ``$THERMENC_TAIL_TOL`` if set."""
    raw = os.environ.get(TAIL_TOL_ENV)
    if raw:
        return CutoffPolicy(tail_tolerance=float(raw))
    return CutoffPolicy()


@dataclass(frozen=True)
class PhotonDistribution:
    """Fock-diagonal probabilities ``probs[n]`` for n = 0..cutoff."""

    probs: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a non-empty 1-D vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("probabilities must be finite and nonnegative")
        if self.tail_mass < 0:
            raise ValueError("tail_mass must be nonnegative")
        total = p.sum() + self.tail_mass
        if abs(total - 1.0) > _NORM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, expected 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def cutoff(self) -> int:
        return self.probs.size - 1

    def __len__(self) -> int:
        return self.probs.size

    def mean(self) -> float:
        return float(np.arange(self.probs.size) @ self.probs)

    def padded(self, length: int) -> np.ndarray:
        """Probabilities zero-padded (never truncated) to ``length`` entries."""
        if length <= self.probs.size:
            return np.array(self.probs)
        out = np.zeros(length)
        out[: self.probs.size] = self.probs
        return out


def _check_ceiling(cutoff: int, policy: CutoffPolicy) -> None:
    if cutoff > policy.max_cutoff:
        raise CutoffOverflowError(cutoff, policy.max_cutoff)


def _clip_to_unit(probs: np.ndarray, tail: float) -> tuple[np.ndarray, float]:
    # guard against 1e-16 overshoot from rounding so the invariant holds
    tail = min(max(tail, 0.0), 1.0)
    return probs, tail


def poisson_pmf(mean: float, policy: CutoffPolicy | None = None,
                length: int | None = None) -> PhotonDistribution:
    """Poisson photon statistics of a phase-averaged coherent state.

    ``length`` forces at least that many entries (used when two
    distributions must be compared index by index).
    """
    policy = policy or default_policy()
    if mean < 0 or not math.isfinite(mean):
        raise ValueError("mean must be finite and >= 0")
    if mean == 0.0:
        probs = np.zeros(max(1, length or 1))
        probs[0] = 1.0
        return PhotonDistribution(probs, 0.0)

    tol = policy.tail_tolerance
    # scan upward from mean + k*sqrt(mean) until the survival function drops below tol
    n = int(mean + 3.0 * math.sqrt(mean))
    step = max(1, int(math.sqrt(mean)))
    while pdtrc(n, mean) > tol:
        n += step
        if n > 4 * policy.max_cutoff + 100:
            raise CutoffOverflowError(n, policy.max_cutoff)
    # walk back to the smallest admissible cutoff
    lo = max(0, n - step)
    while lo < n and pdtrc(lo, mean) > tol:
        lo += 1
    cutoff = lo
    _check_ceiling(cutoff, policy)
    if length is not None and length - 1 > cutoff:
        cutoff = length - 1
    k = np.arange(cutoff + 1)
    logp = -mean + k * math.log(mean) - gammaln(k + 1)
    probs = np.exp(logp)
    tail = float(pdtrc(cutoff, mean))
    return PhotonDistribution(*_clip_to_unit(probs, tail))


def _thermal_cutoff(nbar: float, tol: float) -> int:
    # geometric tail r^(N+1) <= tol
    r = nbar / (nbar + 1.0)
    return max(0, math.ceil(math.log(tol) / math.log(r)) - 1)


def thermal_pmf(nbar: float, policy: CutoffPolicy | None = None,
                length: int | None = None) -> PhotonDistribution:
    """Bose-Einstein distribution ``nbar^n / (nbar+1)^(n+1)``."""
    policy = policy or default_policy()
    if nbar < 0 or not math.isfinite(nbar):
        raise ValueError("nbar must be finite and >= 0")
    if nbar == 0.0:
        probs = np.zeros(max(1, length or 1))
        probs[0] = 1.0
        return PhotonDistribution(probs, 0.0)
    cutoff = _thermal_cutoff(nbar, policy.tail_tolerance)
    _check_ceiling(cutoff, policy)
    if length is not None and length - 1 > cutoff:
        cutoff = length - 1
    k = np.arange(cutoff + 1)
    log_r = math.log(nbar) - math.log1p(nbar)
    probs = np.exp(k * log_r - math.log1p(nbar))
    tail = math.exp((cutoff + 1) * log_r)
    return PhotonDistribution(*_clip_to_unit(probs, tail))


def _displaced_thermal_log_probs(nbar: float, amp_sq: float, n_max: int) -> np.ndarray:
    """log P_n for n = 0..n_max of D(alpha) rho_th(nbar) D(alpha)^dagger.

    Closed form: P_n = (1-r) r^n exp(-A/(N+1)) L_n(-A/(N(N+1))) with
    r = N/(N+1). The Laguerre three-term recurrence is rewritten for the
    ratios rho_k = P_k / P_{k-1}:

        (k+1) rho_{k+1} = r (2k+1) + A/(N+1)^2 - r^2 k / rho_k

    which stays finite as N -> 0 (it becomes the Poisson ratio A/(k+1)) and
    never forms the huge Laguerre values explicitly. For a negative
    Laguerre argument the wanted solution is the dominant one, so the
    forward sweep is stable.
    """
    r = nbar / (nbar + 1.0)
    r2 = r * r
    drift = amp_sq / (nbar + 1.0) ** 2
    logp = np.empty(n_max + 1)
    logp[0] = -math.log1p(nbar) - amp_sq / (nbar + 1.0)
    rho = r + drift
    for k in range(n_max):
        if k > 0:
            rho = (r * (2 * k + 1) + drift - r2 * k / rho) / (k + 1)
        if not rho > 0.0 or not math.isfinite(rho):
            raise NumericalInstabilityError(
                f"displaced-thermal recurrence broke down at n={k + 1} "
                f"(nbar={nbar}, amp_sq={amp_sq}, ratio={rho})"
            )
        logp[k + 1] = logp[k] + math.log(rho)
    return logp


def displaced_thermal_pmf(nbar: float, amp_sq: float,
                          policy: CutoffPolicy | None = None,
                          length: int | None = None) -> PhotonDistribution:
    """Photon statistics of a displaced thermal state, ``|alpha|^2 = amp_sq``."""
    policy = policy or default_policy()
    if nbar < 0 or amp_sq < 0 or not (math.isfinite(nbar) and math.isfinite(amp_sq)):
        raise ValueError("nbar and amp_sq must be finite and >= 0")
    if nbar == 0.0:
        return poisson_pmf(amp_sq, policy, length)
    if amp_sq == 0.0:
        return thermal_pmf(nbar, policy, length)

    tol = policy.tail_tolerance
    mean = nbar + amp_sq
    sd = math.sqrt(nbar * (nbar + 1.0) + amp_sq * (2.0 * nbar + 1.0))
    n_max = int(mean + 12.0 * sd) + 20
    if length is not None:
        n_max = max(n_max, length - 1)
    while True:
        logp = _displaced_thermal_log_probs(nbar, amp_sq, n_max)
        probs = np.exp(logp)
        # tail[n] = sum_{k > n} P_k, accumulated from the far end for accuracy
        rev = np.cumsum(probs[::-1])[::-1]
        tail = np.append(rev[1:], 0.0)
        ratio = math.exp(logp[-1] - logp[-2])
        # geometric bound on the mass beyond n_max
        if ratio < 1.0 and probs[-1] * ratio / (1.0 - ratio) < tol * 1e-3:
            break
        n_max *= 2
        if n_max > 8 * policy.max_cutoff + 200:
            raise CutoffOverflowError(n_max, policy.max_cutoff)
    cutoff = int(np.argmax(tail <= tol))
    _check_ceiling(cutoff, policy)
    if length is not None and length - 1 > cutoff:
        cutoff = length - 1
    probs = probs[: cutoff + 1]
    tail_mass = float(tail[cutoff])
    # absorb rounding of the long sum into the reported tail
    tail_mass = max(tail_mass, 0.0)
    if abs(probs.sum() + tail_mass - 1.0) > 1e-10:
        raise NumericalInstabilityError(
            f"displaced-thermal pmf lost normalization: {probs.sum() + tail_mass!r}"
        )
    return PhotonDistribution(probs, tail_mass)


def pure_fock_photon_pmf(amplitudes, policy: CutoffPolicy | None = None) -> PhotonDistribution:
    c = np.asarray(amplitudes, dtype=complex)
    probs = np.abs(c) ** 2
    total = probs.sum()
    if abs(total - 1.0) > _NORM_TOL:
        raise ValueError(f"amplitudes are not normalized (sum |c|^2 = {total!r})")
    return PhotonDistribution(probs, max(0.0, 1.0 - total) if total < 1.0 else 0.0)


def shannon_entropy(dist: PhotonDistribution, return_uncertainty: bool = False):
    """Shannon entropy (bits) of the retained probabilities.

    The truncated tail is not added to the value. With
    ``return_uncertainty=True`` the pair ``(H, -t log2 t)`` is returned,
    where ``t`` is the tail mass.
    """
    p = dist.probs[dist.probs > 0]
    h = float(-(p @ np.log2(p)))
    if not return_uncertainty:
        return h
    t = dist.tail_mass
    unc = 0.0 if t <= 0 else float(-t * math.log2(t))
    return h, unc


def g_function(N):
    """Entropy of a thermal state, ``(1+N)log2(1+N) - N log2 N``; g(0) = 0."""
    N = np.asarray(N, dtype=float)
    if np.any(N < 0):
        raise ValueError("N must be >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (1.0 + N) * np.log2(1.0 + N) - np.where(N > 0, N * np.log2(np.where(N > 0, N, 1.0)), 0.0)
    return float(val) if val.ndim == 0 else val


def laguerre(n: int, x):
    """L_n(x) from the three-term recurrence; vectorized over ``x``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return float(prev) if prev.ndim == 0 else prev
    cur = 1.0 - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return float(cur) if cur.ndim == 0 else cur


def log_upper_incomplete_gamma_int(n: int, x: float) -> float:
    """log Gamma(n+1, x) for integer n >= 0.

    Uses Gamma(k+1, x) = k Gamma(k, x) + x^k e^{-x} in the scaled form
    Q_k = Gamma(k+1, x)/k! = Q_{k-1} + x^k e^{-x}/k!, with the terms
    accumulated in log space.
    """
    if n < 0 or x < 0:
        raise ValueError("need n >= 0 and x >= 0")
    if x == 0.0:
        return float(gammaln(n + 1))
    k = np.arange(n + 1)
    log_terms = k * math.log(x) - x - gammaln(k + 1)
    top = log_terms.max()
    log_q = top + math.log(np.exp(log_terms - top).sum())
    return float(log_q + gammaln(n + 1))


def upper_incomplete_gamma_int(n: int, x: float) -> float:
    """Gamma(n+1, x); overflows to ``inf`` only when the true value does."""
    if n < 0 or x < 0:
        raise ValueError("need n >= 0 and x >= 0")
    # plain recurrence while the numbers are small, log form otherwise
    if n <= 30:
        val = math.exp(-x)
        for k in range(1, n + 1):
            val = k * val + x ** k * math.exp(-x)
        return val
    lg = log_upper_incomplete_gamma_int(n, x)
    return math.exp(lg) if lg < 709.0 else math.inf
