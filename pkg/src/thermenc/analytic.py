"""Closed-form capacities, bounds and thresholds.

These double as regression oracles for the numerical optimizer: the
one-ring entropy, the flat (uniform-disk) encoding, the average-energy
ceiling ``g``, the two-codeword vacuum-resource capacity and the low-energy
lossy-channel approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect
from scipy.special import pdtrc

from .channel import ChannelContext, Coherent, Thermal
from .encoding import Encoding, holevo, marginal_info_density
from .fock import (
    CutoffOverflowError,
    CutoffPolicy,
    PhotonDistribution,
    default_policy,
    g_function,
    poisson_pmf,
    shannon_entropy,
    thermal_pmf,
)

__all__ = [
    "SINGLE_RING_BRACKET",
    "TWO_CODEWORD_BRACKET",
    "BracketError",
    "DivergenceError",
    "NormalizationError",
    "BoundsTable",
    "one_ring_capacity",
    "ring_capacity",
    "flat_encoding_distribution",
    "flat_encoding_capacity",
    "lapidoth_lower_bound",
    "single_ring_criterion",
    "single_ring_threshold",
    "two_codeword_capacity",
    "two_codeword_residual",
    "two_codeword_threshold",
    "lossy_upper_bound",
    "low_energy_approx",
    "optimal_state_amplitudes",
    "squeezed_displaced_amplitudes",
    "squeezing_db",
    "squeezing_r",
    "fidelity",
    "bounds_table",
]

SINGLE_RING_BRACKET = (0.5, 3.0)
TWO_CODEWORD_BRACKET = (5.0, 12.0)
_LOG2E = 1.0 / math.log(2.0)


class BracketError(ValueError):
    """The root is not bracketed by the search interval."""


class DivergenceError(ZeroDivisionError):
    pass


class NormalizationError(ArithmeticError):
    pass


# -- T = 0 coherent resource --------------------------------------------------------

def one_ring_capacity(E: float, policy: CutoffPolicy | None = None) -> float:
    """Entropy (bits) of a Poisson law with mean ``E``: one ring at full energy."""
    if E < 0:
        raise ValueError("E must be >= 0")
    return shannon_entropy(poisson_pmf(E, policy))


def ring_capacity(ctx: ChannelContext, eta: float = 1.0) -> float:
    """Holevo information of a single ring at ``eta`` for any resource."""
    return holevo(Encoding.point(eta), ctx)


def flat_encoding_distribution(E: float, policy: CutoffPolicy | None = None
                               ) -> PhotonDistribution:
    """Average Fock distribution when the attenuation is uniform on [0, 1].

    P_n = (n! - Gamma(n+1, E)) / (n! E), i.e. Pr[Poisson(E) > n] / E.
    """
    policy = policy or default_policy()
    if not E > 0:
        raise ValueError("E must be > 0")
    tol = policy.tail_tolerance
    # sum_{n>N} P_n = E[(X - N - 1)^+] / E; extend far enough that this is < tol
    n_max = len(poisson_pmf(E, CutoffPolicy(min(tol, 1e-14) * 1e-3, 8 * policy.max_cutoff)))
    n = np.arange(n_max + 1)
    probs = pdtrc(n, E) / E
    tails = np.append(np.cumsum(probs[::-1])[::-1][1:], 0.0)
    cutoff = int(np.argmax(tails <= tol))
    if cutoff > policy.max_cutoff:
        raise CutoffOverflowError(cutoff, policy.max_cutoff)
    return PhotonDistribution(probs[: cutoff + 1], float(tails[cutoff]))


def flat_encoding_capacity(E: float, policy: CutoffPolicy | None = None) -> float:
    return shannon_entropy(flat_encoding_distribution(E, policy))


def lapidoth_lower_bound(E: float) -> float:
    """Lower bound on the flat-encoding entropy from Poisson-channel theory."""
    if not E > 0:
        raise ValueError("E must be > 0")
    return math.log2(E) + (1.0 + E / 2.0) * math.log2(1.0 + 2.0 / E) - _LOG2E


def single_ring_criterion(E: float, policy: CutoffPolicy | None = None) -> float:
    """H(Poisson(E)) - E/ln2.

    Positive while a single ring at full energy is optimal. Its negative is
    the slope of the average-state entropy when a small vacuum weight is
    mixed into the ring.
    """
    return one_ring_capacity(E, policy) - E * _LOG2E


def single_ring_threshold(bracket=SINGLE_RING_BRACKET, xtol: float = 1e-10,
                          policy: CutoffPolicy | None = None,
                          units: str = "amplitude") -> float:
    """Point where one ring at full energy stops being optimal.

    Solves H(Poisson(E)) = E/ln2 by bisection over ``bracket`` (energies).
    With ``units="amplitude"`` (default) the coherent amplitude
    |alpha| = sqrt(E) = 1.25034 is returned; ``units="energy"`` returns
    E = |alpha|^2 = 1.56335.
    """
    if units not in ("amplitude", "energy"):
        raise ValueError("units must be 'amplitude' or 'energy'")
    lo, hi = bracket
    f = lambda E: single_ring_criterion(E, policy)  # noqa: E731
    if f(lo) * f(hi) > 0:
        raise BracketError(f"single-ring criterion does not change sign on {bracket}")
    root = float(bisect(f, lo, hi, xtol=xtol))
    return math.sqrt(root) if units == "amplitude" else root


# -- T > 0, vacuum resource ----------------------------------------------------------

def two_codeword_capacity(n_env: float) -> tuple[float, float]:
    """Optimal prior ``q0`` on the thermal codeword and the resulting chi.

    The two codewords are the environment's thermal state (eta = 0) and the
    vacuum (eta = 1).
    """
    if not n_env > 0:
        raise ValueError("n_env must be > 0")
    n = float(n_env)
    # (1+n)^{(1+n)/n} in log space; finite for every n > 0
    big = math.exp((1.0 + n) / n * math.log1p(n))
    q0 = (1.0 + n) / (n + big)
    chi = math.log2(1.0 + n / big)
    return q0, chi


def _two_codeword_setup(n_env, policy):
    q0, _ = two_codeword_capacity(n_env)
    ctx = ChannelContext(Thermal(0.0), n_env, policy or default_policy())
    enc = Encoding(np.array([0.0, 1.0]), np.array([q0, 1.0 - q0]))
    return ctx, enc


def two_codeword_residual(n_env: float, grid_size: int = 1001,
                          policy: CutoffPolicy | None = None) -> tuple[float, float]:
    """Largest interior local maximum of i[eta, F2] - chi and where it sits.

    ``F2`` is the optimal two-codeword encoding. The endpoints carry
    residual zero by construction, so only interior local maxima count.
    """
    from .optimizer import _golden_max

    ctx, enc = _two_codeword_setup(n_env, policy)
    chi = holevo(enc, ctx)
    grid = np.linspace(0.0, 1.0, grid_size)
    r = marginal_info_density(grid, enc, ctx) - chi
    inner = np.arange(1, grid_size - 1)
    peaks = inner[(r[inner] >= r[inner - 1]) & (r[inner] >= r[inner + 1])]
    if peaks.size == 0:
        k = int(np.argmax(r[1:-1])) + 1
        return float(r[k]), float(grid[k])
    best_val, best_eta = -math.inf, math.nan
    f = lambda x: marginal_info_density(x, enc, ctx) - chi  # noqa: E731
    for k in peaks:
        x, fx = _golden_max(f, grid[k - 1], grid[k + 1], grid[k], 1e-9)
        if fx > best_val:
            best_val, best_eta = fx, x
    return float(best_val), float(best_eta)


def two_codeword_threshold(bracket=TWO_CODEWORD_BRACKET, xtol: float = 1e-4,
                           policy: CutoffPolicy | None = None) -> float:
    """Environment photon number above which two codewords stop being optimal."""
    lo, hi = bracket
    f = lambda n: two_codeword_residual(n, policy=policy)[0]  # noqa: E731
    if f(lo) >= 0 or f(hi) <= 0:
        raise BracketError(f"two-codeword residual does not change sign on {bracket}")
    return float(bisect(f, lo, hi, xtol=xtol))


# -- lossy channel, low energy -------------------------------------------------------

def lossy_upper_bound(E: float, eta_ch: float, n_env: float) -> float:
    """g(eta E + (1-eta) n_env) - g((1-eta) n_env)."""
    if E < 0 or n_env < 0 or not 0.0 <= eta_ch <= 1.0:
        raise ValueError("need E >= 0, n_env >= 0 and 0 <= eta_ch <= 1")
    n_ch = (1.0 - eta_ch) * n_env
    return g_function(eta_ch * E + n_ch) - g_function(n_ch)


def low_energy_approx(E: float, eta_ch: float, n_env: float) -> float:
    """First-order one-ring Holevo information, eta E log2((1+n_ch)/n_ch)."""
    if E < 0 or n_env < 0 or not 0.0 <= eta_ch <= 1.0:
        raise ValueError("need E >= 0, n_env >= 0 and 0 <= eta_ch <= 1")
    n_ch = (1.0 - eta_ch) * n_env
    if n_ch == 0.0:
        raise DivergenceError("n_ch = 0: information per photon diverges")
    return eta_ch * E * math.log2((1.0 + n_ch) / n_ch)


# -- pure resource states --------------------------------------------------------------

def optimal_state_amplitudes(E: float, policy: CutoffPolicy | None = None) -> np.ndarray:
    """Fock amplitudes sqrt(E^n / (E+1)^(n+1)) of the g(E)-achieving resource."""
    if E < 0:
        raise ValueError("E must be >= 0")
    return np.sqrt(thermal_pmf(E, policy).probs)


def squeezing_db(r: float) -> float:
    return 10.0 * math.log10(math.exp(2.0 * abs(r)))


def squeezing_r(db: float, phase_squeezed: bool = True) -> float:
    """Squeeze parameter for ``db`` decibels; negative r squeezes the p quadrature."""
    r = db * math.log(10.0) / 20.0
    return -r if phase_squeezed else r


def squeezed_displaced_amplitudes(alpha: float, r: float,
                                  policy: CutoffPolicy | None = None) -> np.ndarray:
    """Fock amplitudes of D(alpha) S(r)|0> for real alpha and real r.

    Convention: S(r) = exp(r (a^2 - a^dag^2) / 2), so r > 0 squeezes x and
    r < 0 squeezes p (phase squeezing for real alpha). The amplitudes obey

        (a - alpha) cosh r + (a^dag - alpha) sinh r  annihilates the state,

    which gives a three-term recurrence started from
    <0|D S|0> = exp(-alpha^2 (1 + tanh r) / 2) / sqrt(cosh r).
    """
    policy = policy or default_policy()
    if not (math.isfinite(alpha) and math.isfinite(r)):
        raise ValueError("alpha and r must be finite")
    mu, nu = math.cosh(r), math.sinh(r)
    tol = policy.tail_tolerance
    c = [math.exp(-0.5 * alpha * alpha * (1.0 + math.tanh(r))) / math.sqrt(mu)]
    norm = c[0] ** 2
    prev = 0.0
    n = 0
    drive = (mu + nu) * alpha
    while 1.0 - norm > tol * 0.5 or n < 2:
        nxt = (drive * c[n] - nu * math.sqrt(n) * prev) / (mu * math.sqrt(n + 1))
        prev = c[n]
        c.append(nxt)
        norm += nxt * nxt
        n += 1
        if n > policy.max_cutoff:
            raise CutoffOverflowError(n, policy.max_cutoff)
    amps = np.array(c)
    total = float(amps @ amps)
    if abs(total - 1.0) > 1e-8:
        raise NormalizationError(f"squeezed-state amplitudes drifted: norm {total!r}")
    return amps


def fidelity(a, b, squared: bool = False) -> float:
    """Pure-state fidelity |<a|b>| (or |<a|b>|^2 with ``squared``).

    Amplitude vectors may have different lengths; the shorter one is
    treated as zero-padded.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    k = min(a.size, b.size)
    overlap = abs(np.vdot(a[:k], b[:k]))
    return float(overlap ** 2 if squared else overlap)


# -- tables ------------------------------------------------------------------------------

@dataclass
class BoundsTable:
    parameter: float
    chi_optimal: float | None = None
    upper: dict = field(default_factory=dict)
    lower: dict = field(default_factory=dict)

    def consistent(self, slack: float = 1e-8) -> bool:
        lows = list(self.lower.values())
        if self.chi_optimal is not None:
            lows.append(self.chi_optimal)
        ups = list(self.upper.values())
        if not lows or not ups:
            return True
        return max(lows) <= min(ups) + slack


def bounds_table(E: float, chi_optimal: float | None = None,
                 policy: CutoffPolicy | None = None) -> BoundsTable:
    """Bounds for a coherent resource of energy ``E`` in a vacuum environment."""
    lower = {"one_ring": one_ring_capacity(E, policy)}
    if E > 0:
        lower["flat"] = flat_encoding_capacity(E, policy)
        lower["lapidoth"] = lapidoth_lower_bound(E)
    return BoundsTable(E, chi_optimal, upper={"g": g_function(E)}, lower=lower)


def vacuum_environment_context(E: float, policy: CutoffPolicy | None = None) -> ChannelContext:
    return ChannelContext(Coherent(E), 0.0, policy or default_policy())
