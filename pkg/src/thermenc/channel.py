"""Resource states pushed through the thermal (beamsplitter + phase) channel.

Only the phase-averaged ("ring") state at each attenuation is represented;
it is diagonal in the Fock basis, so a ring is just a photon-number
distribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .fock import (
    CutoffPolicy,
    PhotonDistribution,
    default_policy,
    displaced_thermal_pmf,
    g_function,
    poisson_pmf,
    pure_fock_photon_pmf,
    thermal_pmf,
)

__all__ = [
    "Resource",
    "Coherent",
    "Thermal",
    "DisplacedThermal",
    "PureFock",
    "ChannelContext",
    "UnsupportedChannelError",
    "ring_distribution",
    "codeword_entropy",
]


class UnsupportedChannelError(ValueError):
    """Raised for resource/channel combinations that are not modelled."""


def _nonneg(name, value):
    if not (value >= 0 and np.isfinite(value)):
        raise ValueError(f"{name} must be finite and >= 0, got {value!r}")


class Resource:
    """Base class of the input-state families."""

    @property
    def energy(self) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class Coherent(Resource):
    E: float

    def __post_init__(self):
        _nonneg("E", self.E)

    @property
    def energy(self) -> float:
        return float(self.E)


@dataclass(frozen=True)
class Thermal(Resource):
    n_res: float

    def __post_init__(self):
        _nonneg("n_res", self.n_res)

    @property
    def energy(self) -> float:
        return float(self.n_res)


@dataclass(frozen=True)
class DisplacedThermal(Resource):
    n_res: float
    amp_sq: float

    def __post_init__(self):
        _nonneg("n_res", self.n_res)
        _nonneg("amp_sq", self.amp_sq)

    @property
    def energy(self) -> float:
        return float(self.n_res + self.amp_sq)


@dataclass(frozen=True)
class PureFock(Resource):
    """Arbitrary pure state given by its Fock amplitudes (stored as a tuple)."""

    amplitudes: tuple

    def __post_init__(self):
        amps = tuple(complex(c) for c in np.ravel(self.amplitudes))
        norm = sum(abs(c) ** 2 for c in amps)
        if not amps or abs(norm - 1.0) > 1e-9:
            raise ValueError(f"amplitudes must be normalized, sum |c|^2 = {norm!r}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def energy(self) -> float:
        p = np.abs(np.asarray(self.amplitudes)) ** 2
        return float(np.arange(p.size) @ p)


@dataclass(frozen=True)
class ChannelContext:
    resource: Resource
    n_env: float = 0.0
    policy: CutoffPolicy = field(default_factory=default_policy)

    def __post_init__(self):
        if not isinstance(self.resource, Resource):
            raise TypeError("resource must be a Resource instance")
        _nonneg("n_env", self.n_env)


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta!r}")
    return eta


def _thermal_part(ctx: ChannelContext, eta: float) -> float:
    """Mean photon number of the (undisplaced) thermal part of a codeword."""
    res = ctx.resource
    mixed_env = (1.0 - eta) * ctx.n_env
    if isinstance(res, Coherent):
        return mixed_env
    if isinstance(res, (Thermal, DisplacedThermal)):
        return eta * res.n_res + mixed_env
    raise UnsupportedChannelError(type(res).__name__)


@lru_cache(maxsize=65536)
def _ring(ctx: ChannelContext, eta: float, length) -> PhotonDistribution:
    res = ctx.resource
    pol = ctx.policy
    if isinstance(res, PureFock):
        if eta != 1.0 or ctx.n_env != 0.0:
            raise UnsupportedChannelError(
                "unsupported resource/channel combination: PureFock only at "
                "eta=1 with a vacuum environment"
            )
        dist = pure_fock_photon_pmf(res.amplitudes, pol)
        if length is not None and length > len(dist):
            dist = PhotonDistribution(dist.padded(length), dist.tail_mass)
        return dist
    n_th = _thermal_part(ctx, eta)
    if isinstance(res, Coherent):
        amp = eta * res.E
    elif isinstance(res, DisplacedThermal):
        amp = eta * res.amp_sq
    else:
        amp = 0.0
    if amp == 0.0:
        return thermal_pmf(n_th, pol, length)
    if n_th == 0.0:
        return poisson_pmf(amp, pol, length)
    return displaced_thermal_pmf(n_th, amp, pol, length)


def ring_distribution(ctx: ChannelContext, eta: float,
                      length: int | None = None) -> PhotonDistribution:
    """Photon-number distribution of the ring state at attenuation ``eta``.

    ``length`` extends the vector (never shortens it) so rings can be
    compared entrywise without zero padding artefacts.
    """
    return _ring(ctx, _check_eta(eta), None if length is None else int(length))


def codeword_entropy(ctx: ChannelContext, eta: float) -> float:
    """Von Neumann entropy (bits) of any codeword on the ring at ``eta``.

    Every in-scope codeword is a displaced thermal state (or pure), so the
    entropy is g of its thermal photon number and does not depend on phase.
    """
    eta = _check_eta(eta)
    if isinstance(ctx.resource, PureFock):
        ring_distribution(ctx, eta)  # raises for unsupported combinations
        return 0.0
    return g_function(_thermal_part(ctx, eta))
