"""Capacity-achieving finite encodings.

The search alternates three steps until the optimality conditions hold on a
verification grid:

1. optimal weights on a fixed support (the Holevo information is concave in
   the weights, so this is a global optimum);
2. coordinate-wise golden-section refinement of the atom positions;
3. insertion of a new atom where the information density exceeds chi most.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .channel import ChannelContext, Coherent, Thermal, codeword_entropy, ring_distribution
from .encoding import (
    MERGE_TOL,
    Encoding,
    OptimalityReport,
    holevo,
    kkt_residuals,
    ring_matrix,
    verification_grid,
)

__all__ = [
    "OptimizerConfig",
    "OptimizationError",
    "WeightOptimizationError",
    "ScanRow",
    "optimize_weights",
    "optimize_encoding",
    "threshold_scan",
]

log = logging.getLogger(__name__)

_LN2 = math.log(2.0)
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizerConfig:
    kkt_tolerance: float = 1e-6
    weight_tolerance: float = 1e-9
    max_support: int = 32
    max_outer_iters: int = 200
    grid_size: int = 1001
    seed_support: tuple | None = None
    max_weight_iters: int = 500
    position_xtol: float = 1e-9

    def __post_init__(self):
        if self.kkt_tolerance <= 0 or self.weight_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_support < 1:
            raise ValueError("max_support must be >= 1")
        if self.grid_size < 2:
            raise ValueError("grid_size must be >= 2")


class OptimizationError(RuntimeError):
    """Budget exhausted; ``best`` and ``report`` hold the last iterate."""

    def __init__(self, message, best: Encoding | None = None,
                 report: OptimalityReport | None = None):
        super().__init__(message)
        self.best = best
        self.report = report


class WeightOptimizationError(OptimizationError):
    pass


# -- weights on a fixed support ------------------------------------------------

def _entropy_bits(avg: np.ndarray) -> float:
    pos = avg > 0
    return float(-(avg[pos] @ np.log2(avg[pos])))


def _densities(P: np.ndarray, S: np.ndarray, p: np.ndarray):
    avg = p @ P
    log_avg = np.zeros_like(avg)
    pos = avg > 0
    log_avg[pos] = np.log2(avg[pos])
    return -(P @ log_avg) - S, avg


def _chi(P, S, p) -> float:
    return _entropy_bits(p @ P) - float(p @ S)


def _blahut_arimoto(P, S, p, iters: int, gap_tol: float):
    """Multiplicative updates p_j <- p_j 2^{i_j}; monotone in chi."""
    for _ in range(iters):
        dens, _ = _densities(P, S, p)
        chi = float(p @ dens)
        if dens.max() - chi < gap_tol:
            break
        w = p * np.exp2(dens - dens.max())
        p = w / w.sum()
    return p


def _newton_weights(P, S, p, cfg: OptimizerConfig):
    """Active-set Newton ascent on the simplex.

    Returns ``(p, iterations, converged)``. The quadratic model uses the
    exact Hessian -sum_n P_jn P_kn / (avg_n ln 2).
    """
    m = p.size
    free = p > 0
    inner_tol = min(1e-11, cfg.kkt_tolerance * 1e-4)
    chi = _chi(P, S, p)
    small_steps = 0
    for it in range(1, cfg.max_weight_iters + 1):
        dens, avg = _densities(P, S, p)
        chi = float(p @ dens)
        idx = np.flatnonzero(free)
        gap = np.abs(dens[idx] - chi).max()
        out = np.flatnonzero(~free)
        viol = out[dens[out] > chi + inner_tol] if out.size else out
        if gap <= inner_tol:
            if viol.size == 0:
                return p, it, True
            free[viol[np.argmax(dens[viol])]] = True
            idx = np.flatnonzero(free)

        k = idx.size
        pos = avg > 0
        Pk = P[idx][:, pos]
        H = -(Pk / avg[pos]) @ Pk.T / _LN2
        g = dens[idx]
        kkt = np.zeros((k + 1, k + 1))
        kkt[:k, :k] = H
        kkt[:k, k] = -1.0
        kkt[k, :k] = 1.0
        rhs = np.concatenate([-g, [0.0]])
        sol = np.linalg.lstsq(kkt, rhs, rcond=1e-14)[0]
        d = np.zeros(m)
        d[idx] = sol[:k]
        d -= d.sum() / k * free  # keep exactly on the simplex
        slope = float(dens @ d)
        if slope <= 0:
            # model is not an ascent direction; fall back to a projected gradient step
            d = np.zeros(m)
            d[idx] = g - g.mean()
            slope = float(dens @ d)
            if slope <= 0:
                return p, it, gap <= cfg.kkt_tolerance * 1e-2 and viol.size == 0

        neg = d < 0
        t_block = np.min(-p[neg] / d[neg]) if np.any(neg) else np.inf
        t = min(1.0, t_block)
        accepted = False
        for _ in range(60):
            trial = p + t * d
            trial[trial < 0] = 0.0
            chi_new = _chi(P, S, trial)
            if chi_new >= chi + 1e-4 * t * slope or chi_new >= chi and t < 1e-12:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            return p, it, gap <= cfg.kkt_tolerance * 1e-2 and viol.size == 0
        if t == t_block:
            hit = np.flatnonzero(neg & (p + t * d <= 1e-15 * max(1.0, p.max())))
            trial[hit] = 0.0
            free[hit] = False
        trial = trial / trial.sum()
        improvement = _chi(P, S, trial) - chi
        p = trial
        small_steps = small_steps + 1 if improvement < cfg.weight_tolerance * 1e-3 else 0
        if small_steps >= 5 and gap <= inner_tol * 100 and viol.size == 0:
            return p, it, True
    return p, cfg.max_weight_iters, False


def optimize_weights(support: Sequence[float], ctx: ChannelContext,
                     cfg: OptimizerConfig | None = None,
                     initial_weights: Sequence[float] | None = None,
                     prune: bool = True) -> Encoding:
    """Maximize chi over the probability simplex for a fixed support.

    Blahut-Arimoto iterations locate the active atoms, an active-set
    Newton iteration then converges quadratically. Atoms left with zero
    weight are dropped when ``prune`` is set.
    """
    cfg = cfg or OptimizerConfig()
    s = np.asarray(support, dtype=float).ravel()
    if s.size == 0:
        raise ValueError("support must be non-empty")
    if np.any(s < 0) or np.any(s > 1):
        raise ValueError("support must lie in [0, 1]")
    order = np.argsort(s, kind="stable")
    s = s[order]
    keep = np.concatenate([[True], np.diff(s) > MERGE_TOL])
    s = s[keep]
    if s.size == 1:
        return Encoding.point(s[0])

    P = ring_matrix(ctx, s, _max_ring_length(ctx, s))
    S = np.array([codeword_entropy(ctx, e) for e in s])
    if initial_weights is None:
        p = np.full(s.size, 1.0 / s.size)
    else:
        w0 = np.asarray(initial_weights, dtype=float).ravel()
        if w0.size != order.size:
            raise ValueError("initial_weights must match the support")
        w0 = w0[order][keep]
        # give every atom some mass so Blahut-Arimoto can move it
        p = 0.9 * w0 / w0.sum() + 0.1 / s.size
    p = _blahut_arimoto(P, S, p, iters=200, gap_tol=1e-3)
    p, _, ok = _newton_weights(P, S, p, cfg)
    if not ok:
        # one restart from a fresh Blahut-Arimoto run before giving up
        p = _blahut_arimoto(P, S, np.full(s.size, 1.0 / s.size), iters=5000, gap_tol=1e-6)
        p, _, ok = _newton_weights(P, S, p, cfg)
    if prune:
        mask = p > 0
        enc = Encoding.from_atoms(s[mask], p[mask])
    else:
        enc = Encoding(s, p / p.sum())
    if not ok:
        raise WeightOptimizationError(
            f"weight optimization did not converge on support {s.tolist()}", best=enc)
    return enc


# -- positions -------------------------------------------------------------------

def _golden_max(f: Callable[[float], float], lo: float, hi: float, x0: float,
                xtol: float) -> tuple[float, float]:
    """Golden-section maximization of ``f`` on [lo, hi]; never worse than x0."""
    best_x, best_f = x0, f(x0)
    for end in (lo, hi):
        fe = f(end)
        if fe > best_f:
            best_x, best_f = end, fe
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    for x, fx in ((c, fc), (d, fd)):
        if fx > best_f:
            best_x, best_f = x, fx
    return best_x, best_f


def _refine_positions(enc: Encoding, ctx: ChannelContext, cfg: OptimizerConfig,
                      sweeps: int = 3) -> Encoding:
    """Coordinate ascent on the atom positions with weights held fixed."""
    s = np.array(enc.support)
    w = np.array(enc.weights)
    L = _max_ring_length(ctx, s)
    rows = ring_matrix(ctx, s, L)
    S = np.array([codeword_entropy(ctx, e) for e in s])

    for _ in range(sweeps):
        moved = 0.0
        for j in range(s.size):
            lo = 0.0 if j == 0 else s[j - 1] + 2 * MERGE_TOL
            hi = 1.0 if j == s.size - 1 else s[j + 1] - 2 * MERGE_TOL
            if hi <= lo:
                continue
            rest = w @ rows - w[j] * rows[j]
            rest_S = w @ S - w[j] * S[j]

            def f(x, j=j, rest=rest, rest_S=rest_S):
                row = ring_matrix(ctx, [x], L)[0]
                return _entropy_bits(rest + w[j] * row) - rest_S - w[j] * codeword_entropy(ctx, x)

            x_new, _ = _golden_max(f, lo, hi, s[j], cfg.position_xtol)
            moved = max(moved, abs(x_new - s[j]))
            s[j] = x_new
            rows[j] = ring_matrix(ctx, [x_new], L)[0]
            S[j] = codeword_entropy(ctx, x_new)
        if moved < cfg.position_xtol * 10:
            break
    return Encoding.from_atoms(s, w)


def _max_ring_length(ctx: ChannelContext, extra=()) -> int:
    etas = np.concatenate([np.linspace(0.0, 1.0, 11), np.asarray(extra, dtype=float)])
    return max(len(ring_distribution(ctx, e)) for e in etas)


# -- outer loop ------------------------------------------------------------------

def _is_degenerate(ctx: ChannelContext) -> bool:
    res = ctx.resource
    return isinstance(res, Thermal) and res.n_res == ctx.n_env


def _default_seed(ctx: ChannelContext) -> list[float]:
    return [0.0, 1.0]


def _report(enc, ctx, cfg, iterations, message="") -> OptimalityReport:
    grid = verification_grid(enc, size=cfg.grid_size)
    rep = kkt_residuals(enc, ctx, grid, tol=cfg.kkt_tolerance)
    rep.iterations = iterations
    rep.message = message
    return rep


def optimize_encoding(ctx: ChannelContext, cfg: OptimizerConfig | None = None
                      ) -> tuple[Encoding, OptimalityReport]:
    """Find the capacity-achieving encoding for ``ctx``.

    Raises :class:`OptimizationError` (carrying the best encoding so far and
    its report) when the support or iteration budget runs out.
    """
    cfg = cfg or OptimizerConfig()
    if _is_degenerate(ctx):
        enc = Encoding.point(1.0)
        rep = _report(enc, ctx, cfg, 0, "resource equals environment; chi = 0")
        rep.chi = 0.0  # exact; the computed value is truncation noise
        return enc, rep

    seed = sorted(cfg.seed_support) if cfg.seed_support else _default_seed(ctx)
    seed = seed[-cfg.max_support:]  # the seed counts against the support budget
    enc = optimize_weights(seed, ctx, cfg)
    stalls = 0
    for outer in range(1, cfg.max_outer_iters + 1):
        chi_before = holevo(enc, ctx)
        for _ in range(50):
            enc = _refine_positions(enc, ctx, cfg)
            enc = optimize_weights(enc.support, ctx, cfg, initial_weights=enc.weights)
            chi_after = holevo(enc, ctx)
            if chi_after - chi_before < cfg.weight_tolerance * 1e-3:
                break
            chi_before = chi_after
        rep = _report(enc, ctx, cfg, outer)
        log.debug("outer %d: %d atoms chi=%.12f max residual=%.3e at eta=%.6f",
                  outer, len(enc), rep.chi, rep.grid_residuals, rep.argmax_eta)
        if rep.converged:
            _check_outer_ring(enc, ctx)
            return enc, rep

        new = rep.argmax_eta
        near = np.min(np.abs(enc.support - new))
        if near <= 2.0 / (cfg.grid_size - 1):
            # residual peak sits on an existing atom: positions need more work
            stalls += 1
            if stalls > 5:
                rep.message = "residual peak stuck next to an existing atom"
                raise OptimizationError(rep.message, best=enc, report=rep)
            cfg_fine = replace(cfg, position_xtol=cfg.position_xtol * 0.1)
            enc = _refine_positions(enc, ctx, cfg_fine, sweeps=20)
            enc = optimize_weights(enc.support, ctx, cfg, initial_weights=enc.weights)
            continue
        if len(enc) >= cfg.max_support:
            rep.message = f"max_support={cfg.max_support} reached"
            raise OptimizationError(rep.message, best=enc, report=rep)
        support = np.append(enc.support, new)
        weights = np.append(enc.weights, 0.0)
        order = np.argsort(support)
        enc = optimize_weights(support[order], ctx, cfg, initial_weights=weights[order])

    rep = _report(enc, ctx, cfg, cfg.max_outer_iters, "max_outer_iters reached")
    raise OptimizationError(rep.message, best=enc, report=rep)


def _check_outer_ring(enc: Encoding, ctx: ChannelContext) -> None:
    if isinstance(ctx.resource, Coherent) and ctx.n_env == 0 and ctx.resource.E > 0:
        if enc.support[-1] < 1.0 - 1e-6:
            warnings.warn(
                f"optimal encoding has no outermost ring at eta=1 "
                f"(largest atom at {enc.support[-1]:.6f})", RuntimeWarning)


# -- parameter scans ----------------------------------------------------------------

@dataclass
class ScanRow:
    parameter: float
    support_size: int
    chi: float
    encoding: Encoding | None = None
    report: OptimalityReport | None = None
    ok: bool = True
    error: str = ""


def threshold_scan(make_ctx: Callable[[float], ChannelContext], params: Sequence[float],
                   cfg: OptimizerConfig | None = None, warm_start: bool = True
                   ) -> list[ScanRow]:
    """Optimize along a monotone parameter grid, warm-starting each point.

    Failed points are flagged (``ok=False``) and the scan carries on.
    """
    cfg = cfg or OptimizerConfig()
    params = np.asarray(params, dtype=float)
    diffs = np.diff(params)
    if not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ValueError("parameter grid must be strictly monotone")
    rows: list[ScanRow] = []
    seed = cfg.seed_support
    for x in params:
        ctx = make_ctx(float(x))
        run_cfg = replace(cfg, seed_support=tuple(seed) if seed is not None else None)
        try:
            enc, rep = optimize_encoding(ctx, run_cfg)
            rows.append(ScanRow(float(x), len(enc), rep.chi, enc, rep, ok=rep.converged))
            if warm_start:
                seed = tuple(sorted(set(enc.support.tolist()) | {0.0, 1.0}))
        except Exception as exc:  # scan keeps going; the row records the failure
            best = getattr(exc, "best", None)
            chi = holevo(best, ctx) if best is not None else float("nan")
            rows.append(ScanRow(float(x), len(best) if best is not None else 0, chi,
                                best, getattr(exc, "report", None), ok=False, error=str(exc)))
    return rows


def support_transitions(rows: Sequence[ScanRow]) -> list[tuple[float, float, int, int]]:
    """``(param_before, param_after, size_before, size_after)`` where the support size changes."""
    out = []
    for a, b in zip(rows, rows[1:]):
        if a.ok and b.ok and a.support_size != b.support_size:
            out.append((a.parameter, b.parameter, a.support_size, b.support_size))
    return out
