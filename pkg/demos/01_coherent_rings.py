"""Rings of a coherent resource in a vacuum environment.

A coherent state of energy E, attenuated by eta and phase-randomized,
becomes a "ring". With a vacuum environment every codeword is pure, so the
Holevo information is just the entropy of the averaged Poisson mixture.

Run:  python demos/01_coherent_rings.py
"""

import numpy as np

from thermenc import (
    ChannelContext,
    Coherent,
    g_function,
    one_ring_capacity,
    optimize_encoding,
    single_ring_threshold,
    threshold_scan,
)
from thermenc.optimizer import support_transitions

# %% A single ring at full energy is optimal only for small E.
# The crossover solves H(Poisson(E)) = E / ln 2.
amp = single_ring_threshold()
print(f"one ring stops being optimal at |alpha| = {amp:.5f}  (E = {amp ** 2:.5f})")

# %% Optimal encodings for a few energies.
for E in (1.1, 3.5, 9.2):
    enc, rep = optimize_encoding(ChannelContext(Coherent(E)))
    rings = ", ".join(f"{e:.3f} (p={p:.3f})" for e, p in zip(enc.ring_energies(E), enc.weights))
    print(f"E={E:4}: chi={rep.chi:.4f} bits, g(E)={g_function(E):.4f}, rings at energies {rings}")
    print(f"        max KKT residual {rep.grid_residuals:.1e} on {rep.grid_size} grid points")

# %% New rings are born at the origin and drift outwards as E grows.
grid = np.linspace(0.5, 12.0, 24)
rows = threshold_scan(lambda E: ChannelContext(Coherent(E)), grid)
print("\n   E    rings   chi     one-ring")
for r in rows:
    print(f"{r.parameter:6.2f}  {r.support_size:3d}   {r.chi:.4f}  {one_ring_capacity(r.parameter):.4f}")
for lo, hi, a, b in support_transitions(rows):
    print(f"support grows {a} -> {b} between E={lo:.2f} and E={hi:.2f}")
