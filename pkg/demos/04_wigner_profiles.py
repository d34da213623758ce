"""Wigner functions of averaged states and the optimal pure resource.

Averaged states are phase-symmetric, so one radial cut says everything.
The second half compares the g(E)-achieving pure state at E=3 with a
displaced phase-squeezed state.

Run:  python demos/04_wigner_profiles.py
"""

import numpy as np

from thermenc import (
    ChannelContext,
    Coherent,
    average_distribution,
    fidelity,
    flat_encoding_distribution,
    optimal_state_amplitudes,
    optimize_encoding,
    squeezed_displaced_amplitudes,
    squeezing_db,
    squeezing_r,
    wigner_radial,
)

r = np.linspace(0.0, 6.0, 13)

# %% Flat (uniform-disk) encoding at E=9: a plateau that drops at the edge.
flat = wigner_radial(flat_encoding_distribution(9.0), np.linspace(0, 9, 3001))
print(f"flat E=9 normalization: {flat.normalization():.6f}")
print(np.round(wigner_radial(flat_encoding_distribution(9.0), r).values, 4))

# %% Optimal ring encoding at E=9.2: three rings give ripples.
ctx = ChannelContext(Coherent(9.2))
enc, _ = optimize_encoding(ctx)
print(np.round(wigner_radial(average_distribution(enc, ctx), r).values, 4))

# %% Optimal pure resource vs. a displaced squeezed state with the same <a> and <n>.
opt = optimal_state_amplitudes(3.0)
n = np.arange(opt.size)
mean_a = float(np.sum(opt[1:] * opt[:-1] * np.sqrt(n[1:])))
rsq = squeezing_r(5.40)
psi = squeezed_displaced_amplitudes(mean_a, rsq)
print(f"<a> = {mean_a:.4f}, squeezing {squeezing_db(rsq):.2f} dB")
print(f"|<opt|psi>| = {fidelity(opt, psi):.5f}, |<opt|psi>|^2 = {fidelity(opt, psi, squared=True):.5f}")
