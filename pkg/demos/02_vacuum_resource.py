"""Vacuum resource in a thermal environment.

With a vacuum input the only thing the encoder controls is how much
environment light leaks in. For n_env below about 8.68 two codewords are
optimal: the environment's thermal state (eta=0) and the vacuum (eta=1).

Run:  python demos/02_vacuum_resource.py
"""

from thermenc import (
    ChannelContext,
    Thermal,
    optimize_encoding,
    two_codeword_capacity,
    two_codeword_threshold,
)

# %% Closed form against the numerical optimizer.
print(" n_env   q0(closed)  chi(closed)  chi(optimizer)  atoms")
for n_env in (0.5, 1.0, 2.0, 4.0, 8.0, 9.0, 12.0):
    q0, chi = two_codeword_capacity(n_env)
    enc, rep = optimize_encoding(ChannelContext(Thermal(0.0), n_env))
    print(f"{n_env:6.2f}  {q0:.6f}    {chi:.6f}     {rep.chi:.6f}       {len(enc)}"
          f"  {enc.support.round(4).tolist()}")

# %% Where a third codeword appears.
n_star = two_codeword_threshold()
print(f"\nthird codeword needed above n_env = {n_star:.4f}")

# %% The two-codeword value creeps towards one bit very slowly.
for n in (1e1, 1e2, 1e3, 1e4, 1e6):
    print(f"n_env = {n:8.0e}: chi = {two_codeword_capacity(n)[1]:.6f}")
