"""Weak coherent light through a noisy lossy channel.

At small energies one ring already nearly saturates the lossy-channel
bound, and both approach eta E log2((1 + n_ch) / n_ch).

Run:  python demos/03_low_energy_lossy.py
"""

from thermenc import ChannelContext, Coherent, lossy_upper_bound, low_energy_approx, ring_capacity

eta = 0.4
print("   E      n_env   one ring      first order   lossy bound")
for n_env in (0.2, 1.0, 5.0):
    for E in (1e-1, 1e-2, 1e-3):
        chi = ring_capacity(ChannelContext(Coherent(E), n_env), eta)
        print(f"{E:7.0e}  {n_env:5.1f}   {chi:.6e}  {low_energy_approx(E, eta, n_env):.6e}"
              f"  {lossy_upper_bound(E, eta, n_env):.6e}")
