"""Black-box route from a sampled impedance to Kerr Hamiltonian parameters.

A two-mode lossless Foster network is synthesized, its impedance sampled on a
frequency grid, refit with the pole-relocation rational fitter, decomposed
back into parallel-LC stages, and finally quantized: each mode's zero-point
phase across a shared junction sets the self- and cross-Kerr coefficients.

Run:  python demos/foster_pipeline.py
"""

import numpy as np

from zzkit import FosterMode, foster_from_fit, kerr_from_foster, vector_fit
from zzkit import participation_from_foster
from zzkit.circuit import foster_impedance


def mode_from(freq_hz, z_ohms):
    omega = 2 * np.pi * freq_hz
    return FosterMode(z_ohms / omega, 1.0 / (z_ohms * omega))


truth = [mode_from(4.2e9, 120.0), mode_from(6.9e9, 95.0)]
omegas = 2 * np.pi * np.linspace(1e9, 10e9, 700)
samples = foster_impedance(truth, omegas)

fit = vector_fit((omegas, samples), n_poles=4)
print(f"rational fit error: {fit.fit_error:.2e}")
for p in fit.poles[::2]:
    print(f"  pole at {abs(p) / (2 * np.pi) / 1e9:.6f} GHz, "
          f"Re = {p.real:.3e} rad/s")

recovered = foster_from_fit(fit)
print("\nrecovered Foster stages:")
for m, t in zip(recovered, truth):
    print(f"  L = {m.inductance_l * 1e9:8.4f} nH (true {t.inductance_l * 1e9:8.4f}), "
          f"C = {m.capacitance_c * 1e15:8.3f} fF (true {t.capacitance_c * 1e15:8.3f})")

ej = 18e9
participation = participation_from_foster(recovered, ej)
params = kerr_from_foster(recovered, participation)
print(f"\nKerr parameters from a shared {ej / 1e9:.0f} GHz junction:")
for k in range(2):
    print(f"  mode {k}: {params.mode_freqs_hz[k] / 1e9:.4f} GHz, "
          f"alpha = {params.self_kerr_hz[k] / 1e6:.2f} MHz")
chi = params.cross_kerr_hz[0, 1]
a1, a2 = -params.self_kerr_hz
print(f"  cross-Kerr chi = {chi / 1e6:.2f} MHz "
      f"(= 2 sqrt(a1 a2) = {2 * np.sqrt(a1 * a2) / 1e6:.2f} MHz)")
