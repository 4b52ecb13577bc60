"""Constrained design search: maximize |zeta| over circuit parameters.

Differential evolution over the two junction energies and three capacitances,
under frequency-band, anharmonicity, transmon-ratio and dispersivity
constraints.  In the dispersive regime |zeta| grows like g^2/Delta, so the
optimizer pushes the coupling capacitor up and the detuning down until the
J/Delta ceiling binds.

Run:  python demos/design_search.py
"""

from zzkit import ConstraintSet, DEParams, OptimizationProblem, optimize

problem = OptimizationProblem(
    variables=(
        ("ej1_hz", 12e9, 35e9),
        ("ej2_hz", 12e9, 35e9),
        ("c1_farads", 45e-15, 90e-15),
        ("c2_farads", 45e-15, 90e-15),
        ("c12_farads", 0.5e-15, 8e-15),
    ),
    constraints=ConstraintSet(
        freq_band_hz=((5.5e9, 7.0e9), (4.0e9, 5.2e9)),
        min_abs_anharmonicity_hz=200e6,
        min_ej_ec_ratio=25.0,
        max_j_over_delta=0.25,
    ),
    de_params=DEParams(population=30, generations=40, seed=7),
    n_exc=4,
)

best, history = optimize(problem)

print("generation  best |zeta| (MHz)  feasible")
for record in history[::5]:
    print(f"{record.generation:10d} {record.best_zeta_hz / 1e6:18.3f} "
          f"{record.n_feasible:9d}")

print("\nbest design:")
for name, value in zip(problem.names, best.x):
    unit = "GHz" if name.startswith("ej") else "fF"
    scale = 1e9 if name.startswith("ej") else 1e-15
    print(f"  {name:12s} = {value / scale:9.3f} {unit}")
print(f"  zeta = {best.zeta_hz / 1e6:.3f} MHz, feasible = {best.feasible}")
print("  binding constraints (slack closest to zero):")
for name, slack in sorted(best.violations, key=lambda kv: -kv[1])[:3]:
    print(f"    {name:24s} slack = {slack:.3e}")
