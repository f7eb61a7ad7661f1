"""Spontaneous emission of a single emitter in an open 1D line.

The emitter starts fully excited. The field it radiates leaves through the
absorbing ends, so |P|^2 decays as exp(-t/tau). We fit tau and compare it
with the closed-form 1D lifetime, then halve the cell size to show that the
result is converged.
"""

from sefdtd.analysis import fit_exponential_decay
from sefdtd.constants import DEFAULT_EMITTER as E
from sefdtd.emitter import simulate
from sefdtd.grid import build_free_space
from sefdtd.oracle import closed_forms

tau_cf = closed_forms(E)["tau_1d"]
print(f"closed-form lifetime: {tau_cf * 1e12:.4f} ps")

for res in (20, 40):
    grid = build_free_space(1, 20 * E.lambda0, resolution=res)
    trace = simulate(grid, E, duration=1e-12, decimation=5)
    fit = fit_exponential_decay(trace)
    print(f"{res:3d} points/lambda: tau = {fit.tau * 1e12:.4f} ps "
          f"(r^2 {fit.r_squared:.5f}, error {fit.tau / tau_cf - 1:+.2%})")
