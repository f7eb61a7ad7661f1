"""Emitter at the center of a semiconductor microdisk.

First the disk permittivity is set to 1, which must reproduce the open 2D
result exactly. Then the disk is made of GaAs-like material: light
reflected from the rim returns to the emitter after about 70 fs and briefly
pushes the population back up, which open space never does.
"""

from sefdtd.scenarios import run_scenario

vac = run_scenario("microdisk-vacuum", write=False)
print(f"eps = 1 vs free space, max relative difference: {vac.quantities['free_space.Linf_rel'][0]:.1e}")

disk = run_scenario("microdisk", {"duration": 2e-13}, write=False)
pop = disk.trace.population
print(f"eps = 11.56: {disk.quantities['revivals'][0]} population rise(s), max |P|^2 {pop.max():.4f}")
for i in range(0, len(pop), max(1, len(pop) // 10)):
    print(f"  t = {disk.trace.t[i] * 1e15:6.1f} fs  |P|^2 = {pop[i]:.6f}")
