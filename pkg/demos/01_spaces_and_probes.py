"""Ambient spaces: warpings, potentials, and assumption probes.

Builds the three space forms and two custom warped products, prints their
radial data at a few radii, and samples the growth conditions that the
star-shaped inequality machinery relies on.
"""

import numpy as np

from warpflow import make_custom, make_space_form, probe_assumptions

spaces = {
    "euclidean": make_space_form(0),
    "hyperbolic": make_space_form(-1),
    "sphere": make_space_form(1),
    "power_cubic(beta=1)": make_custom("power_cubic", beta=1.0),
    "cosh (a=0.1)": make_custom("cosh", a=0.1),
}

radii = np.array([0.5, 1.0, 2.0])
print("warping data at r = 0.5, 1, 2")
for name, space in spaces.items():
    lam, dlam, d2lam = space.warp(radii)
    phi = space.phi(radii)
    print(f"  {name:22s} lambda={np.round(lam, 4)}  lambda'={np.round(dlam, 4)}  "
          f"Phi={np.round(phi, 4)}")

print("\nassumption probes (advisory, sampled on a geometric grid):")
for name in ("hyperbolic", "power_cubic(beta=1)", "cosh (a=0.1)"):
    rep = probe_assumptions(spaces[name], r_max=30.0, samples=100)
    print(f"\n--- {name} ---")
    for line in rep.summary_lines():
        print(line)
