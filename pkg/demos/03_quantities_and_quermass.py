"""Scalar integrals: momenta, weighted volumes, quermassintegrals.

Prints a full quantity report for surfaces in several ambients and checks
the divergence-theorem lower bound for the boundary momentum, which is an
equality exactly on round slices.
"""

import numpy as np

from warpflow import (
    full_report,
    make_custom,
    make_seed_surface,
    make_space_form,
    sphere_grid,
)

g = sphere_grid(64, 128)
cases = [
    ("euclidean ball r=1", make_space_form(0), dict(family="round", r0=1.0)),
    ("hyperbolic ball r=1", make_space_form(-1), dict(family="round", r0=1.0)),
    ("cosh ambient (a=0.1), perturbed", make_custom("cosh", a=0.1),
     dict(family="legendre", r0=1.0, eps=0.15, l=2)),
]

for name, space, seed in cases:
    params = dict(seed)
    family = params.pop("family")
    graph = make_seed_surface(space, g, family, **params)
    rep = full_report(space, graph, ks=(1.0, 2.0))
    print(f"--- {name} ---")
    print(f"  area = {rep.area:.6f}   volume = {rep.volume:.6f}")
    print(f"  momenta: k=1 -> {rep.momentum(1):.6f}, k=2 -> {rep.momentum(2):.6f}")
    if rep.quermass is not None:
        print(f"  W = {np.round(rep.quermass, 6)}")
        print(f"  Gauss-Bonnet residual = {rep.gauss_bonnet_residual:.2e}")
    else:
        print(f"  inner boundary area |Gamma| = {rep.gamma_area:.6f}")
    n, k = 2, 1.0
    gap = rep.momentum(k) - (n + k) * rep.weighted_vol(k) - rep.gamma_term(k)
    print(f"  divergence-theorem gap (0 iff slice): {gap:.3e}\n")
