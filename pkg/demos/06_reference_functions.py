"""Geodesic-ball reference functions and their inverses.

xi_k(r) and chi_l(r) are the weighted curvature integral and the l-th
quermassintegral of the geodesic ball of radius r; both are strictly
increasing (chi_1 in the sphere only up to the equator) and the sharp
bounds compare a surface against the ball with matching W_l.
"""

import numpy as np

from warpflow import ball_chi, ball_chi_inverse, ball_xi, make_space_form

hy, sp = make_space_form(-1), make_space_form(1)

print("hyperbolic reference table:")
print("    r      xi_1(r)      chi_0(r)     chi_1(r)")
for r in (0.5, 1.0, 1.5, 2.0):
    print(f"  {r:4.1f}  {ball_xi(hy, 1, r):11.6f}  {ball_chi(hy, 0, r):11.6f}"
          f"  {ball_chi(hy, 1, r):11.6f}")

print("\ninversion: recover the radius from a quermassintegral value")
for r in (0.3, 0.9, 2.2):
    w = ball_chi(hy, 0, r)
    back = ball_chi_inverse(hy, 0, w)
    print(f"  chi_0({r}) = {w:.8f}  ->  chi_0^-1 = {back:.12f}")

print("\nsphere ambient: chi_1 (boundary area / n) peaks at the equator")
for r in (0.5, 1.0, np.pi / 2, 2.0):
    print(f"  chi_1({r:.4f}) = {ball_chi(sp, 1, r):.8f}")
print("so its inverse is taken on the monotone branch below pi/2:")
w = ball_chi(sp, 1, 1.2)
print(f"  chi_1^-1({w:.6f}) = {ball_chi_inverse(sp, 1, w):.12f}")
