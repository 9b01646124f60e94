"""Tour of the disc-automorphism toolkit.

Walks through the maps everything else is built on: evaluating an
automorphism, checking the modulus identity, and watching what happens to
circles centered at the origin.
"""

import math

import numpy as np

from abeluniv import (DiscAutomorphism, apply_automorphism, circle_through_three,
                      image_circle, modulus_identity_residual,
                      radial_monotone_threshold, rotation)

phi = DiscAutomorphism(0.5, 0.0)
print("phi swaps 0 and a:", apply_automorphism(phi, 0j), apply_automorphism(phi, 0.5))
print("and is an involution:", apply_automorphism(phi, apply_automorphism(phi, 0.3 + 0.2j)))

rng = np.random.default_rng(1)
worst = max(modulus_identity_residual(complex(a), complex(z))
            for a, z in zip(0.8 * rng.uniform(size=50) * np.exp(2j * math.pi * rng.uniform(size=50)),
                            0.95 * rng.uniform(size=50) * np.exp(2j * math.pi * rng.uniform(size=50))))
print(f"modulus identity residual over 50 random pairs: {worst:.2e}")

# origin-centered circles map to circles, but not origin-centered ones
for R in (0.25, 0.5, 0.75):
    c = image_circle(0.5, R)
    print(f"|z| = {R} maps to center {c.center:.4f}, radius {c.radius:.4f}")

# the same circle recovered from three image points
ts = np.array([0.0, 2.1, 4.2])
pts = apply_automorphism(phi, 0.5 * np.exp(1j * ts))
rec = circle_through_three(*pts)
print(f"three-point recovery: center {rec.center:.4f}, radius {rec.radius:.4f}")

# |phi(r zeta)| is eventually monotone in r; the threshold depends on zeta
for angle in (0.0, math.pi / 2, math.pi):
    t = radial_monotone_threshold(phi, complex(math.cos(angle), math.sin(angle)))
    print(f"monotone-in-r threshold along angle {angle:.3f}: {t:.4f}")

# rotations are the benign automorphisms: moduli never change
mu = 0.7
rho = rotation(mu)
z = 0.9 * np.exp(1j * np.linspace(0, 2, 5))
print("rotation preserves modulus:",
      np.allclose(np.abs(apply_automorphism(rho, z)), np.abs(z)))
