"""
Complexified profiles and quantized acceleration
=================================================

The almost Mathieu cocycle at E = 0, lam = 3 with golden-mean frequency.
We push the phase into the complex strip, x -> x + i t, and watch the
top exponent as a function of t: it is convex, piecewise affine, and its
slopes are integer multiples of 2 pi.
"""
import numpy as np

from cocyclelab import almost_mathieu
from cocyclelab.lyapunov import acceleration, acceleration_profile, profile

c = almost_mathieu(0.0, 3.0)

# L^1 along a symmetric window of imaginary shifts
ts = np.linspace(-0.2, 0.2, 9)
prof = profile(c, ts, n=377, M=1024)
for t, v in zip(prof.t, prof.column(1)):
    print(f"t = {t:+.3f}   L^1 = {v:.6f}   ln(1.5) + 2 pi |t| = {np.log(1.5) + 2 * np.pi * abs(t):.6f}")

# second differences stay nonnegative
print("most negative second difference:", prof.convexity_violation(1))

# one-sided slope at t = 0 from a geometric ladder, snapped to an integer
ap = acceleration_profile(c, n=377, M=1024, base=0.0, eps0=0.05, levels=6)
entry = acceleration(ap, 0.0, 1, special_linear=True).entries[0]
print(f"acceleration omega^1 = {entry.omega_upper:.5f} -> snapped {entry.snapped:g}")

# off the spectrum the exponent is flat near t = 0 and the acceleration is 0
far = almost_mathieu(6.0, 3.0)
ap = acceleration_profile(far, n=377, M=1024, base=0.0, eps0=0.05, levels=6)
print("E = 6: omega^1 =", round(acceleration(ap, 0.0, 1, special_linear=True).entries[0].omega_upper, 5))
