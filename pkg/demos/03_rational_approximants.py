"""
Rational approximants
=====================

Continued-fraction convergents p/q of the golden mean, exact exponents
at rational frequencies via spectral radii, and how they compare with the
irrational exponent. The gaps are small for odd-index approximants and
jump when the energy falls into a gap of the periodic operator.
"""
import warnings

from cocyclelab import Frequency, almost_mathieu
from cocyclelab.cocycle import approximants
from cocyclelab.lyapunov import finite_scale_exponent, rational_mean_exponent

c = almost_mathieu(0.0, 3.0)
irr = finite_scale_exponent(c, 1, 1597, 4096)
print(f"irrational L_1 ~ {irr:.6f}")

with warnings.catch_warnings():
    warnings.simplefilter("ignore", RuntimeWarning)
    for a in approximants(c.freq, 8):
        rat = rational_mean_exponent(c.with_frequency(Frequency.rational(a.p, a.q)), 1, 4096)
        print(f"{a.p:3d}/{a.q:<3d}  L(p/q) = {rat:.6f}   gap = {abs(rat - irr):.4f}")

# finite n at a rational frequency converges to the exact value like 1/n
r = almost_mathieu(0.0, 3.0, freq=Frequency.rational(1, 7))
exact = rational_mean_exponent(r, 1, 4096)
for m in (1, 4, 16, 64):
    print(f"n = {7 * m:4d}: |L_n - L| = {abs(finite_scale_exponent(r, 1, 7 * m, 1024) - exact):.5f}")
