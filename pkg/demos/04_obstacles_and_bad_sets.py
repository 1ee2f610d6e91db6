"""
Brownian obstacles and bad sets
===============================

Monte Carlo hitting probabilities for slabs of thickness rho inside
(-2, 2)^2, and the measured size of the set of shifts t where the
normalized log-norm dips well below its floor.
"""
from cocyclelab import almost_mathieu
from cocyclelab.stochastic import ObstacleSpec, bad_set_series, hitting_probability, obstacle_scaling_study

# trivial cases
print("empty:", hitting_probability(ObstacleSpec.empty(), 500, 1e-2, seed=1).estimate)
print("full: ", hitting_probability(ObstacleSpec.full(), 500, 1e-2, seed=1).estimate)

# nested slabs share their paths, so the estimates are monotone in rho
study = obstacle_scaling_study([0.1, 0.2, 0.5, 1.0], walks=4000, step=2e-3, seed=7, workers=4)
for rho, p, lo, hi in study.rows():
    print(f"rho = {rho:.1f}: P = {p:.4f}  [{lo:.4f}, {hi:.4f}]  P/rho = {p / rho:.3f}")
print(f"floor c ~ {study.c_hat:.3f}, CI [{study.c_low:.3f}, {study.c_high:.3f}]")

# bad sets along Fibonacci denominators
for rep in bad_set_series(almost_mathieu(0.0, 3.0), 21, [3, 4, 5, 6], t_grid=41, x_grid=128):
    print(f"q = {rep.q:3d}: |T| = {rep.measure:.4f} (threshold {rep.threshold:.3f})")
