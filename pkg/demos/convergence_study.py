"""Measure the oracle-loss decay rate and the S_n/V_n rank agreement.

Runs a small convergence experiment (tuned pure filter, post-burn-in
oracle loss at growing sample sizes) and an ordering study (does sorting
adaptation parameters by the observable objective sort them by the
oracle loss?), printing both tables.
"""

import numpy as np

from voltrack import (
    FuncSpec,
    Scenario,
    convergence_experiment,
    ordering_agreement,
)

scenario = Scenario(
    mu_spec=FuncSpec("constant", (0.05,)),
    v_spec=FuncSpec("sinusoid", (0.1, 0.05, 1.0, 0.0)),
)

print("oracle-loss decay, pure filter, tuned theta per sample size")
print("-" * 60)
result = convergence_experiment(scenario, k=0, n_values=(500, 2000, 8000), seeds=10)
print(f"{'n':>6} {'mean V_n':>14}")
for n, mse in zip(result.n_values, result.mse_values):
    print(f"{n:>6} {mse:>14.6e}")
print(
    f"fitted log-log slope {result.fitted_slope:.4f} "
    f"(theory {result.theoretical_slope:.4f})"
)

print()
print("observable vs oracle ordering across a theta grid, n=2000")
print("-" * 60)
ordering = ordering_agreement(
    scenario, np.logspace(-1.0, 1.2, 12), n=2000, seeds=10
)
print(f"{'theta':>10} {'mean S_n':>12} {'mean V_n':>12}")
for theta, sn, vn in zip(ordering.theta_grid, ordering.sn_values, ordering.vn_values):
    print(f"{theta:>10.4f} {sn:>12.6f} {vn:>12.6f}")
print(
    f"kendall tau = {ordering.kendall_tau:.4f}, "
    f"argmin match = {ordering.argmin_match}"
)
