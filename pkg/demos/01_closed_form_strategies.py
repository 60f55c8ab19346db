"""
Closed-form optimal strategies for synthetic processes
======================================================

True auto-covariances of white-noise and AR(1) processes have banded
inverses, so the global-minimum strategy is known in closed form. We compare
it with the generic solver and then impose target returns under a linear
drift.
"""

import numpy as np

from tdmv.model import Layer, ProcessSpec
from tdmv.optimizer import constrained_strategy, global_minimum_strategy, linear_drift
from tdmv.procgen import closed_form_global_strategy, price_autocov

np.set_printoptions(precision=4, suppress=True)
T = 10

# AR(1) price fluctuations: the interior weights are (1 - a) times the
# boundary weights
price = ProcessSpec.ar1(0.8)
print("AR(1) price, closed form :", closed_form_global_strategy(price, T).weights)
print("AR(1) price, solver      :", global_minimum_strategy(price_autocov(price, T)).weights)

# AR(1) increments: only the first two positions are used
incr = ProcessSpec.ar1(0.8, layer=Layer.INCREMENT)
print("AR(1) increments         :", closed_form_global_strategy(incr, T).weights)

# a drift mu_t = 1e-4 t and rising target returns; at the high target the
# strategy opens with a short position
sigma = price_autocov(price, T)
mu = linear_drift(T, 1e-4)
for target in (4e-5, 4e-4, 1e-3):
    st = constrained_strategy(sigma, mu, target)
    print(f"target {target:.0e}:", st.weights)
