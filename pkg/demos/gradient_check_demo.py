"""Finite-difference validation of the hand-derived gradients.

Every parameter of a small network is perturbed by ±ε and the central
difference is compared against the analytic backward pass.  With ReLU
the agreement is limited by kinks near zero; switching the activation
to identity makes the loss smooth and tightens the agreement further.
A deliberately huge ε shows the check actually can fail.
"""

import time

from qwgrid.network import NetworkConfig, finite_difference_check

config = NetworkConfig(
    input_channels=3,
    n_classes=2,
    grid_size=8,
    conv_layers=2,
    conv_channels=4,
    head_conv_channels=(4,),
    head_pool_after=(True,),
    head_dense_units=8,
)

start = time.perf_counter()
err = finite_difference_check(config, seed=3, epsilon=1e-4)
print(f"relu network, eps=1e-4:     max relative error {err:.2e} "
      f"({time.perf_counter() - start:.2f}s)")

err = finite_difference_check(config, seed=3, epsilon=1e-5, activation="identity")
print(f"identity network, eps=1e-5: max relative error {err:.2e}")

err = finite_difference_check(config, seed=3, epsilon=1e-1)
print(f"relu network, eps=1e-1:     max relative error {err:.2e} "
      "(hopeless step size, as it should be)")
