"""Smoothed HK opinions: clusters without control, consensus with direct control.

Run: python3 demos/hk_opinions.py
"""

import numpy as np

from zcontrol import ControlSpec, InitialCondition, ModelConfig, SimConfig, SmoothedHK, simulate
from zcontrol import consensus_time, fit_decay_rate

model = ModelConfig(order=1, agents=10, dim=2)
ic = InitialCondition(((0.0, 4.0),))

for alpha in (0.1, 1.6, 300.0):
    kernel = SmoothedHK(alpha, 0.8)
    free = simulate(model, kernel, SimConfig(dt=1e-2, T=20, ic=ic, seed=1))
    ctrl = simulate(model, kernel, SimConfig(dt=1e-2, T=20, ic=ic, seed=1,
                                             control=ControlSpec("direct", 1.0)))
    print(f"alpha={alpha:6g}  free Gamma(20)={free.gamma[-1]:.2e}  "
          f"controlled Gamma(20)={ctrl.gamma[-1]:.2e}  "
          f"fitted rate {fit_decay_rate(ctrl.gamma, ctrl.times):.3f} (expect -2)")

# the controlled decay does not depend on the kernel
t_star = consensus_time(ctrl.gamma, ctrl.times, 1e-6)
print(f"time to Gamma <= 1e-6 with lambda=1: {t_star:.2f}  "
      f"(analytic {np.log(ctrl.gamma[0] / 1e-6) / 2:.2f})")
