"""Cucker-Smale flocking: velocity consensus steered through the positions.

The control enters the position equation and is found each stage by a
minimum-norm least-squares solve. Run: python3 demos/flocking_indirect.py
"""

import numpy as np

from zcontrol import ControlSpec, CuckerSmale, InitialCondition, ModelConfig, SimConfig, simulate

model = ModelConfig(order=2, agents=10, dim=2)
ic = InitialCondition(((-5.0, 5.0), (-2.0, 2.0)))
kernel = CuckerSmale(K=1.0, beta=1.0)

for mode in ("none", "direct", "vel_via_pos"):
    tr = simulate(model, kernel, SimConfig(dt=1e-3, T=20, ic=ic, seed=0, record_every=2000,
                                           control=ControlSpec(mode, 1.0)))
    u = np.abs(tr.controls).max(axis=(1, 2))
    print(f"{mode:12s} Gamma: " + " ".join(f"{g:.1e}" for g in tr.gamma))
    print(f"{'':12s} max|u|: " + " ".join(f"{x:.1e}" for x in u))
    if tr.diagnostics is not None:
        print(f"{'':12s} rank {int(tr.diagnostics['rank'][0])} of {model.agents * model.dim}, "
              f"max compatibility defect {tr.max_compat_defect:.1e}")
