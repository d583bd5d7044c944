"""Time to consensus as a function of the gain lambda.

Run: python3 demos/lambda_sweep.py
"""

from zcontrol.config import apply_overrides, build_scenario
from zcontrol.presets import get_preset
from zcontrol.runner import sweep_lambda

settings = apply_overrides(get_preset("cs2_indirect_pos").settings, ["sim.dt=0.005"])
rows, lam_max = sweep_lambda(build_scenario(settings), [0.25, 0.5, 1.0, 1.5, 2.0],
                             threshold=1e-6, horizon=20.0)
for r in rows:
    print(r)
print("largest converging lambda:", lam_max)
