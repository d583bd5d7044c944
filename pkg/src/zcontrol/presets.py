"""Scenario presets mirroring the opinion-dynamics and flocking experiments.

Exact initial data of the original experiments are not published; the boxes
below are representative choices. Uncontrolled Cucker-Smale presets with
``beta = 1`` are chosen so that velocity consensus is not reached by T = 20.
"""

from dataclasses import dataclass, field

from .config import ConfigurationError, dump_config


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    description: str
    settings: dict
    # one run per variant; each variant is a dict of overrides on top of settings
    variants: tuple = field(default=({},))

    def variant_settings(self):
        """List of ``(label, settings)`` pairs, one per run."""
        out = []
        for var in self.variants:
            merged = dict(self.settings)
            merged.update({k: str(v) for k, v in var.items()})
            label = "_".join(f"{k.split('.')[-1]}={v}" for k, v in var.items()) or "base"
            out.append((label, merged))
        return out

    def export(self):
        return dump_config(self.settings)


def _s(**kv):
    return {k.replace("__", "."): str(v) for k, v in kv.items()}


HK_BASE = _s(run__kind="simulate", model__order=1, model__agents=10, model__dim=2,
             kernel__type="smoothed_hk", kernel__alpha=1.6, kernel__skew_strength=0.8,
             sim__dt=1e-3, sim__T=20, sim__record_every=10, ic__boxes="0:4")

CS_BOXES = "-5:5, -2:2, -1:1"
CS3_BOXES = "-1:1, -0.1:0.1, -1:1"


def _cs(order, mode="none", T=20, boxes=CS_BOXES, **extra):
    base = _s(run__kind="simulate", model__order=order, model__agents=10, model__dim=2,
              kernel__type="cucker_smale", kernel__K=1, kernel__beta=1,
              control__mode=mode, control__lambda=1, sim__dt=1e-3, sim__T=T,
              sim__record_every=10, ic__boxes=boxes)
    base.update(_s(**extra))
    return base


def _preset(name, description, settings, variants=({},), expected=""):
    settings = dict(settings)
    settings["run.name"] = name
    if expected:
        settings["run.expected"] = expected
    return ScenarioPreset(name, description, settings, tuple(variants))


PRESETS = {
    p.name: p
    for p in [
        _preset(
            "hk_alpha_sweep",
            "first-order smoothed HK opinions, four kernel steepnesses, free and direct-controlled",
            HK_BASE,
            [{"kernel.alpha": a, "control.mode": m}
             for a in (0.1, 1.6, 5, 300) for m in ("none", "direct")],
            expected="alpha=300 free: clusters persist; controlled: consensus at rate 2*lambda",
        ),
        _preset(
            "hk_direct",
            "first-order smoothed HK (alpha=1.6) under direct control",
            {**HK_BASE, "control.mode": "direct", "control.lambda": "1"},
            expected="consensus by lambda*T ~ 10",
        ),
        _preset(
            "cs2_uncontrolled",
            "second-order Cucker-Smale without control, beta=0.1 (T=50) and beta=1 (T=20)",
            _cs(2),
            [{"kernel.beta": 0.1, "sim.T": 50}, {"kernel.beta": 1, "sim.T": 20}],
            expected="beta=0.1 reaches velocity consensus; beta=1 does not by T=20",
        ),
        _preset("cs2_direct", "second-order Cucker-Smale, direct control on velocities",
                _cs(2, "direct"), expected="consensus"),
        _preset("cs2_indirect_pos", "second-order Cucker-Smale, velocity consensus through positions",
                _cs(2, "vel_via_pos"), expected="consensus, controls vanish"),
        _preset("cs2_indirect_d3", "second-order Cucker-Smale in d=3 with N=20, control through positions",
                _cs(2, "vel_via_pos", model__agents=20, model__dim=3),
                expected="lambda=1 converges"),
        _preset("cs3_uncontrolled", "third-order Cucker-Smale without control",
                _cs(3, boxes=CS3_BOXES), expected="no acceleration consensus by T=20"),
        _preset("cs3_direct", "third-order Cucker-Smale, direct control on accelerations",
                _cs(3, "direct", boxes=CS3_BOXES), expected="consensus"),
        _preset("cs3_indirect_pos", "third-order Cucker-Smale, acceleration consensus through positions",
                _cs(3, "acc_via_pos", T=20, boxes=CS3_BOXES),
                expected="consensus, controls persist"),
        _preset("cs3_indirect_vel", "third-order Cucker-Smale, acceleration consensus through velocities",
                _cs(3, "acc_via_vel", T=20, boxes=CS3_BOXES),
                expected="consensus, controls vanish"),
        _preset(
            "direct_highdim",
            "direct control with N=50 in d=10, 30, 50 for orders 1 to 3",
            _cs(1, "direct", T=10, model__agents=50, sim__store_states="false",
                ic__boxes="-1:1", ic__dim_normalized="true"),
            [{"model.order": k, "model.dim": d} for k in (1, 2, 3) for d in (10, 30, 50)],
            expected="model-time to consensus independent of d",
        ),
        _preset(
            "rank_table",
            "numerical rank of the indirect-control matrix at random states, N=150",
            _s(run__kind="rank", model__order=2, model__agents=150, model__dim=3,
               kernel__type="cucker_smale", kernel__K=1, kernel__beta=1,
               rank__dims="3,4,5,10,20,30", ic__boxes="-1:1"),
            expected="ranks 444, 590, 735, 1445, 2790, 4035",
        ),
    ]
}


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigurationError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
