"""Fixed-step RK4 simulation of controlled and uncontrolled models."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .control_direct import rhs_direct, zero_sum_defect
from .control_indirect import MODE_ORDER, MODE_SLOT, MODES, check_kernel, indirect_control
from .core import ConfigurationError, ModelConfig, build_interaction_matrix
from .dynamics import average_top, consensus_gamma, coupling, rhs_uncontrolled
from .lsq import min_agents

CONTROL_MODES = ("none", "direct") + MODES
DIAG_FIELDS = ("rank", "residual", "sigma_max", "sigma_min", "compat_defect")


class BlowUpError(RuntimeError):
    """The state became non-finite during integration."""

    def __init__(self, message, time=None, step=None, mode=None, diagnostics=None):
        super().__init__(message)
        self.time = time
        self.step = step
        self.mode = mode
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class ControlSpec:
    mode: str = "none"
    lam: float = 1.0
    # False: indirect controls are solved once per step and held over the stages
    stage_solve: bool = True


@dataclass(frozen=True)
class InitialCondition:
    """Seeded uniform boxes per state block, or explicit arrays.

    ``boxes[r]`` is the ``(low, high)`` range of block r; the last box is
    reused when fewer boxes than blocks are given. With ``dim_normalized``
    the boxes are shrunk by ``1/sqrt(d)`` so that the expected squared norm
    of an agent state does not grow with the dimension.
    """

    boxes: tuple = ((-1.0, 1.0),)
    dim_normalized: bool = False
    arrays: Optional[np.ndarray] = None


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    T: float = 10.0
    control: ControlSpec = field(default_factory=ControlSpec)
    record_every: int = 1
    seed: int = 0
    ic: InitialCondition = field(default_factory=InitialCondition)
    store_states: bool = True


@dataclass
class Trajectory:
    times: np.ndarray
    states: Optional[np.ndarray]
    controls: np.ndarray
    gamma: np.ndarray
    drift: np.ndarray
    diagnostics: Optional[dict]
    mode: str
    max_drift: float
    max_zero_sum_defect: float
    max_compat_defect: float
    degenerate_steps: int = 0

    def __len__(self):
        return len(self.times)


def validate(model, kernel, sim):
    """Raise ConfigurationError for inconsistent settings."""
    ctrl = sim.control
    if ctrl.mode not in CONTROL_MODES:
        raise ConfigurationError(f"unknown control mode {ctrl.mode!r}; choose from {CONTROL_MODES}")
    if not (math.isfinite(sim.dt) and sim.dt > 0):
        raise ConfigurationError(f"dt must be positive, got {sim.dt}")
    if not (math.isfinite(sim.T) and sim.T > 0):
        raise ConfigurationError(f"T must be positive, got {sim.T}")
    if sim.dt > sim.T:
        raise ConfigurationError("dt must not exceed T")
    if sim.record_every < 1:
        raise ConfigurationError("record_every must be >= 1")
    if ctrl.mode != "none":
        if not (math.isfinite(ctrl.lam) and ctrl.lam > 0):
            raise ConfigurationError(f"lambda must be positive, got {ctrl.lam}")
        if model.order not in (1, 2, 3):
            raise ConfigurationError("controlled runs support orders 1, 2 and 3")
        if model.agents < 2:
            raise ConfigurationError("controlled runs need at least 2 agents")
    if ctrl.mode in MODES:
        if model.order != MODE_ORDER[ctrl.mode]:
            raise ConfigurationError(f"mode {ctrl.mode} needs order {MODE_ORDER[ctrl.mode]}, got {model.order}")
        check_kernel(kernel)
        need = min_agents(model.dim)
        if model.agents < need:
            raise ConfigurationError(
                f"indirect control in d={model.dim} needs N >= {need}, got N={model.agents}"
            )
    if sim.ic.arrays is not None:
        shape = np.shape(sim.ic.arrays)
        if shape != (model.order, model.agents, model.dim):
            raise ConfigurationError(f"initial arrays have shape {shape}, expected "
                                     f"{(model.order, model.agents, model.dim)}")
    else:
        for lo, hi in sim.ic.boxes:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ConfigurationError(f"invalid initial box ({lo}, {hi})")


def initial_state(model, sim):
    ic = sim.ic
    if ic.arrays is not None:
        return np.array(ic.arrays, dtype=float)
    rng = np.random.default_rng(sim.seed)
    scale = 1.0 / math.sqrt(model.dim) if ic.dim_normalized else 1.0
    X = np.empty((model.order, model.agents, model.dim))
    for r in range(model.order):
        lo, hi = ic.boxes[min(r, len(ic.boxes) - 1)]
        X[r] = rng.uniform(lo * scale, hi * scale, size=(model.agents, model.dim))
    return X


def _control_law(model, kernel, ctrl):
    """``(slot, law)`` with ``law(X, A) -> (U, diag)``; slot is None without control."""
    if ctrl.mode == "none":
        return None, None
    if ctrl.mode == "direct":
        # the integrator calls rhs_direct itself; only the slot matters here
        return model.order - 1, None
    return MODE_SLOT[ctrl.mode], lambda X, A: indirect_control(X, kernel, ctrl.lam, ctrl.mode)


def simulate(model: ModelConfig, kernel, sim: SimConfig, X0=None) -> Trajectory:
    """Integrate the configured system with classical RK4.

    Controls are state feedback evaluated at every RK4 stage (unless
    ``stage_solve`` is off for an indirect mode). Records are taken every
    ``record_every`` steps starting at t = 0.

    Raises
    ------
    ConfigurationError
        Before stepping, for invalid settings.
    BlowUpError
        When the state or control becomes non-finite.
    """
    validate(model, kernel, sim)
    ctrl = sim.control
    X = initial_state(model, sim) if X0 is None else np.array(X0, dtype=float)
    slot, law = _control_law(model, kernel, ctrl)
    direct = ctrl.mode == "direct"
    hold = ctrl.mode in MODES and not ctrl.stage_solve

    def evaluate(Y, U=None):
        if not np.isfinite(Y).all():
            raise BlowUpError(f"non-finite state near t={t:g} (step {n}, mode {ctrl.mode})",
                              time=t, step=n, mode=ctrl.mode)
        try:
            A = build_interaction_matrix(Y[0], kernel, assume_finite=True)
        except ValueError as exc:
            # distances overflow for huge but finite states
            raise BlowUpError(f"kernel assembly failed near t={t:g} (step {n}): {exc}",
                              time=t, step=n, mode=ctrl.mode) from exc
        if direct:
            dY, U = rhs_direct(Y, kernel, ctrl.lam, A, balanced=True)
            return dY, U, None
        dY = rhs_uncontrolled(Y, kernel, A)
        diag = None
        if law is not None:
            if U is None:
                U, diag = law(Y, A)
            dY[slot] += U
        return dY, U, diag

    nsteps = int(math.floor(sim.T / sim.dt + 1e-9))
    re = sim.record_every
    nrec = nsteps // re + 1
    N, d = model.agents, model.dim
    times = np.empty(nrec)
    states = np.empty((nrec,) + X.shape) if sim.store_states else None
    controls = np.zeros((nrec, N, d))
    gamma = np.empty(nrec)
    drift = np.empty(nrec)
    diags = {k: np.zeros(nrec) for k in DIAG_FIELDS} if ctrl.mode in MODES else None
    if diags is not None:
        diags["degenerate"] = np.zeros(nrec, dtype=bool)

    avg0 = average_top(X)
    max_drift = max_zs = max_compat = 0.0
    degenerate = 0

    def f(Y):
        return evaluate(Y)[0]

    h, h2, h6 = sim.dt, 0.5 * sim.dt, sim.dt / 6.0
    t, n = 0.0, 0
    # overflow is detected by the finiteness checks, not by warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(nsteps + 1):
            t = n * h
            dX, U, diag = evaluate(X)
            if not np.isfinite(dX).all():
                raise BlowUpError(f"non-finite state at t={t:g} (step {n}, mode {ctrl.mode})",
                                  time=t, step=n, mode=ctrl.mode, diagnostics=diag)
            if n == 0 and ctrl.mode in MODES:
                # the top-order equation is never modified by indirect control
                A0 = build_interaction_matrix(X[0], kernel)
                if not np.allclose(dX[-1], coupling(A0, X[-1]), rtol=0, atol=1e-12):
                    raise RuntimeError("initial top-order derivative is not of consensus form")
            shift = average_top(X) - avg0
            dr = math.sqrt(float(shift @ shift))
            max_drift = max(max_drift, dr)
            if U is not None:
                max_zs = max(max_zs, zero_sum_defect(U))
            if diag is not None:
                max_compat = max(max_compat, diag.compat_defect)
                degenerate += diag.degenerate
            if n % re == 0:
                i = n // re
                times[i] = t
                if states is not None:
                    states[i] = X
                if U is not None:
                    controls[i] = U
                gamma[i] = consensus_gamma(X)
                drift[i] = dr
                if diag is not None:
                    diags["rank"][i] = diag.numerical_rank
                    diags["residual"][i] = diag.residual_norm
                    diags["sigma_max"][i] = diag.sigma_max
                    diags["sigma_min"][i] = diag.sigma_min_positive
                    diags["compat_defect"][i] = diag.compat_defect
                    diags["degenerate"][i] = diag.degenerate
            if n == nsteps:
                break
            if hold:
                def f(Y, U=U):
                    return evaluate(Y, U)[0]
            k1 = dX
            k2 = f(X + h2 * k1)
            k3 = f(X + h2 * k2)
            k4 = f(X + h * k3)
            X = X + h6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    return Trajectory(
        times=times, states=states, controls=controls, gamma=gamma, drift=drift,
        diagnostics=diags, mode=ctrl.mode, max_drift=max_drift,
        max_zero_sum_defect=max_zs, max_compat_defect=max_compat,
        degenerate_steps=degenerate,
    )


def fit_decay_rate(gamma, times, floor=1e-10):
    """Least-squares slope of ``log gamma`` against time where ``gamma > floor``."""
    gamma = np.asarray(gamma, dtype=float)
    times = np.asarray(times, dtype=float)
    mask = gamma > floor
    if np.count_nonzero(mask) < 3:
        raise ValueError("fewer than 3 points above the floor")
    slope, _ = np.polyfit(times[mask], np.log(gamma[mask]), 1)
    return float(slope)


def consensus_time(gamma, times, threshold):
    """First recorded time with ``gamma <= threshold``, or None."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    hits = np.flatnonzero(np.asarray(gamma) <= threshold)
    return float(times[hits[0]]) if hits.size else None
