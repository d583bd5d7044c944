"""Run scenarios, emit CSV/JSON artifacts and sweep the decay rate."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from .control_indirect import RANK_ABS_FLOOR, assemble_LB
from .integrate import BlowUpError, consensus_time, fit_decay_rate, simulate
from .lsq import expected_rank, numerical_rank

FMT = "%.17g"

GAMMA_HEADER = "t,gamma"
CONTROLS_HEADER = "t,agent,component,value"
TRAJECTORY_HEADER = "t,block,agent,component,value"
DIAGNOSTICS_HEADER = "t,rank,residual,sigma_max,sigma_min,compat_defect"
RANKS_HEADER = "N,d,dimension,rank,expected"


@dataclass
class RunReport:
    preset: str
    variant: str = "base"
    status: str = "ok"
    consensus_time: Optional[float] = None
    decay_rate: Optional[float] = None
    gamma_final: Optional[float] = None
    max_average_drift: Optional[float] = None
    max_zero_sum_defect: Optional[float] = None
    max_compat_defect: Optional[float] = None
    rank_observed: Optional[list] = None
    rank_expected: Optional[list] = None
    min_sigma_max: Optional[float] = None
    max_residual: Optional[float] = None
    degenerate_steps: Optional[int] = None
    max_control_final: Optional[float] = None

    def as_dict(self):
        return asdict(self)


def _long_table(times, values):
    """Flatten ``values[t, ...]`` into rows ``(t, i0, i1, ..., value)``."""
    idx = np.indices(values.shape).reshape(values.ndim, -1).T
    t = np.asarray(times)[idx[:, 0]]
    return np.column_stack([t, idx[:, 1:], values.ravel()])


def _save(path, header, table, int_cols=()):
    ncol = len(header.split(","))
    fmt = ["%d" if i in int_cols else FMT for i in range(ncol)]
    np.savetxt(path, np.asarray(table).reshape(-1, ncol), delimiter=",", header=header,
               comments="", fmt=fmt)


def read_csv(path):
    """Read an emitted CSV back as a float array with one row per record."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data


def write_trajectory(traj, out_dir):
    """Write gamma.csv, controls.csv, trajectory.csv and diagnostics.csv."""
    os.makedirs(out_dir, exist_ok=True)
    _save(os.path.join(out_dir, "gamma.csv"), GAMMA_HEADER,
          np.column_stack([traj.times, traj.gamma]))
    _save(os.path.join(out_dir, "controls.csv"), CONTROLS_HEADER,
          _long_table(traj.times, traj.controls), int_cols=(1, 2))
    states = traj.states if traj.states is not None else np.empty((0, 0, 0, 0))
    _save(os.path.join(out_dir, "trajectory.csv"), TRAJECTORY_HEADER,
          _long_table(traj.times[: len(states)], states), int_cols=(1, 2, 3))
    if traj.diagnostics is not None:
        dg = traj.diagnostics
        table = np.column_stack([traj.times, dg["rank"], dg["residual"], dg["sigma_max"],
                                 dg["sigma_min"], dg["compat_defect"]])
    else:
        table = np.empty((0, 6))
    _save(os.path.join(out_dir, "diagnostics.csv"), DIAGNOSTICS_HEADER, table, int_cols=(1,))


def _finite_or_none(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def report_for(scenario, traj, variant="base"):
    try:
        rate = fit_decay_rate(traj.gamma, traj.times, scenario.fit_floor)
    except ValueError:
        rate = None
    rep = RunReport(
        preset=scenario.name,
        variant=variant,
        consensus_time=consensus_time(traj.gamma, traj.times, scenario.threshold),
        decay_rate=_finite_or_none(rate),
        gamma_final=float(traj.gamma[-1]),
        max_average_drift=traj.max_drift,
        max_zero_sum_defect=traj.max_zero_sum_defect if traj.mode != "none" else None,
        max_control_final=float(np.max(np.abs(traj.controls[-1]))) if traj.mode != "none" else None,
    )
    if traj.diagnostics is not None:
        dg = traj.diagnostics
        rep.max_compat_defect = traj.max_compat_defect
        rep.min_sigma_max = float(np.min(dg["sigma_max"]))
        rep.max_residual = float(np.max(dg["residual"]))
        rep.degenerate_steps = int(traj.degenerate_steps)
        rep.rank_observed = [int(np.min(dg["rank"])), int(np.max(dg["rank"]))]
        N, d = scenario.model.agents, scenario.model.dim
        rep.rank_expected = [expected_rank(N, d)]
    return rep


def rank_table(N, dims, seed=0, kernel=None, box=(-1.0, 1.0)):
    """Observed vs expected rank of ``L_B`` at random states, one row per d."""
    from .core import CuckerSmale

    kernel = kernel or CuckerSmale()
    rng = np.random.default_rng(seed)
    rows = []
    for d in dims:
        x = rng.uniform(*box, size=(N, d))
        w = rng.uniform(*box, size=(N, d))
        LB = assemble_LB(x, w, kernel)
        s = np.linalg.svd(LB, compute_uv=False)
        rows.append((N, d, N * d, numerical_rank(s, LB.shape, RANK_ABS_FLOOR), expected_rank(N, d)))
    return rows


def run_scenario(scenario, out_dir=None, variant="base"):
    """Run one scenario; write artifacts when ``out_dir`` is given.

    Raises BlowUpError after writing a report with status ``blow-up``.
    """
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    if scenario.kind == "rank":
        rows = rank_table(scenario.model.agents, scenario.rank_dims, scenario.sim.seed,
                          scenario.kernel, scenario.sim.ic.boxes[0])
        rep = RunReport(preset=scenario.name, variant=variant,
                        rank_observed=[r[3] for r in rows], rank_expected=[r[4] for r in rows])
        if out_dir:
            _save(os.path.join(out_dir, "ranks.csv"), RANKS_HEADER, rows, int_cols=range(5))
            _write_report(rep, out_dir)
        return rep
    try:
        traj = simulate(scenario.model, scenario.kernel, scenario.sim)
    except BlowUpError as exc:
        if out_dir:
            _write_report(RunReport(preset=scenario.name, variant=variant,
                                    status=f"blow-up at t={exc.time:g}"), out_dir)
        raise
    rep = report_for(scenario, traj, variant)
    if out_dir:
        write_trajectory(traj, out_dir)
        _write_report(rep, out_dir)
    return rep


def _write_report(rep, out_dir):
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(rep.as_dict(), fh, indent=2)


@dataclass
class SweepRow:
    lam: float
    consensus_time: Optional[float]
    converged: bool
    decay_rate: Optional[float] = None
    status: str = "ok"


def sweep_lambda(scenario, lambdas, threshold=1e-6, horizon=None, jobs=1, out_dir=None):
    """Run ``scenario`` for each decay rate and report time to ``threshold``.

    Returns ``(rows, lambda_max)`` where ``lambda_max`` is the largest value
    in ``lambdas`` whose run reached the threshold within the horizon (None if
    none did). Runs that blow up count as not converged.
    """
    if not lambdas:
        raise ValueError("sweep needs at least one lambda")
    if scenario.sim.control.mode == "none":
        raise ValueError("sweep needs a controlled scenario")
    sim = scenario.sim if horizon is None else replace(scenario.sim, T=float(horizon))
    base = replace(scenario, sim=sim, threshold=threshold)

    def one(lam):
        sc = replace(base, sim=replace(base.sim, control=replace(base.sim.control, lam=float(lam))))
        sub = os.path.join(out_dir, f"lambda={lam:g}") if out_dir else None
        try:
            rep = run_scenario(sc, sub, variant=f"lambda={lam:g}")
        except BlowUpError as exc:
            return SweepRow(float(lam), None, False, None, f"blow-up at t={exc.time:g}")
        ct = rep.consensus_time
        return SweepRow(float(lam), ct, ct is not None, rep.decay_rate)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, lambdas))
    else:
        rows = [one(lam) for lam in lambdas]
    converged = [r.lam for r in rows if r.converged]
    lam_max = max(converged) if converged else None
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "sweep.csv"), "w", encoding="utf-8") as fh:
            fh.write("lambda,consensus_time,converged,decay_rate,status\n")
            for r in rows:
                ct = "" if r.consensus_time is None else FMT % r.consensus_time
                rate = "" if r.decay_rate is None else FMT % r.decay_rate
                fh.write(f"{FMT % r.lam},{ct},{int(r.converged)},{rate},{r.status}\n")
    return rows, lam_max
