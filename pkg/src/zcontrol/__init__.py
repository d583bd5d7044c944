"""Consensus of k-th order multi-agent systems under Z-control.

The library simulates first- to third-order consensus models (smoothed
Hegselmann-Krause opinions and Cucker-Smale flocking) with RK4, drives the
top-order state to consensus with a direct feedback law or with an indirect
law solved by minimum-norm least squares, and reports consensus diagnostics.
"""

from .control_direct import direct_control, rhs_direct, zero_sum_defect
from .control_indirect import MODES, assemble_LB, assemble_system, indirect_control
from .core import (ConfigurationError, CuckerSmale, ModelConfig, SmoothedHK,
                   build_interaction_matrix, check_weight_balanced, cs_weight, phi_hk)
from .dynamics import average_top, consensus_gamma, rhs_uncontrolled
from .integrate import (BlowUpError, ControlSpec, InitialCondition, SimConfig, Trajectory,
                        consensus_time, fit_decay_rate, simulate)
from .lsq import LsqDiagnostics, expected_rank, min_agents, min_norm_lstsq

__version__ = "0.1.0"

__all__ = [
    "MODES", "BlowUpError", "ConfigurationError", "ControlSpec", "CuckerSmale",
    "InitialCondition", "LsqDiagnostics", "ModelConfig", "SimConfig", "SmoothedHK",
    "Trajectory", "assemble_LB", "assemble_system", "average_top", "build_interaction_matrix",
    "check_weight_balanced", "consensus_gamma", "consensus_time", "cs_weight",
    "direct_control", "expected_rank", "fit_decay_rate", "indirect_control", "min_agents",
    "min_norm_lstsq", "phi_hk", "rhs_direct", "rhs_uncontrolled", "simulate", "zero_sum_defect",
]
