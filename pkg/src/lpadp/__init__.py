"""Data-driven LP policy iteration and value iteration for optimal control.

Fits parametric Q-functions to sampled transitions of an unknown
deterministic plant by solving dense linear programs, and reads approximate
optimal state-feedback controllers off the fitted candidates. Ships an
exact discounted Riccati oracle for the linear-quadratic case, seeded
replay buffers with CSV persistence, benchmark presets, and a CLI.
"""

from .systems import (Plant, LtiPlant, StageCost, lti_step, nonlinear2d_step,
                      quadratic_cost, nonquadratic_cost, lti4d, nonlinear2d,
                      make_plant, make_cost)
from .basis import (BasisFamily, QParams, MomentSpec, LinearPolicy, Blocks,
                    PolicyUndefined, features, eval_q, extract_blocks, pack,
                    greedy_policy, greedy_gain, objective_vector)
from .replay import (SamplerSpec, ReplayBuffer, BufferSamplingError,
                     build_buffer, save_buffer, load_buffer)
from .lp import (LpProblem, LpSolution, SolverSettings, assemble_pi_lp,
                 assemble_vi_lp, solve_lp, solve_consistent, dump_lp)
from .algorithms import (RunConfig, IterationRecord, IterationTrace,
                         run_q_pi_lp, run_q_vi_lp, stopping_check)
from .oracle import (DareSolution, DareNonConvergence, DivergedTrajectory,
                     RolloutResult, solve_discounted_dare, rollout_cost,
                     qfun_error)
from .experiment import ExperimentConfig, ExperimentResult, run_experiment
from .presets import PRESET_NAMES, DEFAULT_SEED, preset

__version__ = "0.1.0"

__all__ = [
    "Plant", "LtiPlant", "StageCost", "lti_step", "nonlinear2d_step",
    "quadratic_cost", "nonquadratic_cost", "lti4d", "nonlinear2d",
    "make_plant", "make_cost",
    "BasisFamily", "QParams", "MomentSpec", "LinearPolicy", "Blocks",
    "PolicyUndefined", "features", "eval_q", "extract_blocks", "pack",
    "greedy_policy", "greedy_gain", "objective_vector",
    "SamplerSpec", "ReplayBuffer", "BufferSamplingError",
    "build_buffer", "save_buffer", "load_buffer",
    "LpProblem", "LpSolution", "SolverSettings", "assemble_pi_lp",
    "assemble_vi_lp", "solve_lp", "solve_consistent", "dump_lp",
    "RunConfig", "IterationRecord", "IterationTrace",
    "run_q_pi_lp", "run_q_vi_lp", "stopping_check",
    "DareSolution", "DareNonConvergence", "DivergedTrajectory",
    "RolloutResult", "solve_discounted_dare", "rollout_cost", "qfun_error",
    "ExperimentConfig", "ExperimentResult", "run_experiment",
    "PRESET_NAMES", "DEFAULT_SEED", "preset",
    "__version__",
]
