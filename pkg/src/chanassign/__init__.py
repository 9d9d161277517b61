"""Uplink NOMA subchannel assignment: exact solver, oracle, and surrogate."""

from . import errors, oracle, scenario, solver, surrogate
from .oracle import brute_force_solve, count_assignments, enumerate_assignments
from .scenario import (ChannelParams, Dataset, Scenario, SplitDataset,
                       effective_gains, generate_dataset, generate_scenario,
                       load_dataset, save_dataset, split_dataset)
from .solver import (SolveResult, SolverConfig, dual_objective, dual_update,
                     repair_feasibility, select_top_a, solve, solve_batch,
                     solve_kappa, solve_subproblem, sum_rate)
from .surrogate import (EnsembleModel, MlpModel, TrainConfig, accuracy,
                        decode_labels, encode_labels, load_ensemble,
                        mlp_forward, mlp_gradient, permutation_decode,
                        predict, save_ensemble, stack_train, train,
                        train_ensemble)

__version__ = "0.1.0"
