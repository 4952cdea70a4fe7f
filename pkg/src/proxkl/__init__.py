"""Proximal gradient method with backtracking on the prox parameter.

Minimizes ``psi = f + phi`` with ``f`` continuously differentiable and ``phi``
lower semicontinuous with a closed-form prox.  No Lipschitz constant of
``grad f`` is needed.
"""

from .analysis import (KLRateModel, RateReport, check_descent_certificate,
                       check_subgrad_bound, estimate_q_factor, estimate_r_factor,
                       fit_geometric_envelope, fit_kl_model, rate_report)
from .config import ConfigError, dump_config, load_config, parse_config
from .oracle import (BoxSet, NonsmoothOracle, SmoothOracle, finite_diff_check,
                     make_alm_penalty, make_quadratic, make_quartic, make_sum)
from .problems import REGISTRY, ProblemSpec, get_problem
from .prox import (NonsmoothKind, hard_threshold, make_nonsmooth, project_box,
                   soft_threshold, subdiff_dist_box, subdiff_dist_l0, subdiff_dist_l1)
from .serialize import RunArtifact, read_trace_csv, write_trace_csv
from .solver import (IterationRecord, SolveReport, SolverConfig, Status,
                     backtracking_step, initial_gamma, solve, stationarity_residual)

__version__ = "0.1.0"
