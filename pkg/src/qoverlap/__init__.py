"""Expected overlapping time of a virtual customer in time-varying M_t/M/n queues.

Four routes to E[O_tau]: event-driven simulation (:mod:`qoverlap.sim`),
the fluid limit and the Gaussian-adjusted fluid model (:mod:`qoverlap.fluid`),
and closed forms for the infinite-server queue (:mod:`qoverlap.infinite`).
"""

from .fluid import (HorizonError, OverlapResult, overlap_adjusted, overlap_fluid, solve_adjusted,
                    solve_fluid, solve_z, solve_z_adjusted)
from .infinite import SinusoidalInfModel, closed_form_overlap, closed_form_x, numeric_overlap_inf
from .model import (ConfigError, GaussianParams, QueueModel, RateFunction, gaussian_cdf,
                    gaussian_pdf, load_model, rate_f2, rate_g2, sinusoidal_model)
from .ode import FirstPassage, Trajectory, first_passage
from .sim import SimAggregate, SimConfig, SimSample, histogram, run_replications, simulate_path

__version__ = "0.1.0"
