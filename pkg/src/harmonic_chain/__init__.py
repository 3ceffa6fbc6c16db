"""Stochastically forced infinite chain of coupled oscillators.

Closed-form kernels and covariances of its Gaussian invariant measure,
exact and Euler-Maruyama simulation of truncated chains, and the oracles
that cross-check them.
"""
from .covariance import (CovarianceWindow, cov_diag_closed, cov_diag_nu_trig,
                         cov_even_closed, cov_nu_quad2d, cov_time_domain,
                         cov_time_domain_matrix, cov_weber_schafheitlin,
                         richardson_limit)
from .errors import (AccuracyError, ChainError, ConfigError, DimensionError,
                     DomainError, EvaluationError, NumericalError)
from .kernel import (KernelTable, bessel_tail, kernel_g, kernel_g_closed0,
                     kernel_l2, kernel_matrix, kernel_table)
from .orthopoly import QuadratureRule, cheb_u_norm, integrate, quad_rule
from .propagator import (ChainState, SpectralField, evolve_unforced,
                         fixed_point_residual, from_spectral, periodic_orbit_eval,
                         propagator_entry, propagator_entry_closed, to_spectral,
                         truncated_flow)
from .report import ScenarioReport
from .sampler import (StationarySampler, build_sampler, sample_stationary,
                      stationary_cov_matrix)
from .scenarios import run_scenario
from .sde import (AbsorbingLayer, NoiseTable, SimConfig, build_noise_table, em_step,
                  exact_step, simulate)
from .specfun import bessel_j
from .stats import (MomentAccumulator, batch_means, empirical_cov, energy, flux,
                    slope_fit)

__version__ = "0.1.0"
