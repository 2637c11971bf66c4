"""Layered-disorder dimer model: exact finite tori, Lyapunov spectra,
free energies, and quenched correlation functions."""

__version__ = "0.1.0"

from .disorder import (DisorderLaw, LayeredSample, Marginal, canonical_log_uniform,
                       canonical_two_point, gamma_modulated_view, log_variance,
                       normalize_law, sample_layers)
from .matprod import (BoundaryVectors, LyapEstimate, MatrixStream, boundary_vector,
                      boundary_vectors, constant_stream, dh_stream, dimer_stream,
                      lyapunov, lyapunov_gamma, make_dimer_matrix, make_V_matrix,
                      v_stream)
from .spectrum import (Budget, FreeEnergyResult, PhasePoint, SpectralCurve,
                       build_spectral_curve, delta, free_energy, free_energy_curve,
                       h_c, invert_curve)
from .correlations import CovResult, EdgePair, QuadSpec, covariance_H1_zero, \
    covariance_liquid, decay_profile
from .asymptotics import (ExponentFit, GammaAnalysis, alpha_gamma, beta_gamma,
                          dh_benchmark, essential_singularity_probe, fit_power_law,
                          fit_stretched, gamma_c, gas_transition_exponent,
                          pt_exponent, pure_closed_forms, pure_free_energy)

__all__ = [n for n in dir() if not n.startswith("_")]
