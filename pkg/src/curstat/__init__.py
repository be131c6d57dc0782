"""Nonparametric bootstrap inference for current status data."""

from .boot import (BandwidthRule, CiRequest, ConfidenceBand, bias_corrected_ci,
                   bias_direct_estimate, bias_subsample_estimate, confidence_band, senxu_ci,
                   select_bandwidth, smooth_smle_ci, studentized_ci, undersmoothed_bandwidth,
                   wald_ci)
from .data import (BootstrapWeights, CurrentStatusSample, Grid, RngSpec, StepDistribution,
                   draw_multinomial_weights, eval_step, ingest_sample, read_sample_csv)
from .errors import (CurstatError, DegenerateDiagram, DegenerateWindow, EmptySample,
                     EstimatorError, InputError, InvalidBandwidth, InvalidDatum, InvalidSubsample,
                     SingularDesign, UnstableFit)
from .gcm import CusumDiagram, gcm_slopes, weighted_isotonic_fit
from .kernel import (k_density, k_derivative, k_integrated, kernel_constants,
                     smooth_cdf, smooth_density_derivative, smooth_density_of_g)
from .mle import fit_bootstrap_mle, fit_mle, l2_distance, log_likelihood, switch_processes
from .regression import (RegressionSample, ScoreFit, bootstrap_sse_ci, profile_mle, score,
                         sse_estimate, wald_variance)
from .sim import MODELS, TruthModel, run_coverage_experiment, run_regression_experiment, sample_model
from .smle import asymptotic_moments, convolution_smle, s_nh_variance, smle

__version__ = "0.1.0"
