"""Kernel deconvolution estimators for error-contaminated data."""
from .analysis import (RateExperiment, TrueDensity, density_of_w, empirical_ise,
                       oracle_bandwidth, rate_experiment, theoretical_bias,
                       theoretical_mse_profile, theoretical_variance)
from .curves import ContaminatedSample, CurveEstimate, CurveMeta, MeasurementModel
from .deconv_kernel import (DeconvKernelPlan, EstimatedErrorCF, eval_KU, eval_KUr,
                            realness_residual)
from .density import deconv_kde, integrate_estimate, kde
from .error_models import (ErrorModel, ReplicatedSample, TailClass, estimate_abs_phi_U,
                           phi_U, sample_error)
from .kernels import (KernelSpec, eval_kernel, eval_phi_K, eval_phi_K_deriv,
                      kernel_moment)
from .min_contrast import PceConfig, a_hat, pce_estimate, verify_theorem
from .regression import (RegressionConfig, deconv_local_polynomial, local_constant,
                         local_polynomial)
from .simulation import Scenario, generate, monte_carlo, preset

__version__ = "0.1.0"
