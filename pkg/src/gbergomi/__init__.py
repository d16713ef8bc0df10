"""Grey Bergomi stochastic volatility: special functions, simulation, pricing and calibration."""

from .specfun import GreyLaw, gauss_2f1, log_mittag_leffler, m_wright_density, m_wright_moment, mittag_leffler, sample_m_wright
from .ggbm import (
    CovMatrix,
    FactorizationError,
    GreyMotionParams,
    build_cov_matrix,
    ggbm_char,
    ggbm_covariance,
    ggbm_even_moment,
    ggbm_mgf,
    volterra_brownian_cross_cov,
    volterra_cov_forward,
    volterra_cov_spot,
)
from .model import (
    ForwardCurve,
    LowerBound,
    ModelParams,
    VixConvention,
    forward_variance,
    log_forward_variance,
    log_vix_squared_from_path,
    log_wick_normalizer,
    ssr_short_time_limit,
    variance_given_factors,
    vix_futures_lower_bound,
    vix_futures_upper_bound,
    vix_squared_from_path,
    wick_blacklozenge_normalizer,
    zeta_array,
    zeta_series,
)
from .montecarlo import (
    GridSpec,
    MarkovNodes,
    McConfig,
    McResult,
    SpotSamples,
    VixSamples,
    markovian_nodes,
    price_from_samples,
    simulate_spot,
    simulate_spot_markovian,
    simulate_vix,
)
from .pricing import (
    ArctanSmile,
    AtmMetrics,
    BsInputs,
    SmileFit,
    atm_metrics,
    bs_call,
    bs_vega,
    fit_arctan_smile,
    implied_vol,
    smile_from_samples,
    spline_smile,
)
from .asymptotics import (
    AsymptoticInputs,
    j1,
    j2,
    j3,
    j3_scaled_limit,
    spx_atm_level_limit,
    spx_skew_scaled_limit,
    sweep,
    vix_atm_curvature_scaled_limit,
    vix_atm_level_limit,
    vix_atm_skew_limit,
)
from .calibration import (
    CalibrationResult,
    GreyBergomiCalibrator,
    GridSearchResult,
    MarketTargets,
    SearchSpec,
    calibrate_rho,
    calibrate_vix,
    grid_search_smile,
    targets_from_model,
    vix_objective,
    vix_residuals,
)

__version__ = "0.1.0"
