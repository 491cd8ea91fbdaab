"""Matching upper and lower tail bounds with exact-oracle certification."""

__version__ = "0.1.0"

from .dist_model import (  # noqa: F401
    Beta, Binomial, ChiSq, DistSpec, Gamma, IrwinHall, NoncentralChiSq,
    Normal, Poisson, RademacherSum, RngStream, Side, WeightedChiSq,
    WeightVector, log_mgf, mean_shift, sample, spec_from_json, spec_to_json,
    variance,
)
from .errors import (  # noqa: F401
    DomainError, TailboundError, TruncationError, UnsupportedFamilyError,
    WindowError,
)
from .oracle import TailEstimate, clopper_pearson, exact_tail, mc_tail  # noqa: F401
from .engine_upper import (  # noqa: F401
    BoundResult, MgfSandwich, chernoff_upper, sandwich_upper, weighted_sum_upper,
)
from .engine_lower import (  # noqa: F401
    PzConstants, ReverseChernoffParams, TailLowerFn, compose_sum_lower,
    evaluate_tail_lower, mgf_sandwich_from_tails, pz_lower, pz_paper_bound,
    pz_paper_constants, reverse_chernoff_lower, reverse_chernoff_objective,
)
from .dist_bounds import (  # noqa: F401
    CLOSED_FORM, NUMERIC, RATE, BoundTier, Tier, bound_catalog,
    fit_rate_constants, lower_bound, mgf_sandwich, poisson_limit_check,
    upper_bound,
)
from .extremes import (  # noqa: F401
    ExtremeBracket, ExtremeRegime, ExtremeSpec, extreme_bracket, mc_extreme_mean,
)
from .mixture import (  # noqa: F401
    ClassifierReport, MixtureRegime, MixtureSpec, classify, derive_classifier,
    exact_expected_misid, mc_misid, verify_optimality,
)
from .harness import (  # noqa: F401
    AbsoluteGrid, CertReport, CertRow, DEFAULT_FAMILIES, DEFAULT_QUANTILES,
    QuantileGrid, bisect_quantile, run_grid,
)
