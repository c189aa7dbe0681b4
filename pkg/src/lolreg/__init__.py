"""Two-step thresholding regression (Learning Out of Leaders) and its simulation harness."""

from .core import (CoherenceReport, DesignMatrix, GroundTruth, coherence, coherence_report,
                   leader_capacity, normalize_columns, rip_bounds_check)
from .estimator import (FitResult, LolConfig, NoLeadersError, SingularGramError, correlations, fit,
                        predict, refit, regress_on_leaders, select_leaders, threshold_coefficients)
from .thresholding import Adaptive, Fixed, SplitResult, Theorem, adaptive_split, theorem_thresholds

__all__ = [
    "Adaptive", "CoherenceReport", "DesignMatrix", "FitResult", "Fixed", "GroundTruth", "LolConfig",
    "NoLeadersError", "SingularGramError", "SplitResult", "Theorem", "adaptive_split", "coherence",
    "coherence_report", "correlations", "fit", "leader_capacity", "normalize_columns", "predict",
    "refit", "regress_on_leaders", "rip_bounds_check", "select_leaders", "theorem_thresholds",
    "threshold_coefficients",
]
