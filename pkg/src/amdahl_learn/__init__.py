"""Multicore performance models from a multi-resource extension of Amdahl's law."""
from .dataset import Dataset, load_dataset
from .errors import (AmdahlError, DomainError, InputError, NumericalError, PredictionError,
                     RankDeficiencyWarning)
from .explorer import CostModel, ExplorationResult, explore, frontier
from .features import DesignMatrix, FeatureTerm, ModelSpec, build_design, standard_terms, term_ratio
from .formats import load_model, load_model_spec, save_model
from .metrics import mape
from .model_core import (FractionSet, ResourceSchema, ResourceVector, SpeedupResult, score_from_speedup,
                         speedup_multi, speedup_single)
from .regression import (FittedModel, FractionEstimate, Scaler, extract_fractions, fit, fit_dataset,
                         predict_inverse, predict_score)
from .synthetic import GroundTruth, NoiseSpec, RangeTable, default_truth, e1_ranges, generate, sample_configs
from .validation import CvReport, FoldPlan, cross_validate, make_folds

__version__ = "0.1.0"
