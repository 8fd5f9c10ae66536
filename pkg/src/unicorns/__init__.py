"""Unique-event ("unicorn") detection in scalar time series.

The temporal outlier factor (TOF) scores each reconstructed state by how far
in time its nearest state-space neighbors lie; a local outlier factor (LOF)
baseline works on the same neighbor tables.
"""

from .embedding import (EmbeddedSeries, EmbeddingParams, Series, autocorrelation, embed,
                        first_zero_or_min_delay, intrinsic_dimension)
from .errors import (ConstraintError, DataError, DegenerateInputError, NumericError,
                     ParameterError, UnicornError)
from .evaluation import EvalReport, median_mad, precision_recall_f1, roc_auc, spearman, state_space_density
from .lof import LofConfig, k_distance_neighborhood, local_reachability_density, lof_detect, lof_score
from .neighbors import NeighborTable, SpatialIndex, brute_force_knn, build_index, knn_all
from .tof import (DetectionMask, ScoreSeries, TofConfig, detect, noise_baseline_mean,
                  noise_baseline_var, threshold_from_event_length, tof_max, tof_min, tof_score)

__version__ = "0.1.0"
