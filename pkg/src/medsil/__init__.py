"""k-medoids clustering by direct optimization of the average medoid silhouette.

The package provides four swap-based optimizers over arbitrary
dissimilarities (``pammedsil_naive``, ``fastmsc``, ``fastermsc``,
``pamsil``), silhouette-family quality measures, BUILD/random
initialization, ARI/NMI external validation, and a benchmarking CLI
(``medsil``).
"""

from .dissim import (COSINE_DISTANCE, EUCLIDEAN, MANHATTAN, METRICS,
                     POINT_METRICS, PRECOMPUTED, SQUARED_EUCLIDEAN,
                     DataFormatError, DissimilarityProvider, from_matrix,
                     from_points, load_matrix, load_points)
from .init import Rng, build_init, make_rng, random_init
from .metrics import ContingencyTable, ari, contingency_table, nmi
from .optim import (AccumulatorBank, Caches, ClusteringResult, ClusterState,
                    PointCache, accumulate_candidate, fastermsc, fastmsc,
                    find_best_swap_fastmsc, pammedsil_naive, pamsil,
                    removal_loss, swap_delta_point, update_caches,
                    warm_kernels)
from .silhouette import (MedoidSilhouetteBreakdown, SilhouetteBreakdown,
                         eval_full_silhouette, eval_medoid_silhouette,
                         labels_from_medoids, richness_witness, safe_ratio)

__version__ = "0.1.0"

__all__ = [
    "AccumulatorBank",
    "Caches",
    "ClusteringResult",
    "ClusterState",
    "ContingencyTable",
    "COSINE_DISTANCE",
    "DataFormatError",
    "DissimilarityProvider",
    "EUCLIDEAN",
    "MANHATTAN",
    "METRICS",
    "MedoidSilhouetteBreakdown",
    "PRECOMPUTED",
    "POINT_METRICS",
    "PointCache",
    "Rng",
    "SQUARED_EUCLIDEAN",
    "SilhouetteBreakdown",
    "accumulate_candidate",
    "ari",
    "build_init",
    "contingency_table",
    "eval_full_silhouette",
    "eval_medoid_silhouette",
    "fastermsc",
    "fastmsc",
    "find_best_swap_fastmsc",
    "from_matrix",
    "from_points",
    "labels_from_medoids",
    "load_matrix",
    "load_points",
    "make_rng",
    "nmi",
    "pammedsil_naive",
    "pamsil",
    "random_init",
    "removal_loss",
    "richness_witness",
    "safe_ratio",
    "swap_delta_point",
    "update_caches",
    "warm_kernels",
]
