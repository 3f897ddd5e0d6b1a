"""Trajectory featurization, distances, and classification benchmarks.

A trajectory is an ordered sequence of planar waypoints, optionally
timestamped. The toolkit turns trajectories into fixed-dimension vectors via
landmark sets (random or mistake-driven), measures them with a suite of
curve distances, classifies them with small native models, and reproduces
repeated-split benchmark protocols deterministically from a single seed.
"""

__version__ = "0.1.0"

from .errors import DataFormatError, SpecValidationError, TrajkitError
from .model import (Dataset, LabeledTrajectory, Trajectory, Waypoint,
                    as_seed_sequence, augment_noise, filter_length,
                    partition_by_duration, partition_by_gap, remove_stationary,
                    simulate_noisy_copies)
from .geometry import (LocalFrame, NearestPoint, frame_at, nearest_on_segment,
                       nearest_on_trajectory, polyline_distances, project_points)
from .features import (FEATURE_KINDS, FeatureMatrix, FeatureVector,
                       combine_plus, endpoints_feature, featurize,
                       featurize_dataset, physical_features, v_Q, v_Q_exp,
                       v_Q_sigma, v_q)
from .landmarks import (LandmarkSet, best_of_k, compute_eta, mistake_driven,
                        random_landmarks, training_error)
from .distances import (PAIR_DISTANCE_NAMES, DistanceParams, Sketch,
                        cross_distance_matrix, d_Q, d_Q_pi, discrete_frechet,
                        distance_matrix, dtw, edr_dist, erp_dist, hausdorff,
                        lcss_dist, lsh_distance, lsh_sketch, make_pair_distance,
                        random_circles, sspd)
from .classify import (CLASSIFIER_NAMES, DecisionTree, KNearestNeighbors,
                       LogisticRegression, MajorityClass, Pipeline,
                       RandomForest, ResultTable, VoteEnsemble, evaluate,
                       knn_predict_matrix, split_indices, vote_ensemble_fit)
from .io import (load_canonical_csv, load_dataset, load_geolife_modes,
                 load_geolife_pairs, load_gotrack, load_landmarks_csv,
                 load_plt_file, load_tdrive_file, load_tdrive_pairs,
                 write_canonical_csv, write_distance_matrix_csv,
                 write_feature_matrix_csv, write_landmarks_csv)
from .harness import (ExperimentSpec, convert, load_experiment_dataset,
                      load_manifest, load_spec, preprocess_dataset, run,
                      spec_from_dict, spec_to_dict, sweep, write_result_csv)

__all__ = [name for name in dir() if not name.startswith("_")]
