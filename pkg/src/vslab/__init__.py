"""Version-space learning laboratory: finite concept classes, exact complexity
measures, learners, closed-form bounds and Monte Carlo validation."""
from .concept import (ConceptClass, InstanceSpace, closure_hull, is_intersection_closed, make_class,
                      star_number, star_witness, vc_dimension)
from .version_space import (Distribution, LabeledSample, VersionSpaceView, compression_set_size,
                            disagreement_region, prefix_max_nhat, region_mass, version_space,
                            worst_consistent_error)
from .bounds import BoundResult, evaluate_bound, log_factors_lemma_check

__version__ = "0.1.0"
