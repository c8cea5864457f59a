"""Persistent-loop tracking for sequences of 3-D point clouds."""

from .errors import (
    ContractError,
    FrameError,
    InputError,
    InvariantError,
    ParameterError,
    StructuralError,
    TopoTrackError,
)
from .mixture import LoopMixture, loop_mixture, mixture_logpdf, mixture_sample, simplex_gaussian
from .oracle import brute_force_assignment, naive_reduction_ph1, verify_lemma2, verify_lemma3
from .persistence import (
    LoopDescriptor,
    LoopFeature,
    PersistenceDiagram1,
    compute_ph1,
    extract_descriptors,
    extract_loop_descriptor,
    filter_significant,
)
from .scenegen import GroundTruth, SceneSpec, check_membership, gen_scene
from .tracker import (
    CostMatrix,
    SeqPH,
    TopologicalState,
    TrackerParams,
    assign,
    gated_cost_matrix,
    hausdorff,
    propagate_ids,
    track_sequence,
)
from .vr_complex import (
    Filtration,
    FiltrationSimplex,
    PointCloud,
    build_filtration,
    enclosing_radius,
    farthest_point_subsample,
    pairwise_distances,
)

__version__ = "0.1.0"
