"""Pose-regulated tracklet matching and retrieval evaluation at the feature level.

Tracklets are matched through two complementary scores: a weighted fusion
of real and synthetic per-pose features into one embedding, and a
pose-by-pose comparison of the two sequences aligned over the union of
their observed canonical poses.  Deep models never run in-process; synthetic
features arrive through the SyntheticFeatureProvider contract.
"""

from .dataset_io import (
    load_canon,
    load_dataset,
    load_report,
    read_feature_matrix,
    read_pose_embedding_index,
    read_synth_index,
    report_to_dict,
    save_canon,
    save_dataset,
    save_report,
    write_feature_matrix,
    write_pose_embeddings,
    write_synth_index,
)
from .errors import (
    AllFramesUnassignableError,
    EmptyUnionError,
    FileFormatError,
    MissingSyntheticError,
    NoCommonJointsError,
    PdsrError,
    ZeroVectorError,
)
from .evaluation import (
    EvalMode,
    EvalReport,
    ProbeCase,
    ProbeResult,
    ProtocolConfig,
    Ranking,
    average_precision,
    build_protocol,
    camera_confusion,
    cmc_curve,
    evaluate,
    fuse_scores,
    rank_gallery,
    score_matrix,
)
from .fusion import (
    DEFAULT_FUSION_WEIGHT,
    WfEmbedding,
    baseline_embedding,
    synthetic_mean,
    wf_embedding,
    wf_score,
)
from .generator import (
    GeneratedData,
    GenSpec,
    PlantedProvider,
    PlantedTruth,
    corrupted_provider,
    generate,
    load_gen_spec,
    save_gen_spec,
)
from .model import (
    DISTRACTOR,
    CanonicalPoseSet,
    Dataset,
    FrameRecord,
    Origin,
    PoseEntry,
    PoseNormalizedEmbedding,
    PoseVector,
    Tracklet,
    ValidationIssue,
    validate_dataset,
)
from .providers import (
    CachedProvider,
    FileBackedProvider,
    RepresentativeChoice,
    Strategy,
    StubProvider,
    SyntheticFeatureProvider,
    choose_representative,
    file_backed_provider,
    stub_provider,
)
from .quantizer import (
    DEFAULT_MIN_COMMON_JOINTS,
    PoseAssignment,
    PoseGroups,
    assign_pose,
    assignment_distances,
    group_by_pose,
    keypoint_distance,
)
from .regulation import (
    AlignedPair,
    align_pair,
    pose_normalize,
    wpr_score,
    wpr_score_matrix,
)
from .seeding import rng_for, stable_key
from .similarity import cosine, cosine_matrix, unit_rows

__all__ = [
    "AlignedPair",
    "AllFramesUnassignableError",
    "CachedProvider",
    "CanonicalPoseSet",
    "DEFAULT_FUSION_WEIGHT",
    "DEFAULT_MIN_COMMON_JOINTS",
    "DISTRACTOR",
    "Dataset",
    "EmptyUnionError",
    "EvalMode",
    "EvalReport",
    "FileBackedProvider",
    "FileFormatError",
    "FrameRecord",
    "GenSpec",
    "GeneratedData",
    "MissingSyntheticError",
    "NoCommonJointsError",
    "Origin",
    "PdsrError",
    "PlantedProvider",
    "PlantedTruth",
    "PoseAssignment",
    "PoseEntry",
    "PoseGroups",
    "PoseNormalizedEmbedding",
    "PoseVector",
    "ProbeCase",
    "ProbeResult",
    "ProtocolConfig",
    "Ranking",
    "RepresentativeChoice",
    "Strategy",
    "StubProvider",
    "SyntheticFeatureProvider",
    "Tracklet",
    "ValidationIssue",
    "WfEmbedding",
    "ZeroVectorError",
    "align_pair",
    "assign_pose",
    "assignment_distances",
    "average_precision",
    "baseline_embedding",
    "build_protocol",
    "camera_confusion",
    "choose_representative",
    "cmc_curve",
    "corrupted_provider",
    "cosine",
    "cosine_matrix",
    "evaluate",
    "file_backed_provider",
    "fuse_scores",
    "generate",
    "group_by_pose",
    "keypoint_distance",
    "load_canon",
    "load_dataset",
    "load_gen_spec",
    "load_report",
    "pose_normalize",
    "rank_gallery",
    "read_feature_matrix",
    "read_pose_embedding_index",
    "read_synth_index",
    "report_to_dict",
    "rng_for",
    "save_canon",
    "save_dataset",
    "save_gen_spec",
    "save_report",
    "score_matrix",
    "stable_key",
    "stub_provider",
    "write_feature_matrix",
    "write_pose_embeddings",
    "write_synth_index",
    "synthetic_mean",
    "unit_rows",
    "validate_dataset",
    "wf_embedding",
    "wf_score",
    "wpr_score",
    "wpr_score_matrix",
]
