"""Nearest-canonical-pose assignment and pose-wise grouping of tracklet frames.

The distance between two keypoint vectors is the root of the mean squared
per-joint coordinate difference, taken over joints visible in *both* poses.
The mean (rather than a sum) keeps distances comparable across visibility
masks; a comparison needs at least `min_common_joints` shared joints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AllFramesUnassignableError, NoCommonJointsError
from .model import CanonicalPoseSet, FrameRecord, PoseVector, Tracklet

DEFAULT_MIN_COMMON_JOINTS = 4


@dataclass(frozen=True)
class PoseAssignment:
    """The canonical pose a frame quantizes to; pose None means unassignable."""

    frame_id: int
    pose: int | None
    distance: float


@dataclass(frozen=True, eq=False)
class PoseGroups:
    """Partition of a tracklet's assignable frames by canonical pose."""

    groups: dict[int, tuple[FrameRecord, ...]]
    frequencies: dict[int, float]
    unassignable: tuple[int, ...]  # frame ids excluded from every group


def keypoint_distance(
    a: PoseVector,
    b: PoseVector,
    *,
    min_common_joints: int = DEFAULT_MIN_COMMON_JOINTS,
) -> float:
    """Visibility-masked mean-RMS distance between two keypoint vectors.

    Raises NoCommonJointsError when fewer than `min_common_joints` joints
    are visible in both poses.
    """
    if a.joint_count != b.joint_count:
        raise ValueError(f"joint counts differ: {a.joint_count} vs {b.joint_count}")
    common = a.visibility & b.visibility
    n = int(common.sum())
    if n < min_common_joints:
        raise NoCommonJointsError(
            f"only {n} mutually visible joints, need at least {min_common_joints}"
        )
    # Masked full-length reduction, bitwise identical to assignment_distances.
    diff = a.joints - b.joints
    sq = np.where(common, np.sum(diff * diff, axis=-1), 0.0)
    return math.sqrt(float(sq.sum()) / n)


def assign_pose(
    frame_pose: PoseVector,
    canon: CanonicalPoseSet,
    *,
    frame_id: int = -1,
    min_common_joints: int = DEFAULT_MIN_COMMON_JOINTS,
) -> PoseAssignment:
    """Assign a pose vector to its nearest canonical pose.

    Ties break toward the lowest canonical index.  If no canonical pose
    shares enough visible joints, the frame is unassignable (pose None).
    """
    best_index: int | None = None
    best_distance = math.inf
    for j in canon.indices:
        try:
            d = keypoint_distance(frame_pose, canon.pose(j), min_common_joints=min_common_joints)
        except NoCommonJointsError:
            continue
        if d < best_distance:
            best_index = j
            best_distance = d
    if best_index is None:
        return PoseAssignment(frame_id=frame_id, pose=None, distance=math.inf)
    return PoseAssignment(frame_id=frame_id, pose=best_index, distance=best_distance)


def assignment_distances(
    poses: list[PoseVector],
    canon: CanonicalPoseSet,
    *,
    min_common_joints: int = DEFAULT_MIN_COMMON_JOINTS,
) -> np.ndarray:
    """Distance matrix (len(poses), M); inf where too few common joints.

    Vectorized equivalent of calling keypoint_distance pairwise.
    """
    frame_joints = np.stack([p.joints for p in poses])  # (L, k, 2)
    frame_vis = np.stack([p.visibility for p in poses])  # (L, k)
    canon_joints = np.stack([p.joints for p in canon.poses])  # (M, k, 2)
    canon_vis = np.stack([p.visibility for p in canon.poses])  # (M, k)

    common = frame_vis[:, None, :] & canon_vis[None, :, :]  # (L, M, k)
    diff = frame_joints[:, None, :, :] - canon_joints[None, :, :, :]  # (L, M, k, 2)
    sq = np.sum(diff * diff, axis=-1)  # (L, M, k)
    sq = np.where(common, sq, 0.0)
    counts = common.sum(axis=-1)  # (L, M)
    with np.errstate(invalid="ignore", divide="ignore"):
        dist = np.sqrt(sq.sum(axis=-1) / counts)
    dist[counts < min_common_joints] = np.inf
    return dist


def group_by_pose(
    tracklet: Tracklet,
    canon: CanonicalPoseSet,
    *,
    min_common_joints: int = DEFAULT_MIN_COMMON_JOINTS,
) -> PoseGroups:
    """Partition assignable frames by canonical pose, with frame fractions.

    Frequencies are |group| / (number of assignable frames) and sum to 1
    whenever at least one frame is assignable.  Frames are grouped in
    frame-id order so downstream pooling is order-independent.
    """
    frames = tracklet.frames_by_id()
    if not frames:
        raise AllFramesUnassignableError(f"tracklet {tracklet.tracklet_id!r} has no frames")

    dist = assignment_distances([f.pose for f in frames], canon, min_common_joints=min_common_joints)
    groups: dict[int, list[FrameRecord]] = {}
    unassignable: list[int] = []
    for f, row in zip(frames, dist):
        j = int(np.argmin(row)) + 1
        if math.isinf(row[j - 1]):
            unassignable.append(f.frame_id)
            continue
        groups.setdefault(j, []).append(f)

    assignable = sum(len(g) for g in groups.values())
    if assignable == 0:
        raise AllFramesUnassignableError(
            f"no frame of tracklet {tracklet.tracklet_id!r} maps to any canonical pose"
        )
    ordered = {j: tuple(groups[j]) for j in sorted(groups)}
    frequencies = {j: len(ordered[j]) / assignable for j in ordered}
    return PoseGroups(groups=ordered, frequencies=frequencies, unassignable=tuple(unassignable))
