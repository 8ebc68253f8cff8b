"""Keypoint distance, nearest-pose assignment, and pose grouping."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from naive_reference import naive_assign, naive_keypoint_distance
from pdsr import (
    AllFramesUnassignableError,
    CanonicalPoseSet,
    FrameRecord,
    NoCommonJointsError,
    PoseVector,
    Tracklet,
    assign_pose,
    assignment_distances,
    group_by_pose,
    keypoint_distance,
    rng_for,
)


def random_pose(rng, k=8, visible_prob=1.0):
    return PoseVector(
        joints=rng.uniform(0, 1, (k, 2)),
        visibility=rng.uniform(0, 1, k) < visible_prob,
    )


def random_canon(rng, m=4, k=8):
    return CanonicalPoseSet(poses=tuple(random_pose(rng, k) for _ in range(m)))


def test_unit_x_offset_gives_distance_one():
    # every joint shifted by (+1, 0): mean squared per-joint distance is 1.
    k = 7
    a = PoseVector(joints=np.random.default_rng(0).uniform(0, 1, (k, 2)),
                   visibility=np.ones(k, dtype=bool))
    b = PoseVector(joints=a.joints + np.array([1.0, 0.0]), visibility=a.visibility)
    assert keypoint_distance(a, b) == 1.0


def test_distance_zero_on_identical_pose():
    rng = rng_for(1, "dist")
    a = random_pose(rng)
    assert keypoint_distance(a, a) == 0.0


@settings(max_examples=50)
@given(st.integers(0, 10_000))
def test_distance_symmetry(seed):
    rng = rng_for(seed, "sym")
    a, b = random_pose(rng, visible_prob=0.8), random_pose(rng, visible_prob=0.8)
    try:
        d_ab = keypoint_distance(a, b)
    except NoCommonJointsError:
        with pytest.raises(NoCommonJointsError):
            keypoint_distance(b, a)
        return
    assert d_ab == keypoint_distance(b, a)


@settings(max_examples=50)
@given(st.integers(0, 10_000))
def test_distance_matches_naive(seed):
    rng = rng_for(seed, "naive-dist")
    a, b = random_pose(rng, visible_prob=0.7), random_pose(rng, visible_prob=0.7)
    naive = naive_keypoint_distance(a, b)
    if naive is None:
        with pytest.raises(NoCommonJointsError):
            keypoint_distance(a, b)
    else:
        assert keypoint_distance(a, b) == pytest.approx(naive, abs=1e-12)


def test_too_few_common_joints_raises():
    a = PoseVector(joints=np.zeros((6, 2)),
                   visibility=np.array([1, 1, 1, 0, 0, 0], dtype=bool))
    b = PoseVector(joints=np.zeros((6, 2)),
                   visibility=np.array([0, 0, 1, 1, 1, 1], dtype=bool))
    with pytest.raises(NoCommonJointsError):
        keypoint_distance(a, b)  # one common joint, default minimum is 4
    assert keypoint_distance(a, b, min_common_joints=1) == 0.0


def test_joint_count_mismatch_raises():
    a = PoseVector(joints=np.zeros((6, 2)), visibility=np.ones(6, dtype=bool))
    b = PoseVector(joints=np.zeros((5, 2)), visibility=np.ones(5, dtype=bool))
    with pytest.raises(ValueError):
        keypoint_distance(a, b)


def test_exact_tie_breaks_to_lowest_index():
    rng = rng_for(2, "tie")
    shared = random_pose(rng)
    canon = CanonicalPoseSet(poses=(random_pose(rng), shared, shared))
    assert assign_pose(shared, canon).pose == 2  # distance 0 to both 2 and 3


@settings(max_examples=30)
@given(st.integers(0, 10_000))
def test_assignment_matches_exhaustive_scan(seed):
    rng = rng_for(seed, "scan")
    canon = random_canon(rng, m=8)
    for _ in range(6):
        frame = random_pose(rng, visible_prob=0.8)
        got = assign_pose(frame, canon)
        assert got.pose == naive_assign(frame, canon)


def test_unassignable_frame_has_none_pose_and_inf_distance():
    blind = PoseVector(joints=np.zeros((6, 2)), visibility=np.zeros(6, dtype=bool))
    canon = CanonicalPoseSet(
        poses=(PoseVector(joints=np.zeros((6, 2)), visibility=np.ones(6, dtype=bool)),)
    )
    got = assign_pose(blind, canon, frame_id=9)
    assert got.pose is None
    assert math.isinf(got.distance)
    assert got.frame_id == 9


def test_assignment_permutation_invariance():
    rng = rng_for(3, "perm")
    poses = tuple(random_pose(rng) for _ in range(5))
    canon = CanonicalPoseSet(poses=poses)
    perm = [2, 0, 4, 1, 3]
    permuted = CanonicalPoseSet(poses=tuple(poses[i] for i in perm))
    for _ in range(10):
        frame = random_pose(rng)
        original = assign_pose(frame, canon).pose
        mapped = assign_pose(frame, permuted).pose
        assert perm[mapped - 1] + 1 == original


def test_vectorized_distances_match_scalar_bitwise():
    rng = rng_for(4, "vec")
    canon = random_canon(rng, m=5)
    frames = [random_pose(rng, visible_prob=0.6) for _ in range(20)]
    matrix = assignment_distances(frames, canon)
    for i, f in enumerate(frames):
        for j in canon.indices:
            try:
                expected = keypoint_distance(f, canon.pose(j))
            except NoCommonJointsError:
                expected = math.inf
            assert matrix[i, j - 1] == expected or (
                math.isinf(expected) and math.isinf(matrix[i, j - 1])
            )


def make_tracklet(rng, n_frames, k=8, d=4, visible_prob=1.0):
    frames = tuple(
        FrameRecord(frame_id=i, feature=rng.normal(size=d),
                    pose=random_pose(rng, k, visible_prob))
        for i in range(n_frames)
    )
    return Tracklet(tracklet_id="t", identity="x", camera=0, frames=frames)


@settings(max_examples=30)
@given(st.integers(0, 10_000), st.integers(1, 12))
def test_group_frequencies_sum_to_one(seed, n_frames):
    rng = rng_for(seed, "freq")
    canon = random_canon(rng)
    tracklet = make_tracklet(rng, n_frames, visible_prob=0.8)
    try:
        groups = group_by_pose(tracklet, canon)
    except AllFramesUnassignableError:
        return
    assert abs(sum(groups.frequencies.values()) - 1.0) < 1e-12
    assert list(groups.groups) == sorted(groups.groups)
    total = sum(len(g) for g in groups.groups.values()) + len(groups.unassignable)
    assert total == n_frames


def test_group_membership_and_unassignable_bookkeeping():
    rng = rng_for(5, "members")
    canon = random_canon(rng, m=3)
    good = [FrameRecord(i, rng.normal(size=4), random_pose(rng)) for i in range(4)]
    blind_pose = PoseVector(joints=np.zeros((8, 2)), visibility=np.zeros(8, dtype=bool))
    blind = FrameRecord(99, rng.normal(size=4), blind_pose)
    tracklet = Tracklet("t", "x", 0, tuple(good) + (blind,))
    groups = group_by_pose(tracklet, canon)
    assert groups.unassignable == (99,)
    for j, members in groups.groups.items():
        for f in members:
            assert assign_pose(f.pose, canon).pose == j


def test_all_frames_unassignable_raises():
    blind_pose = PoseVector(joints=np.zeros((8, 2)), visibility=np.zeros(8, dtype=bool))
    tracklet = Tracklet("t", "x", 0, (FrameRecord(0, np.ones(4), blind_pose),))
    rng = rng_for(6, "blind")
    with pytest.raises(AllFramesUnassignableError):
        group_by_pose(tracklet, random_canon(rng))
    with pytest.raises(AllFramesUnassignableError):
        group_by_pose(Tracklet("t", "x", 0, ()), random_canon(rng))
