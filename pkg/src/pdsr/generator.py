"""Planted-ground-truth dataset generator.

Every tracklet's frames are built as normalize(identity_latent +
pose_offset[planted pose] + gaussian noise), so the correct match, the
planted pose of every frame, and the ideal synthetic vector for any
(tracklet, pose) are all known by construction.  Per-camera pose
visibility restricts which poses a camera can record, planting the
cross-camera pose incompleteness the matcher is meant to repair.

All draws run through generators keyed by (seed, purpose, entity), so
output is a pure function of the spec and independent of generation order.
Features are quantized through float32 before use: what the in-memory
provider serves is bit-identical to what a feature file round-trip yields.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import FileFormatError
from .model import (
    DISTRACTOR,
    CanonicalPoseSet,
    Dataset,
    FrameRecord,
    PoseVector,
    Tracklet,
)
from .providers import SyntheticFeatureProvider
from .seeding import rng_for


@dataclass(frozen=True)
class GenSpec:
    """Size and difficulty knobs of one planted dataset."""

    identities: int = 8
    cameras: int = 2
    tracklets_per_identity_per_camera: int = 1
    frames_per_tracklet: tuple[int, int] = (6, 10)
    feature_dim: int = 32
    joint_count: int = 18
    num_poses: int = 4
    pose_effect_scale: float = 0.25
    noise_sigma: float = 0.0
    pose_jitter: float = 0.0
    pose_visibility: tuple[tuple[int, ...], ...] | None = None
    distractors: int = 0
    seed: int = 0
    name: str = "planted"

    def __post_init__(self) -> None:
        if self.identities < 2:
            raise ValueError("need at least 2 identities")
        if self.cameras < 2:
            raise ValueError("cross-camera protocols need at least 2 cameras")
        if self.tracklets_per_identity_per_camera < 1:
            raise ValueError("need at least 1 tracklet per identity per camera")
        lo, hi = self.frames_per_tracklet
        if not 1 <= lo <= hi:
            raise ValueError(f"bad frames_per_tracklet range ({lo}, {hi})")
        if min(self.feature_dim, self.joint_count, self.num_poses) < 1:
            raise ValueError("feature_dim, joint_count and num_poses must be positive")
        if self.pose_effect_scale < 0 or self.noise_sigma < 0 or self.pose_jitter < 0:
            raise ValueError("scales and sigmas must be non-negative")
        if self.distractors < 0:
            raise ValueError("distractor count must be non-negative")
        if self.pose_visibility is not None:
            if len(self.pose_visibility) != self.cameras:
                raise ValueError("pose_visibility needs one pose subset per camera")
            cleaned = []
            for cam, subset in enumerate(self.pose_visibility):
                poses = sorted(set(subset))
                if not poses:
                    raise ValueError(f"camera {cam} has an empty pose subset")
                if poses[0] < 1 or poses[-1] > self.num_poses:
                    raise ValueError(
                        f"camera {cam} pose subset outside 1..{self.num_poses}"
                    )
                cleaned.append(tuple(poses))
            object.__setattr__(self, "pose_visibility", tuple(cleaned))
        object.__setattr__(
            self, "frames_per_tracklet", (int(lo), int(hi))
        )

    def camera_poses(self, camera: int) -> tuple[int, ...]:
        """The canonical poses camera `camera` is able to record."""
        if self.pose_visibility is None:
            return tuple(range(1, self.num_poses + 1))
        return self.pose_visibility[camera]


@dataclass(frozen=True, eq=False)
class PlantedTruth:
    """What the generator planted, for oracles and the ideal provider.

    `latent_key` maps every tracklet to the key of the latent its frames
    were built from; real tracklets share their identity's latent while
    each distractor tracklet has a private one.
    """

    latents: Mapping[str, np.ndarray]
    latent_key: Mapping[str, str]
    pose_offsets: np.ndarray
    frame_poses: Mapping[tuple[str, int], int]


def _unit(vec: np.ndarray) -> np.ndarray:
    return vec / np.linalg.norm(vec)


def _quantize(vec: np.ndarray) -> np.ndarray:
    """Round through float32; matches what a feature-file round trip yields."""
    return vec.astype(np.float32).astype(np.float64)


class PlantedProvider(SyntheticFeatureProvider):
    """Serves normalize(latent + pose_offset[j]) for any tracklet and pose.

    With noise_sigma = 0 this is the ideal upper-bound provider; a positive
    sigma adds per-(tracklet, pose) gaussian noise before normalization,
    modeling a generator that degrades the representation.  Output ignores
    the representative frame, so it is invariant to frame edits.
    """

    def __init__(self, truth: PlantedTruth, noise_sigma: float = 0.0, seed: int = 0):
        if noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        self._truth = truth
        self._sigma = float(noise_sigma)
        self._seed = seed

    def query(self, tracklet_id: str, representative_frame_id: int, pose: int) -> np.ndarray:
        truth = self._truth
        if tracklet_id not in truth.latent_key:
            raise KeyError(f"unknown tracklet {tracklet_id!r}")
        if not 1 <= pose <= truth.pose_offsets.shape[0]:
            raise IndexError(f"pose {pose} outside planted pose range")
        vec = truth.latents[truth.latent_key[tracklet_id]] + truth.pose_offsets[pose - 1]
        noise = rng_for(self._seed, "provider-noise", tracklet_id, pose).normal(
            0.0, self._sigma, vec.shape[0]
        )
        return _quantize(_unit(vec + noise))


@dataclass(frozen=True, eq=False)
class GeneratedData:
    dataset: Dataset
    canon: CanonicalPoseSet
    provider: PlantedProvider
    truth: PlantedTruth


def corrupted_provider(gen: GeneratedData, noise_sigma: float, seed: int = 0) -> PlantedProvider:
    """The same planted provider with extra noise, for weight trade-off studies."""
    return PlantedProvider(gen.truth, noise_sigma=noise_sigma, seed=seed)


def _make_canon(spec: GenSpec) -> CanonicalPoseSet:
    poses = []
    for j in range(1, spec.num_poses + 1):
        joints = rng_for(spec.seed, "canon", j).uniform(0.0, 1.0, (spec.joint_count, 2))
        poses.append(PoseVector(joints=joints, visibility=np.ones(spec.joint_count, dtype=bool)))
    return CanonicalPoseSet(poses=tuple(poses))


def _make_tracklet(
    spec: GenSpec,
    tracklet_id: str,
    identity: str,
    camera: int,
    latent: np.ndarray,
    offsets: np.ndarray,
    canon: CanonicalPoseSet,
    frame_poses: dict[tuple[str, int], int],
) -> Tracklet:
    rng = rng_for(spec.seed, "tracklet", tracklet_id)
    lo, hi = spec.frames_per_tracklet
    length = int(rng.integers(lo, hi + 1))
    allowed = spec.camera_poses(camera)
    frames = []
    for frame_id in range(length):
        pose = allowed[int(rng.integers(len(allowed)))]
        jitter = rng.normal(0.0, spec.pose_jitter, (spec.joint_count, 2))
        joints = np.clip(canon.pose(pose).joints + jitter, 0.0, 1.0)
        noise = rng.normal(0.0, spec.noise_sigma, spec.feature_dim)
        feature = _quantize(_unit(latent + offsets[pose - 1] + noise))
        frames.append(
            FrameRecord(
                frame_id=frame_id,
                feature=feature,
                pose=PoseVector(
                    joints=joints,
                    visibility=np.ones(spec.joint_count, dtype=bool),
                ),
            )
        )
        frame_poses[(tracklet_id, frame_id)] = pose
    return Tracklet(
        tracklet_id=tracklet_id, identity=identity, camera=camera, frames=tuple(frames)
    )


def generate(spec: GenSpec) -> GeneratedData:
    """Build the dataset, canonical poses, ideal provider and ground truth."""
    canon = _make_canon(spec)
    offsets = np.zeros((spec.num_poses, spec.feature_dim))
    if spec.pose_effect_scale > 0:
        for j in range(1, spec.num_poses + 1):
            direction = _unit(rng_for(spec.seed, "pose-offset", j).normal(0.0, 1.0, spec.feature_dim))
            offsets[j - 1] = direction * spec.pose_effect_scale

    latents: dict[str, np.ndarray] = {}
    latent_key: dict[str, str] = {}
    frame_poses: dict[tuple[str, int], int] = {}
    tracklets = []

    for i in range(spec.identities):
        identity = f"id{i:04d}"
        latents[identity] = _unit(
            rng_for(spec.seed, "identity-latent", identity).normal(0.0, 1.0, spec.feature_dim)
        )
        for camera in range(spec.cameras):
            for t in range(spec.tracklets_per_identity_per_camera):
                tid = f"{identity}-c{camera}-{t}"
                latent_key[tid] = identity
                tracklets.append(
                    _make_tracklet(
                        spec, tid, identity, camera, latents[identity],
                        offsets, canon, frame_poses,
                    )
                )

    for i in range(spec.distractors):
        tid = f"dx{i:04d}-c{i % spec.cameras}"
        latents[tid] = _unit(
            rng_for(spec.seed, "identity-latent", tid).normal(0.0, 1.0, spec.feature_dim)
        )
        latent_key[tid] = tid
        tracklets.append(
            _make_tracklet(
                spec, tid, DISTRACTOR, i % spec.cameras, latents[tid],
                offsets, canon, frame_poses,
            )
        )

    truth = PlantedTruth(
        latents=latents,
        latent_key=latent_key,
        pose_offsets=offsets,
        frame_poses=frame_poses,
    )
    dataset = Dataset(
        name=f"{spec.name}-s{spec.seed}",
        feature_dim=spec.feature_dim,
        joint_count=spec.joint_count,
        num_poses=spec.num_poses,
        camera_count=spec.cameras,
        tracklets=tuple(sorted(tracklets, key=lambda t: t.tracklet_id)),
    )
    return GeneratedData(
        dataset=dataset,
        canon=canon,
        provider=PlantedProvider(truth, noise_sigma=0.0, seed=spec.seed),
        truth=truth,
    )


def save_gen_spec(spec: GenSpec, path: str | Path) -> None:
    payload = {
        "identities": spec.identities,
        "cameras": spec.cameras,
        "tracklets_per_identity_per_camera": spec.tracklets_per_identity_per_camera,
        "frames_per_tracklet": list(spec.frames_per_tracklet),
        "feature_dim": spec.feature_dim,
        "joint_count": spec.joint_count,
        "num_poses": spec.num_poses,
        "pose_effect_scale": spec.pose_effect_scale,
        "noise_sigma": spec.noise_sigma,
        "pose_jitter": spec.pose_jitter,
        "pose_visibility": (
            None
            if spec.pose_visibility is None
            else [list(subset) for subset in spec.pose_visibility]
        ),
        "distractors": spec.distractors,
        "seed": spec.seed,
        "name": spec.name,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_gen_spec(path: str | Path) -> GenSpec:
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{path}: invalid JSON") from exc
    try:
        return GenSpec(
            identities=payload["identities"],
            cameras=payload["cameras"],
            tracklets_per_identity_per_camera=payload["tracklets_per_identity_per_camera"],
            frames_per_tracklet=tuple(payload["frames_per_tracklet"]),
            feature_dim=payload["feature_dim"],
            joint_count=payload["joint_count"],
            num_poses=payload["num_poses"],
            pose_effect_scale=payload["pose_effect_scale"],
            noise_sigma=payload["noise_sigma"],
            pose_jitter=payload.get("pose_jitter", 0.0),
            pose_visibility=(
                None
                if payload.get("pose_visibility") is None
                else tuple(tuple(s) for s in payload["pose_visibility"])
            ),
            distractors=payload.get("distractors", 0),
            seed=payload.get("seed", 0),
            name=payload.get("name", "planted"),
        )
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{path}: missing or malformed field: {exc}") from exc
