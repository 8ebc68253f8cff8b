"""On-disk formats: feature matrices, manifests, poses, indices, reports.

Feature vectors live in a small binary container (header then row-major
float32, everything little-endian); structural metadata lives in JSON next
to it, referencing vectors by row.  Storage is float32 while in-memory math
is float64, so loaders upcast on read and writers downcast on write; a
write/read round trip of float32-representable values is lossless.

All writers emit sorted, canonical output so byte-identical files mean
identical content.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import FileFormatError
from .evaluation import EvalReport, ProbeResult
from .model import CanonicalPoseSet, Dataset, FrameRecord, PoseVector, Tracklet

MAGIC = b"PDSR"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQI")  # magic, version u32, rows u64, dim u32


def write_feature_matrix(path: str | Path, matrix: np.ndarray) -> None:
    """Store a (rows, dim) matrix as float32; this is the quantization point."""
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"feature matrix must be 2-D, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("feature matrix contains non-finite values")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, arr.shape[0], arr.shape[1]))
        fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def read_feature_matrix(path: str | Path) -> np.ndarray:
    """Load a feature matrix, upcast to float64.

    The returned values equal the stored float32 values exactly.
    """
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FileFormatError(f"{path}: truncated header")
    magic, version, rows, dim = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FileFormatError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FileFormatError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + rows * dim * 4
    if len(raw) != expected:
        raise FileFormatError(
            f"{path}: size {len(raw)} does not match header ({expected} expected)"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size)
    return data.reshape(rows, dim).astype(np.float64)


def _pose_to_triples(pose: PoseVector) -> list[list[float]]:
    return [
        [float(x), float(y), 1 if v else 0]
        for (x, y), v in zip(pose.joints.tolist(), pose.visibility.tolist())
    ]


def _pose_from_triples(triples: list, where: str) -> PoseVector:
    try:
        joints = np.array([[t[0], t[1]] for t in triples], dtype=np.float64)
        visibility = np.array([bool(t[2]) for t in triples])
    except (TypeError, IndexError) as exc:
        raise FileFormatError(f"{where}: malformed keypoint triples") from exc
    return PoseVector(joints=joints, visibility=visibility)


def save_dataset(
    dataset: Dataset, manifest_path: str | Path, features_path: str | Path
) -> None:
    """Write the manifest JSON and its companion feature matrix.

    Rows are assigned walking tracklets by ascending id and frames by
    ascending frame id, so equal datasets serialize byte-identically.
    """
    rows = []
    tracklets = []
    for t in sorted(dataset.tracklets, key=lambda t: t.tracklet_id):
        frames = []
        for f in t.frames_by_id():
            frames.append(
                {
                    "frame_id": f.frame_id,
                    "row": len(rows),
                    "keypoints": _pose_to_triples(f.pose),
                }
            )
            rows.append(f.feature)
        tracklets.append(
            {
                "tracklet_id": t.tracklet_id,
                "identity": t.identity,
                "camera": t.camera,
                "probe": t.probe,
                "frames": frames,
            }
        )
    manifest = {
        "name": dataset.name,
        "feature_dim": dataset.feature_dim,
        "joint_count": dataset.joint_count,
        "num_poses": dataset.num_poses,
        "camera_count": dataset.camera_count,
        "tracklets": tracklets,
    }
    write_feature_matrix(
        features_path, np.stack(rows) if rows else np.zeros((0, dataset.feature_dim))
    )
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_dataset(manifest_path: str | Path, features_path: str | Path) -> Dataset:
    with open(manifest_path) as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{manifest_path}: invalid JSON") from exc
    matrix = read_feature_matrix(features_path)
    try:
        if manifest["feature_dim"] != matrix.shape[1]:
            raise FileFormatError(
                f"{features_path}: dimension {matrix.shape[1]} does not match "
                f"manifest feature_dim {manifest['feature_dim']}"
            )
        tracklets = []
        for t in manifest["tracklets"]:
            frames = []
            for f in t["frames"]:
                row = f["row"]
                if not 0 <= row < matrix.shape[0]:
                    raise FileFormatError(
                        f"{manifest_path}: row {row} outside feature matrix"
                    )
                frames.append(
                    FrameRecord(
                        frame_id=f["frame_id"],
                        feature=matrix[row],
                        pose=_pose_from_triples(
                            f["keypoints"], f"{manifest_path}:{t['tracklet_id']}"
                        ),
                    )
                )
            tracklets.append(
                Tracklet(
                    tracklet_id=t["tracklet_id"],
                    identity=t["identity"],
                    camera=t["camera"],
                    frames=tuple(frames),
                    probe=bool(t.get("probe", False)),
                )
            )
        return Dataset(
            name=manifest["name"],
            feature_dim=manifest["feature_dim"],
            joint_count=manifest["joint_count"],
            num_poses=manifest["num_poses"],
            camera_count=manifest["camera_count"],
            tracklets=tuple(tracklets),
        )
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{manifest_path}: missing or malformed field: {exc}") from exc


def save_canon(canon: CanonicalPoseSet, path: str | Path) -> None:
    payload = {
        "joint_count": int(canon.poses[0].joints.shape[0]),
        "poses": [_pose_to_triples(p) for p in canon.poses],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_canon(path: str | Path) -> CanonicalPoseSet:
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{path}: invalid JSON") from exc
    try:
        poses = tuple(
            _pose_from_triples(p, f"{path}:pose[{i}]")
            for i, p in enumerate(payload["poses"])
        )
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{path}: missing or malformed field: {exc}") from exc
    for i, p in enumerate(poses):
        if p.joints.shape[0] != payload["joint_count"]:
            raise FileFormatError(
                f"{path}: pose[{i}] has {p.joints.shape[0]} joints, "
                f"expected {payload['joint_count']}"
            )
    return CanonicalPoseSet(poses=poses)


def write_synth_index(index: Mapping[tuple[str, int], int], path: str | Path) -> None:
    """Tab-separated (tracklet_id, pose, row), sorted for determinism."""
    with open(path, "w") as fh:
        for (tid, pose), row in sorted(index.items()):
            if "\t" in tid or "\n" in tid:
                raise ValueError(f"tracklet id {tid!r} cannot contain tab or newline")
            fh.write(f"{tid}\t{pose}\t{row}\n")


def read_synth_index(path: str | Path) -> dict[tuple[str, int], int]:
    index: dict[tuple[str, int], int] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise FileFormatError(f"{path}:{lineno}: expected 3 tab-separated fields")
            tid, pose_s, row_s = parts
            try:
                pose, row = int(pose_s), int(row_s)
            except ValueError as exc:
                raise FileFormatError(f"{path}:{lineno}: non-integer pose or row") from exc
            if pose < 1 or row < 0:
                raise FileFormatError(f"{path}:{lineno}: pose or row out of range")
            if (tid, pose) in index:
                raise FileFormatError(f"{path}:{lineno}: duplicate entry ({tid}, {pose})")
            index[(tid, pose)] = row
    return index


def write_pose_embeddings(
    embeddings,
    index_path: str | Path,
    matrix_path: str | Path,
) -> None:
    """Export pose-normalized embeddings as a keyed feature file.

    Index lines are `tracklet_id <tab> pose <tab> origin <tab> frequency
    <tab> row`, walking tracklets by ascending id and poses ascending, with
    the vectors in a companion feature matrix.  This is an inspection/join
    export; pair alignment works from the in-memory embeddings.
    """
    rows = []
    with open(index_path, "w") as fh:
        for emb in sorted(embeddings, key=lambda e: e.tracklet_id):
            if "\t" in emb.tracklet_id or "\n" in emb.tracklet_id:
                raise ValueError(
                    f"tracklet id {emb.tracklet_id!r} cannot contain tab or newline"
                )
            for pose, entry in emb.entries.items():
                fh.write(
                    f"{emb.tracklet_id}\t{pose}\t{entry.origin.value}"
                    f"\t{entry.frequency!r}\t{len(rows)}\n"
                )
                rows.append(entry.vector)
    if not rows:
        raise ValueError("no pose entries to export")
    write_feature_matrix(matrix_path, np.stack(rows))


def read_pose_embedding_index(path: str | Path) -> list[tuple[str, int, str, float, int]]:
    """Rows of a keyed pose-embedding index, as written."""
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise FileFormatError(f"{path}:{lineno}: expected 5 tab-separated fields")
            tid, pose_s, origin, freq_s, row_s = parts
            try:
                out.append((tid, int(pose_s), origin, float(freq_s), int(row_s)))
            except ValueError as exc:
                raise FileFormatError(f"{path}:{lineno}: malformed numeric field") from exc
    return out


def report_to_dict(report: EvalReport) -> dict:
    return {
        "mode": report.mode,
        "num_probes": report.num_probes,
        "num_scored": report.num_scored,
        "mean_ap": report.mean_ap,
        "cmc": list(report.cmc),
        "camera_ids": list(report.camera_ids),
        "camera_pair_map": [list(row) for row in report.camera_pair_map],
        "probe_results": [
            {
                "probe_id": r.probe_id,
                "identity": r.identity,
                "camera": r.camera,
                "gallery_size": r.gallery_size,
                "num_positives": r.num_positives,
                "first_correct_rank": r.first_correct_rank,
                "ap": r.ap,
            }
            for r in report.probe_results
        ],
    }


def save_report_json(report: EvalReport, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(report_to_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_report_json(path: str | Path) -> EvalReport:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{path}: invalid JSON") from exc
    try:
        return EvalReport(
            mode=d["mode"],
            num_probes=d["num_probes"],
            num_scored=d["num_scored"],
            mean_ap=d["mean_ap"],
            cmc=tuple(d["cmc"]),
            camera_ids=tuple(d["camera_ids"]),
            camera_pair_map=tuple(tuple(row) for row in d["camera_pair_map"]),
            probe_results=tuple(
                ProbeResult(
                    probe_id=r["probe_id"],
                    identity=r["identity"],
                    camera=r["camera"],
                    gallery_size=r["gallery_size"],
                    num_positives=r["num_positives"],
                    first_correct_rank=r["first_correct_rank"],
                    ap=r["ap"],
                )
                for r in d["probe_results"]
            ),
        )
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{path}: missing or malformed field: {exc}") from exc


def save_report(report: EvalReport, path: str | Path, format: str = "json") -> None:
    """Single entry point over the two report writers."""
    if format == "json":
        save_report_json(report, path)
    elif format == "csv":
        save_report_csv(report, path)
    else:
        raise ValueError(f"unknown report format {format!r}")


def load_report(path: str | Path) -> EvalReport:
    return load_report_json(path)


def _csv_value(value: object) -> str:
    if value is None:
        return "null"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def save_report_csv(report: EvalReport, path: str | Path) -> None:
    """Flat (section, key, value) rows; missing values are written as null."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["section", "key", "value"])
        for key in ("mode", "num_probes", "num_scored", "mean_ap"):
            writer.writerow(["summary", key, _csv_value(getattr(report, key))])
        for rank, value in enumerate(report.cmc, start=1):
            writer.writerow(["cmc", rank, _csv_value(value)])
        for a, row in zip(report.camera_ids, report.camera_pair_map):
            for b, cell in zip(report.camera_ids, row):
                writer.writerow(["camera_pair_map", f"{a}->{b}", _csv_value(cell)])
        for r in report.probe_results:
            for key in ("gallery_size", "num_positives", "first_correct_rank", "ap"):
                writer.writerow(["probe", f"{r.probe_id}.{key}", _csv_value(getattr(r, key))])
