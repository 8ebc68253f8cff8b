"""Command-line entry point.

Global flags name the input files once; subcommands do one stage each:

    pdsr synthgen --spec spec.json --out data/
    pdsr --manifest m.json --features f.bin --canon c.json quantize --out a.tsv
    pdsr ... embed --mode wf --weight 4 --out wf.bin
    pdsr ... match --probe id0001-c0-0
    pdsr ... eval --mode wf+wpr --report report.json --csv report.csv

A JSON file named by the PDSR_CONFIG environment variable supplies
defaults: top-level keys for the global flags, nested objects per
subcommand (e.g. {"canon": "c.json", "eval": {"weight": 2.0}}).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path

import click
import numpy as np

from . import dataset_io
from .errors import PdsrError
from .evaluation import (
    EvalMode,
    ProbeCase,
    ProtocolConfig,
    evaluate,
    rank_gallery,
    score_matrix,
)
from .fusion import DEFAULT_FUSION_WEIGHT, wf_embedding
from .generator import generate, load_gen_spec
from .model import CanonicalPoseSet, Dataset, validate_dataset
from .providers import RepresentativeChoice, file_backed_provider
from .quantizer import assign_pose
from .regulation import pose_normalize

ENV_CONFIG = "PDSR_CONFIG"
_MODE_NAMES = [m.value for m in EvalMode]


@dataclass
class CliContext:
    manifest: Path | None
    features: Path | None
    canon: Path | None
    synth_index: Path | None
    synth_features: Path | None
    seed: int | None
    strict: bool


class _ConfigGroup(click.Group):
    """Loads default option values from the PDSR_CONFIG file, if set."""

    def make_context(self, info_name, args, parent=None, **extra):
        path = os.environ.get(ENV_CONFIG)
        if path and "default_map" not in extra:
            try:
                with open(path) as fh:
                    extra["default_map"] = json.load(fh)
            except OSError as exc:
                raise click.ClickException(f"cannot read {ENV_CONFIG}={path}: {exc}")
            except json.JSONDecodeError as exc:
                raise click.ClickException(f"{ENV_CONFIG}={path}: invalid JSON: {exc}")
        return super().make_context(info_name, args, parent, **extra)

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except PdsrError as exc:
            raise click.ClickException(str(exc)) from exc


@click.group(cls=_ConfigGroup, context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--manifest", type=click.Path(path_type=Path), default=None, help="Dataset manifest JSON.")
@click.option("--features", type=click.Path(path_type=Path), default=None, help="Dataset feature matrix.")
@click.option("--canon", type=click.Path(path_type=Path), default=None, help="Canonical pose set JSON.")
@click.option("--synth-index", type=click.Path(path_type=Path), default=None, help="Synthetic feature index TSV.")
@click.option("--synth-features", type=click.Path(path_type=Path), default=None, help="Synthetic feature matrix.")
@click.option("--seed", type=int, default=None, help="Seed for probe draw and representative choice [default: 0].")
@click.option("--strict/--lenient", "strict", default=True, help="Fail on missing synthetic vectors vs skip them.")
@click.pass_context
def main(ctx, manifest, features, canon, synth_index, synth_features, seed, strict):
    """Pose-regulated tracklet matching and retrieval evaluation."""
    ctx.obj = CliContext(
        manifest=manifest,
        features=features,
        canon=canon,
        synth_index=synth_index,
        synth_features=synth_features,
        seed=seed,
        strict=strict,
    )


def _require(value: Path | None, flag: str) -> Path:
    if value is None:
        raise click.UsageError(f"this command needs the global {flag} option")
    return value


def _load_inputs(obj: CliContext) -> tuple[Dataset, CanonicalPoseSet]:
    dataset = dataset_io.load_dataset(
        _require(obj.manifest, "--manifest"), _require(obj.features, "--features")
    )
    canon = dataset_io.load_canon(_require(obj.canon, "--canon"))
    issues = validate_dataset(
        dataset.tracklets,
        canon,
        expected_dim=dataset.feature_dim,
        expected_joints=dataset.joint_count,
    )
    if issues:
        for issue in issues:
            click.echo(f"invalid: {issue.code}: {issue.message}", err=True)
        raise click.ClickException(f"dataset failed validation with {len(issues)} issue(s)")
    return dataset, canon


def _provider(obj: CliContext):
    return file_backed_provider(
        _require(obj.synth_index, "--synth-index"),
        _require(obj.synth_features, "--synth-features"),
    )


def _config(obj: CliContext, weight: float) -> ProtocolConfig:
    seed = obj.seed if obj.seed is not None else 0
    return ProtocolConfig(
        seed=seed,
        fusion_weight=weight,
        representative=RepresentativeChoice(seed=seed),
        strict=obj.strict,
    )


@main.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(path_type=Path), help="GenSpec JSON.")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path), help="Output directory.")
@click.pass_obj
def synthgen(obj: CliContext, spec_path: Path, out_dir: Path):
    """Generate a planted dataset plus canon, synthetic features and index."""
    spec = load_gen_spec(spec_path)
    if obj.seed is not None:
        spec = replace(spec, seed=obj.seed)
    gen = generate(spec)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset_io.save_dataset(gen.dataset, out_dir / "manifest.json", out_dir / "features.bin")
    dataset_io.save_canon(gen.canon, out_dir / "canon.json")

    index: dict[tuple[str, int], int] = {}
    rows = []
    for t in gen.dataset.tracklets:
        for j in gen.canon.indices:
            index[(t.tracklet_id, j)] = len(rows)
            rows.append(gen.provider.query(t.tracklet_id, -1, j))
    dataset_io.write_feature_matrix(out_dir / "synth-features.bin", np.stack(rows))
    dataset_io.write_synth_index(index, out_dir / "synth-index.tsv")

    frames = sum(len(t) for t in gen.dataset.tracklets)
    click.echo(
        f"{gen.dataset.name}: {len(gen.dataset.tracklets)} tracklets, "
        f"{frames} frames, {len(rows)} synthetic vectors -> {out_dir}"
    )


@main.command()
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="Write per-frame assignments TSV (tracklet, frame, pose, distance).")
@click.pass_obj
def quantize(obj: CliContext, out_path: Path | None):
    """Assign every frame to its nearest canonical pose."""
    dataset, canon = _load_inputs(obj)
    counts = {j: 0 for j in canon.indices}
    unassignable = 0
    lines = []
    for t in sorted(dataset.tracklets, key=lambda t: t.tracklet_id):
        for f in t.frames_by_id():
            a = assign_pose(f.pose, canon, frame_id=f.frame_id)
            if a.pose is None:
                unassignable += 1
            else:
                counts[a.pose] += 1
            lines.append(
                f"{t.tracklet_id}\t{f.frame_id}\t"
                f"{a.pose if a.pose is not None else '-'}\t{a.distance!r}"
            )
    if out_path is not None:
        out_path.write_text("".join(line + "\n" for line in lines))
    total = sum(counts.values()) + unassignable
    click.echo(f"{total} frames: {total - unassignable} assigned, {unassignable} unassignable")
    for j in canon.indices:
        click.echo(f"pose {j}: {counts[j]}")


@main.command()
@click.option("--mode", type=click.Choice(["wf", "wpr"]), required=True)
@click.option("--weight", type=float, default=DEFAULT_FUSION_WEIGHT, show_default=True,
              help="Real-branch weight w for WF.")
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path),
              help="Output feature matrix.")
@click.option("--index", "index_path", type=click.Path(path_type=Path), default=None,
              help="Keyed index TSV (required for --mode wpr).")
@click.option("--ids", "ids_path", type=click.Path(path_type=Path), default=None,
              help="Optional row -> tracklet id TSV (wf mode).")
@click.pass_obj
def embed(obj: CliContext, mode: str, weight: float, out_path: Path,
          index_path: Path | None, ids_path: Path | None):
    """Write fused (wf) or pose-normalized (wpr) embeddings."""
    dataset, canon = _load_inputs(obj)
    config = _config(obj, weight)
    tracklets = sorted(dataset.tracklets, key=lambda t: t.tracklet_id)

    if mode == "wf":
        provider = _provider(obj)
        rows = np.stack(
            [
                wf_embedding(
                    t, provider, canon, config.fusion_weight,
                    config.representative, strict=config.strict,
                ).vector
                for t in tracklets
            ]
        )
        dataset_io.write_feature_matrix(out_path, rows)
        if ids_path is not None:
            ids_path.write_text(
                "".join(f"{i}\t{t.tracklet_id}\n" for i, t in enumerate(tracklets))
            )
        click.echo(f"{rows.shape[0]} wf embeddings (w={weight}) -> {out_path}")
    else:
        if index_path is None:
            raise click.UsageError("--mode wpr needs --index for the keyed output")
        embeddings = [
            pose_normalize(t, canon, config.representative, min_common_joints=config.min_common_joints)
            for t in tracklets
        ]
        dataset_io.write_pose_embeddings(embeddings, index_path, out_path)
        entries = sum(len(e.entries) for e in embeddings)
        click.echo(f"{entries} pose entries over {len(embeddings)} tracklets -> {out_path}")


@main.command()
@click.option("--probe", "probe_id", required=True, help="Tracklet id to query.")
@click.option("--mode", type=click.Choice(_MODE_NAMES), default=EvalMode.FUSED.value,
              show_default=True)
@click.option("--weight", type=float, default=DEFAULT_FUSION_WEIGHT, show_default=True)
@click.option("--top", type=int, default=10, show_default=True, help="Rows to print.")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="Write the full ranking as TSV.")
@click.pass_obj
def match(obj: CliContext, probe_id: str, mode: str, weight: float, top: int,
          out_path: Path | None):
    """Rank the cross-camera gallery for one probe tracklet."""
    dataset, canon = _load_inputs(obj)
    by_id = dataset.by_id()
    if probe_id not in by_id:
        raise click.ClickException(f"unknown tracklet {probe_id!r}")
    probe = by_id[probe_id]
    gallery_ids = tuple(
        sorted(t.tracklet_id for t in dataset.tracklets if t.camera != probe.camera)
    )
    if not gallery_ids:
        raise click.ClickException("no tracklet from another camera to rank")

    eval_mode = EvalMode(mode)
    provider = None if eval_mode is EvalMode.BASELINE else _provider(obj)
    case = ProbeCase(
        probe_id=probe_id, identity=probe.identity, camera=probe.camera,
        gallery_ids=gallery_ids,
    )
    scores = score_matrix(dataset, canon, provider, [case], _config(obj, weight), eval_mode)
    all_ids = sorted(by_id)
    col = {tid: i for i, tid in enumerate(all_ids)}
    ranking = rank_gallery(gallery_ids, [float(scores[0, col[g]]) for g in gallery_ids])

    if out_path is not None:
        out_path.write_text(
            "".join(
                f"{rank}\t{tid}\t{score!r}\t{by_id[tid].identity}\t{by_id[tid].camera}\n"
                for rank, (tid, score) in enumerate(
                    zip(ranking.gallery_ids, ranking.scores), start=1
                )
            )
        )
    click.echo(f"probe {probe_id} ({probe.identity}, camera {probe.camera}), mode {mode}:")
    for rank, (tid, score) in enumerate(zip(ranking.gallery_ids, ranking.scores), start=1):
        if rank > top:
            break
        hit = "*" if by_id[tid].identity == probe.identity else " "
        click.echo(f"{rank:4d} {hit} {tid}  {score: .6f}  {by_id[tid].identity}")


@main.command("eval")
@click.option("--mode", type=click.Choice(_MODE_NAMES), default=EvalMode.FUSED.value,
              show_default=True)
@click.option("--weight", type=float, default=DEFAULT_FUSION_WEIGHT, show_default=True)
@click.option("--report", "report_path", required=True, type=click.Path(path_type=Path),
              help="Report JSON output.")
@click.option("--csv", "csv_path", type=click.Path(path_type=Path), default=None,
              help="Optional flat CSV mirror of the report.")
@click.pass_obj
def eval_cmd(obj: CliContext, mode: str, weight: float, report_path: Path,
             csv_path: Path | None):
    """Run the cross-camera retrieval protocol and write the report."""
    dataset, canon = _load_inputs(obj)
    eval_mode = EvalMode(mode)
    provider = None if eval_mode is EvalMode.BASELINE else _provider(obj)
    report = evaluate(dataset, canon, provider, _config(obj, weight), eval_mode)
    dataset_io.save_report_json(report, report_path)
    if csv_path is not None:
        dataset_io.save_report_csv(report, csv_path)

    click.echo(f"mode {report.mode}: {report.num_scored}/{report.num_probes} probes scored")
    if report.mean_ap is not None:
        click.echo(f"mAP    {report.mean_ap:.6f}")
        for r in (1, 5, 10, 20):
            if r <= len(report.cmc):
                click.echo(f"rank-{r:<2d} {report.cmc[r - 1]:.6f}")
    click.echo(f"report -> {report_path}")
