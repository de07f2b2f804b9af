"""Manifest-driven feature extraction into an NFTE file.

Input is a CSV manifest "token_id,path".  Each decodable image is
resized (shorter side 256), center-cropped to 224x224, normalized with
the ImageNet mean and std, and pushed through the frozen trunk; the
(2048, 7, 7) layer_4 volume is flattened in C order (channel-major,
then row-major within a channel) to one 100,352-dim f32 record.
Undecodable images are skipped and listed in the sidecar JSON next to
the model and preprocessing metadata.  Records are written by a single
writer in manifest order.
"""

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torchvision import transforms

from .backbone import FEATURE_DIM, build_backbone
from .nfte import NfteWriter

TOOL_NAME = "nftf-extract"
TOOL_VERSION = "0.1.0"

RESIZE_SHORTER_SIDE = 256
CENTER_CROP = 224
NORMALIZE_MEAN = (0.485, 0.456, 0.406)
NORMALIZE_STD = (0.229, 0.224, 0.225)

_PREPROCESS = transforms.Compose([
    transforms.Resize(RESIZE_SHORTER_SIDE),
    transforms.CenterCrop(CENTER_CROP),
    transforms.ToTensor(),
    transforms.Normalize(NORMALIZE_MEAN, NORMALIZE_STD),
])


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ExtractJob:
    entries: tuple[tuple[str, Path], ...]  # (token_id, image path), in order
    out: Path
    weights: str = "pretrained"
    seed: int = 0
    batch_size: int = 8
    sidecar: Path | None = None  # default: OUT.json next to the output


@dataclass
class SkippedImage:
    token_id: str
    path: str
    reason: str


@dataclass
class ExtractResult:
    written: int
    skipped: list[SkippedImage]
    out: Path
    sidecar: Path


def read_manifest(lines, base: Path | None = None):
    """Parse a "token_id,path" CSV into job entries.

    Relative image paths are resolved against ``base`` when given
    (callers pass the manifest's own directory).  Token ids must be
    non-empty and unique; a violation raises ManifestError.
    """
    rows = list(csv.reader(lines))
    if not rows or rows[0] != ["token_id", "path"]:
        raise ManifestError('manifest header must be "token_id,path"')
    entries = []
    seen = set()
    for number, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ManifestError(f"line {number}: expected 2 fields, got {len(row)}")
        token, raw_path = row
        if not token:
            raise ManifestError(f"line {number}: empty token id")
        if not raw_path:
            raise ManifestError(f"line {number}: empty path for {token!r}")
        if token in seen:
            raise ManifestError(f"line {number}: duplicate token id {token!r}")
        seen.add(token)
        path = Path(raw_path)
        if base is not None and not path.is_absolute():
            path = base / path
        entries.append((token, path))
    if not entries:
        raise ManifestError("manifest has no entries")
    return tuple(entries)


def _decode(path: Path) -> Image.Image:
    with Image.open(path) as img:
        return img.convert("RGB")


def extract(job: ExtractJob) -> ExtractResult:
    if job.batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    trunk, descriptor = build_backbone(job.weights, job.seed)
    sidecar_path = job.sidecar or job.out.with_name(job.out.name + ".json")

    skipped: list[SkippedImage] = []
    batch_ids: list[str] = []
    batch_tensors: list[torch.Tensor] = []

    with NfteWriter(job.out, FEATURE_DIM) as writer:

        def flush():
            if not batch_tensors:
                return
            with torch.no_grad():
                volume = trunk(torch.stack(batch_tensors))
            flat = volume.reshape(volume.shape[0], -1).numpy()
            for token, vector in zip(batch_ids, flat):
                writer.add(token, vector.astype(np.float32, copy=False))
            batch_ids.clear()
            batch_tensors.clear()

        for token, path in job.entries:
            try:
                image = _decode(path)
            except (OSError, ValueError) as exc:
                reason = str(exc) or type(exc).__name__
                skipped.append(SkippedImage(token, str(path), reason))
                continue
            batch_ids.append(token)
            batch_tensors.append(_PREPROCESS(image))
            if len(batch_tensors) >= job.batch_size:
                flush()
        flush()
        written = writer.count

    body = {
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "model": descriptor,
        "preprocessing": {
            "resize_shorter_side": RESIZE_SHORTER_SIDE,
            "center_crop": CENTER_CROP,
            "interpolation": "bilinear",
            "normalize_mean": list(NORMALIZE_MEAN),
            "normalize_std": list(NORMALIZE_STD),
            "flatten_order": "C order over (channel, row, column)",
        },
        "output": {"count": written, "dim": FEATURE_DIM},
        "errors": [
            {"token_id": s.token_id, "path": s.path, "reason": s.reason}
            for s in skipped
        ],
    }
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(body, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return ExtractResult(written=written, skipped=skipped,
                         out=job.out, sidecar=sidecar_path)
