"""Localization from a JSON-lines detections file.

Each line holds one detection::

    {"frame_id": 3, "class": "mobile", "bbox": [u_min, v_min, u_max, v_max],
     "range_m": 4.2, "ground_truth": [x, y, z]}

``ground_truth`` is optional. Person detections are counted but not
localized; the person-then-phone cascade runs upstream of this file.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .errors import CvbeamError, EmptyInputError
from .geometry import (
    CameraIntrinsics,
    CartesianPoint,
    DetectionRecord,
    ErrorStats,
    ObjectClass,
    SphericalPoint,
    cartesian_to_spherical,
    detection_to_cartesian,
    localization_error_stats,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LocalizedDetection:
    record: DetectionRecord
    position: CartesianPoint
    spherical: SphericalPoint


@dataclass
class PipelineResult:
    estimates: List[LocalizedDetection] = field(default_factory=list)
    stats: Optional[ErrorStats] = None
    n_malformed: int = 0
    n_rejected: int = 0
    n_person: int = 0


def parse_detection(line: str) -> DetectionRecord:
    """Parse one JSON line; raises ValueError/KeyError/TypeError/CvbeamError on bad input."""
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("detection line is not a JSON object")
    bbox = tuple(float(v) for v in obj["bbox"])
    if len(bbox) != 4:
        raise ValueError("bbox needs 4 numbers")
    gt = obj.get("ground_truth")
    if gt is not None:
        x, y, z = (float(v) for v in gt)
        gt = CartesianPoint(x, y, z)
    return DetectionRecord(
        frame_id=int(obj["frame_id"]),
        class_label=ObjectClass(obj["class"]),
        bbox=bbox,
        range_m=float(obj["range_m"]),
        ground_truth=gt,
    )


def detection_to_json(det: DetectionRecord) -> str:
    obj = {
        "frame_id": det.frame_id,
        "class": det.class_label.value,
        "bbox": list(det.bbox),
        "range_m": det.range_m,
    }
    if det.ground_truth is not None:
        obj["ground_truth"] = list(det.ground_truth.as_tuple())
    return json.dumps(obj)


def run_detection_pipeline(detections_path, cfg) -> PipelineResult:
    """Localize every mobile detection; ``cfg`` is an ExperimentConfig or bare CameraIntrinsics."""
    cam: CameraIntrinsics = getattr(cfg, "camera", cfg)
    result = PipelineResult()
    with open(detections_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                det = parse_detection(line)
            except (ValueError, KeyError, TypeError, CvbeamError) as exc:
                result.n_malformed += 1
                log.warning("%s:%d: skipping malformed detection (%s)", detections_path, lineno, exc)
                continue
            if det.class_label is ObjectClass.PERSON:
                result.n_person += 1
                log.info("%s:%d: person detection in frame %d", detections_path, lineno, det.frame_id)
                continue
            try:
                p = detection_to_cartesian(det, cam)
                s = cartesian_to_spherical(p)
            except CvbeamError as exc:
                result.n_rejected += 1
                log.warning("%s:%d: cannot localize detection (%s)", detections_path, lineno, exc)
                continue
            result.estimates.append(LocalizedDetection(det, p, s))

    if not result.estimates:
        raise EmptyInputError(f"no localizable mobile detections in {detections_path}")
    if result.n_malformed:
        log.warning("%d malformed line(s) skipped", result.n_malformed)

    pairs: List[Tuple[CartesianPoint, CartesianPoint]] = [
        (e.position, e.record.ground_truth) for e in result.estimates if e.record.ground_truth is not None
    ]
    if pairs:
        result.stats = localization_error_stats(pairs)
    return result
