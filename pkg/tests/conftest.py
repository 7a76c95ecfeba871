import math

import numpy as np
import pytest

from cvbeam.geometry import CameraIntrinsics, CartesianPoint, DetectionRecord, ObjectClass, bbox_around
from cvbeam.pipeline import detection_to_json

# filled by tests/test_acceptance.py, printed at the end of the session
ACCEPTANCE_REPORT = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_REPORT, key=lambda l: int(l.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)


def synthetic_truths(n, cam, seed=0, r_range=(1.0, 8.0)):
    """Random camera-frame points whose projection lands well inside the image."""
    rng = np.random.default_rng(seed)
    w, h = cam.image_size
    cx, cy = cam.principal_point
    f = cam.focal_length_px
    pts = []
    for _ in range(n):
        u, v = rng.uniform(0.1 * w, 0.9 * w), rng.uniform(0.1 * h, 0.9 * h)
        r = rng.uniform(*r_range)
        a, b = (u - cx) / f, (v - cy) / f
        z = r / math.sqrt(1 + a * a + b * b)
        pts.append(CartesianPoint(a * z, b * z, z))
    return pts


def write_detections(path, cam, truths, range_bias_m=0.0, extra_lines=(), with_person=False):
    lines = []
    for i, p in enumerate(truths):
        center = cam.project(p)
        if with_person:
            person = DetectionRecord(i, ObjectClass.PERSON, bbox_around(center, 60.0), p.norm + 0.2)
            lines.append(detection_to_json(person))
        det = DetectionRecord(i, ObjectClass.MOBILE, bbox_around(center), p.norm + range_bias_m, ground_truth=p)
        lines.append(detection_to_json(det))
    lines.extend(extra_lines)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def camera():
    return CameraIntrinsics(1000.0, (960.0, 540.0), (1920, 1080))
