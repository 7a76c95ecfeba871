"""Experiment configuration.

The config file is INI-style text: ``[section]`` headers followed by
``key = value`` lines, ``#`` or ``;`` comments. Every key is optional and an
empty file yields the defaults. Sections and keys::

    [experiment]  area_width_m, area_depth_m, grid_resolution, seed, elevation_offset_m
    [link]        carrier_hz, bandwidth_hz, tx_power_dbm_max, tx_power_dbm_min,
                  noise_figure_db, target_rsrp_dbm (``none`` disables power control)
    [array]       bs_n_h, bs_n_v, ue_n_h, ue_n_v, spacing_wavelengths,
                  oversampling_h, oversampling_v
    [ssb]         n_az, n_el, az_span_deg, el_span_deg, az_start_deg, el_start_deg,
                  burst_ms, period_ms
    [protocol]    csi_rs_period_ms, csi_rs_beams_per_round, refinement_ms,
                  cvbm_inference_ms, power_5gbm_w, power_cvbm_w
    [noise]       angle_error_std_deg, distance_error_std_cm, detection_success_prob
    [camera]      focal_length_px, cx, cy, width_px, height_px

Units: Hz, dBm, dB, m, cm, ms, W, degrees, pixels, as the key names say.
"""

from __future__ import annotations

import configparser
import logging
import re
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from .array import ArrayGeometry, Codebook, dft_codebook_upa
from .channel import LinkBudget
from .errors import ConfigParseError, ConfigValidationError, CvbeamError
from .geometry import CameraIntrinsics, LocalizationNoiseModel
from .protocol import ProtocolConfig, SsbGrid

log = logging.getLogger(__name__)

NONE_WORDS = ("", "none", "null")


def _opt_float(text: str) -> Optional[float]:
    return None if text.strip().lower() in NONE_WORDS else float(text)


# section -> key -> (parser, default)
SCHEMA: Dict[str, Dict[str, tuple]] = {
    "experiment": {
        "area_width_m": (float, 20.0),
        "area_depth_m": (float, 20.0),
        "grid_resolution": (int, 100),
        "seed": (int, 0),
        "elevation_offset_m": (float, 0.0),
    },
    "link": {
        "carrier_hz": (float, 1.0e11),
        "bandwidth_hz": (float, 1.0e9),
        "tx_power_dbm_max": (float, 30.0),
        "tx_power_dbm_min": (float, -10.0),
        "noise_figure_db": (float, 7.0),
        "target_rsrp_dbm": (_opt_float, None),
    },
    "array": {
        "bs_n_h": (int, 8),
        "bs_n_v": (int, 8),
        "ue_n_h": (int, 2),
        "ue_n_v": (int, 2),
        "spacing_wavelengths": (float, 0.5),
        "oversampling_h": (int, 2),
        "oversampling_v": (int, 2),
    },
    "ssb": {
        "n_az": (int, 8),
        "n_el": (int, 4),
        "az_span_deg": (float, 360.0),
        "el_span_deg": (float, 180.0),
        "az_start_deg": (_opt_float, None),
        "el_start_deg": (_opt_float, None),
        "burst_ms": (float, 5.0),
        "period_ms": (float, 20.0),
    },
    "protocol": {
        "csi_rs_period_ms": (float, 10.0),
        "csi_rs_beams_per_round": (int, 4),
        "refinement_ms": (float, 30.0),
        "cvbm_inference_ms": (float, 15.8),
        "power_5gbm_w": (float, 20.0),
        "power_cvbm_w": (float, 10.0),
    },
    "noise": {
        "angle_error_std_deg": (float, 0.23),
        "distance_error_std_cm": (float, 3.74),
        "detection_success_prob": (float, 0.9067),
    },
    "camera": {
        "focal_length_px": (float, 1000.0),
        "cx": (float, 960.0),
        "cy": (float, 540.0),
        "width_px": (int, 1920),
        "height_px": (int, 1080),
    },
}


@dataclass
class ExperimentConfig:
    values: Dict[str, Dict[str, object]]
    area: Tuple[float, float]
    grid_resolution: int
    seed: int
    elevation_offset_m: float
    link: LinkBudget
    target_rsrp_dbm: Optional[float]
    bs_array: ArrayGeometry
    ue_array: ArrayGeometry
    oversampling: Tuple[int, int]
    ssb: SsbGrid
    protocol: ProtocolConfig
    noise: LocalizationNoiseModel
    camera: CameraIntrinsics
    _codebook: Optional[Codebook] = field(default=None, repr=False)

    @property
    def codebook(self) -> Codebook:
        if self._codebook is None:
            self._codebook = dft_codebook_upa(self.bs_array, *self.oversampling)
        return self._codebook

    def replace(self, **overrides) -> "ExperimentConfig":
        """Copy with ``section__key=value`` overrides, revalidated."""
        values = {s: dict(v) for s, v in self.values.items()}
        for name, value in overrides.items():
            section, key = name.split("__", 1)
            if key not in SCHEMA.get(section, {}):
                raise ConfigParseError(f"unknown key '{section}.{key}'", field=f"{section}.{key}")
            values[section][key] = value
        return build_config(values)


def default_values() -> Dict[str, Dict[str, object]]:
    return {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()}


def _check(cond: bool, message: str):
    if not cond:
        raise ConfigValidationError(message)


def build_config(values: Dict[str, Dict[str, object]]) -> ExperimentConfig:
    """Validate a section/key value mapping and assemble the typed config."""
    e, ln, ar, ss, pr, no, ca = (values[s] for s in SCHEMA)
    _check(e["grid_resolution"] >= 2, "experiment.grid_resolution must be >= 2")
    _check(e["area_width_m"] > 0 and e["area_depth_m"] > 0, "experiment area dimensions must be positive")
    _check(ar["oversampling_h"] >= 1 and ar["oversampling_v"] >= 1, "array oversampling factors must be >= 1")
    section = "link"
    try:
        link = LinkBudget(**{k: v for k, v in ln.items() if k != "target_rsrp_dbm"})
        section = "array"
        bs = ArrayGeometry(ar["bs_n_h"], ar["bs_n_v"], ar["spacing_wavelengths"])
        ue = ArrayGeometry(ar["ue_n_h"], ar["ue_n_v"], ar["spacing_wavelengths"])
        section = "ssb"
        ssb = SsbGrid(**ss)
        section = "protocol"
        proto = ProtocolConfig(**pr)
        section = "noise"
        noise = LocalizationNoiseModel(**no)
        section = "camera"
        cam = CameraIntrinsics(ca["focal_length_px"], (ca["cx"], ca["cy"]), (ca["width_px"], ca["height_px"]))
    except CvbeamError as exc:
        raise ConfigValidationError(f"[{section}] {exc}") from exc
    return ExperimentConfig(
        values=values,
        area=(e["area_width_m"], e["area_depth_m"]),
        grid_resolution=e["grid_resolution"],
        seed=e["seed"],
        elevation_offset_m=e["elevation_offset_m"],
        link=link,
        target_rsrp_dbm=ln["target_rsrp_dbm"],
        bs_array=bs,
        ue_array=ue,
        oversampling=(ar["oversampling_h"], ar["oversampling_v"]),
        ssb=ssb,
        protocol=proto,
        noise=noise,
        camera=cam,
    )


def default_config() -> ExperimentConfig:
    return build_config(default_values())


_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s\[][^=:]*?)\s*[=:]")


def _line_index(text: str) -> Dict[Tuple[str, str], int]:
    where, section = {}, None
    for n, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip()
            where.setdefault((section, ""), n)
            continue
        m = _KEY_RE.match(line)
        if m and section is not None:
            where.setdefault((section, m.group(1).strip()), n)
    return where


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigParseError("key outside of any [section]", line=exc.lineno) from exc
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigParseError(exc.message.splitlines()[0], line=exc.lineno) from exc
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigParseError("malformed line", line=lineno) from exc

    lines = _line_index(text)
    if parser.defaults():
        raise ConfigParseError("unknown section [DEFAULT]", line=lines.get(("DEFAULT", "")), field="DEFAULT")
    values = default_values()
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigParseError(f"unknown section [{section}]", line=lines.get((section, "")), field=section)
        for key, raw in parser.items(section):
            name = f"{section}.{key}"
            if key not in SCHEMA[section]:
                raise ConfigParseError(f"unknown key '{name}'", line=lines.get((section, key)), field=name)
            conv = SCHEMA[section][key][0]
            try:
                values[section][key] = conv(raw)
            except ValueError as exc:
                raise ConfigParseError(
                    f"cannot parse {raw!r} as {getattr(conv, '__name__', 'value').lstrip('_')}",
                    line=lines.get((section, key)),
                    field=name,
                ) from exc
    cfg = build_config(values)
    for section, keys in cfg.values.items():
        for key, value in keys.items():
            log.info("config %s.%s = %s", section, key, value)
    return cfg


def load_config(path) -> ExperimentConfig:
    """Read, parse and validate a config file; ``None`` gives the defaults."""
    if path is None:
        return default_config()
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config_text(text, source=str(path))


def _fmt(value) -> str:
    if value is None:
        return "none"
    return repr(value) if isinstance(value, float) else str(value)


def dump_config(cfg_or_values) -> str:
    values = cfg_or_values.values if isinstance(cfg_or_values, ExperimentConfig) else cfg_or_values
    out = []
    for section, keys in values.items():
        out.append(f"[{section}]")
        out.extend(f"{k} = {_fmt(v)}" for k, v in keys.items())
        out.append("")
    return "\n".join(out)
