"""JSON scenario configuration.

A configuration file looks like::

    {
      "scenario_id": "indoor",
      "carrier_frequency_hz": 4.7e9,
      "rx": {"count_x": 16, "count_y": 16, "spacing_x": 0.125, "spacing_y": 0.125,
             "pattern": "patch-theta", "efficiency": "ideal",
             "clusters": "indoor-nlos-rx"},
      "tx": {"count_x": 4, "count_y": 4, "spacing_x": 0.5, "spacing_y": 0.5,
             "pattern": "patch-theta", "efficiency": "ideal",
             "clusters": [{"theta_deg": 60, "phi_deg": 0, "concentration": 5, "weight": 1}]},
      "polarization": {"xpr_mean_db": 10, "xpr_std_db": 4},
      "snr_db": 0,
      "num_realizations": 300,
      "master_seed": 7
    }

Spacings are fractions of the carrier wavelength.  :data:`CONFIG_SCHEMA`
is the JSON Schema for this layout; :func:`parse_config` performs the
same checks by hand so that errors carry a field path.
"""
from dataclasses import dataclass
import hashlib
import json
import math
import os

from .antenna import EFFICIENCY_DOMAINS, EfficiencyModel, load_pattern_csv
from .errors import ConfigurationError, HoloMimoError
from .geometry import build_array
from .presets import CARRIER_HZ, CLUSTER_PRESETS, PATTERN_PRESETS, SPEED_OF_LIGHT, spectrum_from_rows
from .synthesis import PolarizationParams, Scenario

DEFAULT_SPACINGS = (0.5, 0.25, 0.125)
WEIGHT_TOL = 1e-6

_CLUSTER_SCHEMA = {
    "type": "object",
    "required": ["theta_deg", "phi_deg", "concentration", "weight"],
    "additionalProperties": False,
    "properties": {
        "theta_deg": {"type": "number", "minimum": 0, "maximum": 180},
        "phi_deg": {"type": "number"},
        "concentration": {"type": "number", "minimum": 0},
        "weight": {"type": "number", "exclusiveMinimum": 0},
    },
}
_END_SCHEMA = {
    "type": "object",
    "required": ["count_x", "count_y", "spacing_x", "spacing_y"],
    "additionalProperties": False,
    "properties": {
        "count_x": {"type": "integer", "minimum": 1},
        "count_y": {"type": "integer", "minimum": 1},
        "spacing_x": {"type": "number", "exclusiveMinimum": 0},
        "spacing_y": {"type": "number", "exclusiveMinimum": 0},
        "pattern": {
            "oneOf": [
                {"enum": sorted(PATTERN_PRESETS)},
                {"type": "object", "required": ["csv"], "properties": {"csv": {"type": "string"}}},
            ]
        },
        "efficiency": {"enum": ["ideal", "hannan"]},
        "clusters": {
            "oneOf": [{"enum": sorted(CLUSTER_PRESETS)}, {"type": "array", "minItems": 1, "items": _CLUSTER_SCHEMA}]
        },
    },
}
CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["rx", "tx"],
    "additionalProperties": False,
    "properties": {
        "scenario_id": {"type": "string"},
        "carrier_frequency_hz": {"type": "number", "exclusiveMinimum": 0},
        "rx": _END_SCHEMA,
        "tx": _END_SCHEMA,
        "polarization": {
            "oneOf": [
                {"const": "inf"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "xpr_mean_db": {"oneOf": [{"type": "number"}, {"const": "inf"}]},
                        "xpr_std_db": {"type": "number", "minimum": 0},
                        "random_phase": {"type": "boolean"},
                    },
                },
            ]
        },
        "snr_db": {"type": "number"},
        "num_realizations": {"type": "integer", "minimum": 1},
        "master_seed": {"type": "integer", "minimum": 0},
        "spacings": {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMinimum": 0}},
        "normalization": {"enum": ["per-spacing", "common"]},
        "efficiency_domain": {"enum": list(EFFICIENCY_DOMAINS)},
    },
}


@dataclass(frozen=True)
class EndConfig:
    count_x: int
    count_y: int
    spacing_x: float  # fraction of the wavelength
    spacing_y: float
    pattern: object  # preset name or {"csv": path}
    efficiency: str
    clusters: tuple  # ((theta_deg, phi_deg, concentration, weight), ...), weights sum to one


@dataclass(frozen=True)
class ScenarioConfig:
    scenario_id: str
    carrier_frequency_hz: float
    rx: EndConfig
    tx: EndConfig
    polarization: PolarizationParams
    snr_db: float
    num_realizations: int
    master_seed: int
    spacings: tuple
    normalization: str
    efficiency_domain: str
    base_dir: str = "."
    digest: str = ""

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_frequency_hz

    @property
    def snr(self):
        return 10.0 ** (self.snr_db / 10.0)

    def _pattern(self, end, where):
        if isinstance(end.pattern, str):
            return PATTERN_PRESETS[end.pattern]
        path = end.pattern["csv"]
        if not os.path.isabs(path):
            path = os.path.join(self.base_dir, path)
        try:
            return load_pattern_csv(path)
        except ConfigurationError as exc:
            raise ConfigurationError(str(exc), f"{where}.pattern") from exc

    def scenario(self):
        """Build the :class:`~holomimo.synthesis.Scenario` this file describes."""
        lam = self.wavelength
        arrays = {}
        for where, end, role in (("rx", self.rx, "receive"), ("tx", self.tx, "transmit")):
            try:
                arrays[where] = build_array(
                    end.spacing_x * lam, end.spacing_y * lam, end.count_x, end.count_y, lam, role
                )
            except HoloMimoError as exc:
                raise ConfigurationError(str(exc), where) from exc
        return Scenario(
            arrays["rx"],
            arrays["tx"],
            spectrum_from_rows(self.rx.clusters),
            spectrum_from_rows(self.tx.clusters),
            self._pattern(self.rx, "rx"),
            self._pattern(self.tx, "tx"),
            EfficiencyModel(self.rx.efficiency),
            EfficiencyModel(self.tx.efficiency),
            self.polarization,
            self.efficiency_domain,
            self.scenario_id,
        )


def _number(value, field, minimum=None, strict=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigurationError(f"expected a finite number, got {value!r}", field)
    if minimum is not None and (value <= minimum if strict else value < minimum):
        op = ">" if strict else ">="
        raise ConfigurationError(f"must be {op} {minimum}, got {value!r}", field)
    return float(value)


def _integer(value, field, minimum):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"expected an integer, got {value!r}", field)
    if value < minimum:
        raise ConfigurationError(f"must be >= {minimum}, got {value}", field)
    return value


def _check_keys(obj, allowed, required, field):
    if not isinstance(obj, dict):
        raise ConfigurationError(f"expected an object, got {type(obj).__name__}", field or "config")
    for key in obj:
        if key not in allowed:
            raise ConfigurationError(f"unknown key {key!r}", f"{field}.{key}" if field else key)
    for key in required:
        if key not in obj:
            raise ConfigurationError("missing required key", f"{field}.{key}" if field else key)


def _clusters(raw, field):
    if isinstance(raw, str):
        if raw not in CLUSTER_PRESETS:
            raise ConfigurationError(f"unknown cluster preset {raw!r}; known: {sorted(CLUSTER_PRESETS)}", field)
        return tuple(CLUSTER_PRESETS[raw])
    if not isinstance(raw, list) or not raw:
        raise ConfigurationError("expected a preset name or a non-empty list", field)
    rows = []
    for i, c in enumerate(raw):
        f = f"{field}[{i}]"
        _check_keys(c, _CLUSTER_SCHEMA["properties"], _CLUSTER_SCHEMA["required"], f)
        theta = _number(c["theta_deg"], f + ".theta_deg")
        if not 0.0 <= theta <= 180.0:
            raise ConfigurationError(f"must lie in [0, 180], got {theta}", f + ".theta_deg")
        rows.append(
            (
                theta,
                _number(c["phi_deg"], f + ".phi_deg"),
                _number(c["concentration"], f + ".concentration", 0.0),
                _number(c["weight"], f + ".weight", 0.0, strict=True),
            )
        )
    total = sum(r[3] for r in rows)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise ConfigurationError(f"cluster weights sum to {total:g}, expected 1", field)
    # Remove the residual rounding so the spectrum sees an exact mixture.
    return tuple((t, p, a, w / total) for t, p, a, w in rows)


def _end(raw, field):
    props = _END_SCHEMA["properties"]
    _check_keys(raw, props, _END_SCHEMA["required"], field)
    pattern = raw.get("pattern", "isotropic-theta")
    if isinstance(pattern, str):
        if pattern not in PATTERN_PRESETS:
            raise ConfigurationError(f"unknown pattern preset {pattern!r}; known: {sorted(PATTERN_PRESETS)}", field + ".pattern")
    else:
        _check_keys(pattern, {"csv"}, ["csv"], field + ".pattern")
        if not isinstance(pattern["csv"], str):
            raise ConfigurationError("expected a file path", field + ".pattern.csv")
        pattern = {"csv": pattern["csv"]}
    efficiency = raw.get("efficiency", "ideal")
    if efficiency not in props["efficiency"]["enum"]:
        raise ConfigurationError(f"unknown efficiency {efficiency!r}", field + ".efficiency")
    return EndConfig(
        _integer(raw["count_x"], field + ".count_x", 1),
        _integer(raw["count_y"], field + ".count_y", 1),
        _number(raw["spacing_x"], field + ".spacing_x", 0.0, strict=True),
        _number(raw["spacing_y"], field + ".spacing_y", 0.0, strict=True),
        pattern,
        efficiency,
        _clusters(raw.get("clusters", "isotropic"), field + ".clusters"),
    )


def _polarization(raw):
    if raw is None or raw == "inf":
        return PolarizationParams()
    _check_keys(raw, CONFIG_SCHEMA["properties"]["polarization"]["oneOf"][1]["properties"], (), "polarization")
    mean = raw.get("xpr_mean_db", "inf")
    mean = math.inf if mean == "inf" else _number(mean, "polarization.xpr_mean_db")
    std = _number(raw.get("xpr_std_db", 0.0), "polarization.xpr_std_db", 0.0)
    phase = raw.get("random_phase", True)
    if not isinstance(phase, bool):
        raise ConfigurationError("expected true or false", "polarization.random_phase")
    return PolarizationParams(mean, std, phase)


def config_digest(raw):
    """SHA-256 of the canonical JSON form of a parsed configuration."""
    text = json.dumps(raw, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(text.encode()).hexdigest()


def parse_config(raw, base_dir="."):
    """Validate a decoded JSON object and return a :class:`ScenarioConfig`."""
    _check_keys(raw, CONFIG_SCHEMA["properties"], CONFIG_SCHEMA["required"], "")
    carrier = _number(raw.get("carrier_frequency_hz", CARRIER_HZ), "carrier_frequency_hz", 0.0, strict=True)
    spacings = raw.get("spacings", list(DEFAULT_SPACINGS))
    if not isinstance(spacings, list) or not spacings:
        raise ConfigurationError("expected a non-empty list of wavelength fractions", "spacings")
    spacings = tuple(_number(s, f"spacings[{i}]", 0.0, strict=True) for i, s in enumerate(spacings))
    normalization = raw.get("normalization", "per-spacing")
    if normalization not in ("per-spacing", "common"):
        raise ConfigurationError(f"unknown normalization {normalization!r}", "normalization")
    domain = raw.get("efficiency_domain", "power")
    if domain not in EFFICIENCY_DOMAINS:
        raise ConfigurationError(f"unknown efficiency domain {domain!r}", "efficiency_domain")
    scenario_id = raw.get("scenario_id", "scenario")
    if not isinstance(scenario_id, str):
        raise ConfigurationError("expected a string", "scenario_id")
    return ScenarioConfig(
        scenario_id,
        carrier,
        _end(raw["rx"], "rx"),
        _end(raw["tx"], "tx"),
        _polarization(raw.get("polarization")),
        _number(raw.get("snr_db", 0.0), "snr_db"),
        _integer(raw.get("num_realizations", 100), "num_realizations", 1),
        _integer(raw.get("master_seed", 0), "master_seed", 0),
        spacings,
        normalization,
        domain,
        base_dir,
        config_digest(raw),
    )


def load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc.strerror}", "config") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path} is not valid JSON: {exc}", "config") from exc
    return parse_config(raw, os.path.dirname(os.path.abspath(path)))
