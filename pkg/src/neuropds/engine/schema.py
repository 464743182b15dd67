"""Answer payload schemas: the whitelist that defines "low-dimensional".

Every persisted answer is validated against its schema on write. Two global
rules enforce the privacy shape of answers regardless of schema:

  * at most 1024 numeric values in a payload;
  * no field may hold a raw sample series (schemas whitelist their fields,
    and unknown or sample-typed fields are rejected).
"""

from __future__ import annotations

from typing import Any, Callable

from ..errors import PayloadRejected, UnknownSchema

MAX_PAYLOAD_VALUES = 1024

# Field names that would smuggle a sample series; rejected in any schema.
FORBIDDEN_FIELDS = frozenset({"samples", "raw", "signal", "waveform", "trace"})


def count_numeric_values(value: Any) -> int:
    if isinstance(value, bool):
        return 0
    if isinstance(value, (int, float)):
        return 1
    if isinstance(value, str) or value is None:
        return 0
    if isinstance(value, (list, tuple)):
        return sum(count_numeric_values(v) for v in value)
    if isinstance(value, dict):
        return sum(count_numeric_values(v) for v in value.values())
    raise PayloadRejected(f"payload value of type {type(value).__name__} is not serializable")


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise PayloadRejected(message)


def _check_keys(payload: dict, required: set[str], where: str) -> None:
    _require(isinstance(payload, dict), f"{where} must be an object")
    _require(
        set(payload.keys()) == required,
        f"{where} must have exactly fields {sorted(required)}, got {sorted(payload.keys())}",
    )


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _validate_band_power(p: dict) -> None:
    _check_keys(p, {"band", "power_uv2"}, "band_power payload")
    _require(isinstance(p["band"], str), "band must be a string")
    _require(_is_number(p["power_uv2"]), "power_uv2 must be a number")


def _validate_spectrogram(p: dict) -> None:
    _check_keys(p, {"frames"}, "spectrogram payload")
    _require(isinstance(p["frames"], list), "frames must be a list")
    for frame in p["frames"]:
        _check_keys(frame, {"t_start", "peaks"}, "spectrogram frame")
        _require(_is_number(frame["t_start"]), "t_start must be a number")
        _require(isinstance(frame["peaks"], list), "peaks must be a list")
        _require(all(_is_number(v) for v in frame["peaks"]), "peaks must be numbers")


def _validate_alpha_asymmetry(p: dict) -> None:
    _check_keys(p, {"left", "right", "asymmetry"}, "alpha_asymmetry payload")
    for key in ("left", "right", "asymmetry"):
        _require(_is_number(p[key]), f"{key} must be a number")


def _validate_drowsiness(p: dict) -> None:
    _check_keys(p, {"p4", "p14", "ratio"}, "drowsiness payload")
    for key in ("p4", "p14", "ratio"):
        _require(_is_number(p[key]), f"{key} must be a number")


def _validate_fingerprint(p: dict) -> None:
    _check_keys(p, {"kind", "vector"}, "fingerprint payload")
    _require(p["kind"] in ("AR_COEFFS", "ALPHA_SUBBANDS"), f"unknown fingerprint kind {p['kind']!r}")
    _require(isinstance(p["vector"], list), "vector must be a list")
    _require(all(_is_number(v) for v in p["vector"]), "vector entries must be numbers")


def _validate_ica(p: dict) -> None:
    _check_keys(p, {"n_components", "converged", "unmixing"}, "ica payload")
    _require(isinstance(p["n_components"], int) and not isinstance(p["n_components"], bool), "n_components must be an integer")
    _require(isinstance(p["converged"], bool), "converged must be a boolean")
    _require(isinstance(p["unmixing"], list), "unmixing must be a nested list")
    for row in p["unmixing"]:
        _require(isinstance(row, list) and all(_is_number(v) for v in row), "unmixing rows must be numeric lists")


def _validate_drowsy_places(p: dict) -> None:
    _check_keys(p, {"clusters"}, "drowsy_places payload")
    _require(isinstance(p["clusters"], list), "clusters must be a list")
    for cluster in p["clusters"]:
        _check_keys(cluster, {"lat", "lon", "mean_ratio", "n"}, "drowsy_places cluster")
        for key in ("lat", "lon", "mean_ratio"):
            _require(_is_number(cluster[key]), f"{key} must be a number")
        _require(isinstance(cluster["n"], int) and not isinstance(cluster["n"], bool), "n must be an integer")


SCHEMAS: dict[str, Callable[[dict], None]] = {
    "band_power": _validate_band_power,
    "spectrogram": _validate_spectrogram,
    "alpha_asymmetry": _validate_alpha_asymmetry,
    "drowsiness": _validate_drowsiness,
    "fingerprint": _validate_fingerprint,
    "ica": _validate_ica,
    "drowsy_places": _validate_drowsy_places,
}


def known_schema(schema_id: str) -> bool:
    return schema_id in SCHEMAS


def validate_payload(schema_id: str, payload: dict) -> None:
    """Raise PayloadRejected unless `payload` conforms to its schema and caps."""
    validator = SCHEMAS.get(schema_id)
    if validator is None:
        raise UnknownSchema(f"no payload schema {schema_id!r}")
    _scan_forbidden(payload)
    validator(payload)
    n_values = count_numeric_values(payload)
    if n_values > MAX_PAYLOAD_VALUES:
        raise PayloadRejected(
            f"payload holds {n_values} numeric values, cap is {MAX_PAYLOAD_VALUES}"
        )


def _scan_forbidden(value: Any) -> None:
    if isinstance(value, dict):
        for key, sub in value.items():
            if key in FORBIDDEN_FIELDS:
                raise PayloadRejected(f"field {key!r} looks like a raw sample series")
            _scan_forbidden(sub)
    elif isinstance(value, (list, tuple)):
        for sub in value:
            _scan_forbidden(sub)
