"""Declarative model descriptions.

Two equivalent encodings of a layer stack: a small text format for CLI use
(one layer per line, `kind key=value ...`, # comments allowed) and plain
dicts for JSON payloads and manifests. docs/model-spec.md documents the text
format with complete examples.
"""

from __future__ import annotations

from . import nn


class ModelSpecError(ValueError):
    pass


_TRUE = {"on", "yes", "true", "1"}
_FALSE = {"off", "no", "false", "0"}


def _parse_bool(raw: str, key: str) -> bool:
    lowered = raw.lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ModelSpecError(f"{key} must be on/off, got {raw!r}")


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ModelSpecError(f"{key} must be an integer, got {raw!r}") from None


def layer_from_fields(kind: str, fields: dict[str, str]) -> nn.LayerSpec:
    """Build a LayerSpec from string key/value fields (the text format's
    vocabulary: in, out, filters, kernel, width, bias, skip)."""
    fields = dict(fields)

    def take_int(key):
        if key not in fields:
            raise ModelSpecError(f"{kind} layer needs {key}=<int>")
        return _parse_int(fields.pop(key), key)

    def take_bool(key, default):
        if key in fields:
            return _parse_bool(fields.pop(key), key)
        return default

    try:
        if kind == "dense":
            spec = nn.dense(take_int("in"), take_int("out"), bias=take_bool("bias", True))
        elif kind == "conv2d":
            spec = nn.conv2d(
                take_int("in"), take_int("filters"), take_int("kernel"),
                bias=take_bool("bias", True),
            )
        elif kind == "relu":
            spec = nn.relu()
        elif kind == "flatten":
            spec = nn.flatten()
        elif kind == "residual-block":
            spec = nn.residual_block(
                take_int("width"), skip=take_bool("skip", True), bias=take_bool("bias", True)
            )
        else:
            raise ModelSpecError(f"unknown layer kind {kind!r}")
    except ValueError as e:
        if isinstance(e, ModelSpecError):
            raise
        raise ModelSpecError(str(e)) from None
    if fields:
        raise ModelSpecError(f"unexpected {kind} fields: {', '.join(sorted(fields))}")
    return spec


def parse_model_file(text: str) -> list[nn.LayerSpec]:
    """Parse the text format; raises ModelSpecError with the line number."""
    model = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        fields = {}
        for part in parts[1:]:
            if "=" not in part:
                raise ModelSpecError(f"line {lineno}: expected key=value, got {part!r}")
            key, value = part.split("=", 1)
            fields[key] = value
        try:
            model.append(layer_from_fields(parts[0], fields))
        except ModelSpecError as e:
            raise ModelSpecError(f"line {lineno}: {e}") from None
    if not model:
        raise ModelSpecError("model file has no layers")
    return model


def model_to_dicts(model: list[nn.LayerSpec]) -> list[dict]:
    out = []
    for spec in model:
        if spec.kind == "dense":
            out.append({"kind": "dense", "in": spec.fan_in, "out": spec.fan_out, "bias": spec.has_bias})
        elif spec.kind == "conv2d":
            out.append({
                "kind": "conv2d", "in": spec.in_channels, "filters": spec.filters,
                "kernel": spec.kernel, "bias": spec.has_bias,
            })
        elif spec.kind == "residual-block":
            out.append({
                "kind": "residual-block", "width": spec.fan_in,
                "skip": spec.skip_enabled, "bias": spec.has_bias,
            })
        else:
            out.append({"kind": spec.kind})
    return out


def layer_from_dict(d: dict) -> nn.LayerSpec:
    d = dict(d)
    kind = d.pop("kind", None)
    if not kind:
        raise ModelSpecError("layer dict needs a 'kind'")
    fields = {}
    for key, value in d.items():
        if isinstance(value, bool):
            fields[key] = "on" if value else "off"
        else:
            fields[key] = str(value)
    return layer_from_fields(kind, fields)


def model_from_dicts(layers: list[dict]) -> list[nn.LayerSpec]:
    if not layers:
        raise ModelSpecError("model has no layers")
    return [layer_from_dict(d) for d in layers]
