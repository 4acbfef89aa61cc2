import hashlib
import importlib
import json
import types
import typing
from typing import Any

import chz
import numpy as np


# Configs nest arbitrary chz classes, so the concrete shape is only known at runtime.
JsonValue = Any


def _is_tuple_type(tp: object) -> bool:
    return tp is tuple or typing.get_origin(tp) is tuple


def _is_integer(value: object) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _coerce_field(value: JsonValue, field_type: object) -> JsonValue:
    """
    Undo what JSON and TOML lose: tuples come back as lists and integral floats as
    ints. Union fields such as `float | Literal["auto"]` are coerced per member.
    """
    if typing.get_origin(field_type) in (typing.Union, types.UnionType):
        members = typing.get_args(field_type)
    else:
        members = (field_type,)
    if isinstance(value, list) and any(_is_tuple_type(m) for m in members):
        return tuple(value)
    if _is_integer(value) and float in members and int not in members:
        return float(value)
    return value


class ConfigSerializer:
    """Dict round-trips, content hashes and Python reprs of chz experiment configs."""

    CLASS_MARKER = "__class__"

    @staticmethod
    def get_classname(obj: object) -> str:
        module = obj.__class__.__module__
        if module == "__main__":
            raise ValueError("Cannot serialize objects from __main__ module")
        return f"{module}.{obj.__class__.__qualname__}"

    @classmethod
    def to_dict(cls, obj: object) -> JsonValue:
        if chz.is_chz(obj):
            return {
                cls.CLASS_MARKER: cls.get_classname(obj),
                **{name: cls.to_dict(getattr(obj, name)) for name in chz.chz_fields(obj)},
            }
        if isinstance(obj, (list, tuple)):
            return [cls.to_dict(v) for v in obj]
        if isinstance(obj, dict):
            return {k: cls.to_dict(v) for k, v in obj.items()}
        if isinstance(obj, np.generic):
            return obj.item()
        return obj

    @classmethod
    def from_dict(cls, data: JsonValue) -> JsonValue:
        """Rebuild configs from `__class__`-tagged dicts (as written by `to_dict` or TOML)."""
        if isinstance(data, list):
            return [cls.from_dict(v) for v in data]
        if not isinstance(data, dict):
            return data
        if cls.CLASS_MARKER not in data:
            return {k: cls.from_dict(v) for k, v in data.items()}

        module_path, _, class_name = data[cls.CLASS_MARKER].rpartition(".")
        config_class = getattr(importlib.import_module(module_path), class_name)
        kwargs = {k: cls.from_dict(v) for k, v in data.items() if k != cls.CLASS_MARKER}
        if chz.is_chz(config_class):
            for name, field in chz.chz_fields(config_class).items():
                if name in kwargs:
                    kwargs[name] = _coerce_field(kwargs[name], field.final_type)
        return config_class(**kwargs)

    @classmethod
    def _canonical(cls, item: object) -> JsonValue:
        if chz.is_chz(item):
            item = cls.to_dict(item)
        if isinstance(item, dict):
            return {
                k: cls._canonical(v)
                for k, v in sorted(item.items())
                if k == cls.CLASS_MARKER or not str(k).startswith("_")
            }
        if isinstance(item, (list, tuple)):
            return [cls._canonical(v) for v in item]
        if isinstance(item, np.generic):
            item = item.item()
        if isinstance(item, float) and item.is_integer():
            # 1 and 1.0 hash alike so TOML and JSON spellings agree
            return int(item)
        if isinstance(item, (str, int, float, bool)) or item is None:
            return item
        raise TypeError(f"Cannot hash type: {type(item)}")

    @classmethod
    def compute_hash(cls, obj: object) -> str:
        """blake2s of the canonical JSON; private `_fields` do not contribute."""
        text = json.dumps(cls._canonical(obj), sort_keys=True, separators=(",", ":"))
        return hashlib.blake2s(text.encode(), digest_size=10).hexdigest()

    @classmethod
    def to_python(cls, obj: object, multiline: bool = True) -> str:
        """Evaluable constructor expression, as recorded in manifests."""

        def render(item: object, indent: int) -> str:
            if chz.is_chz(item):
                fields = [
                    f"{name}={render(getattr(item, name), indent + 4)}"
                    for name in chz.chz_fields(item)
                ]
                if not multiline or not fields:
                    return f"{cls.get_classname(item)}({', '.join(fields)})"
                inner = "".join(f"{' ' * (indent + 4)}{f},\n" for f in fields)
                return f"{cls.get_classname(item)}(\n{inner}{' ' * indent})"
            if isinstance(item, tuple):
                parts = ", ".join(render(v, indent) for v in item)
                return f"({parts}{',' if len(item) == 1 else ''})"
            if isinstance(item, list):
                return "[" + ", ".join(render(v, indent) for v in item) + "]"
            if isinstance(item, dict):
                return "{" + ", ".join(f"{k!r}: {render(v, indent)}" for k, v in item.items()) + "}"
            return repr(item)

        return render(obj, 0)


def set_dotted(data: dict[str, JsonValue], key: str, value: JsonValue) -> None:
    """Assign `value` at a dotted path inside nested config dicts."""
    parts = key.split(".")
    target = data
    for index, part in enumerate(parts[:-1]):
        child = target.get(part)
        if not isinstance(child, dict):
            path = ".".join(parts[: index + 1])
            raise KeyError(f"{path} is not a nested config section")
        target = child
    target[parts[-1]] = value


def parse_override(text: str) -> tuple[str, JsonValue]:
    """Parse `key=value`; values are read as JSON, falling back to plain strings."""
    key, sep, raw = text.partition("=")
    if not sep or not key.strip():
        raise ValueError(f"override must look like key=value, got {text!r}")
    raw = raw.strip()
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value
