"""Experiment configuration: schema-validated JSON configs, canonical
hashing, and run manifests.

A run directory is named by the first 12 hex digits of the sha256 of the
canonical config encoding; manifests record the config echo, grid metadata,
seeds, and per-file checksums so downstream stages (and the verify command)
can detect tampering.  Nothing time-dependent is written, so reruns with the
same config are byte-identical.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import jsonschema

__all__ = [
    "CONFIG_SCHEMA",
    "ConfigError",
    "load_config",
    "config_hash",
    "canonical_json",
    "run_dir",
    "write_manifest",
    "update_manifest_files",
    "verify_checksums",
]


class ConfigError(ValueError):
    pass


CONFIG_SCHEMA = {
    "type": "object",
    "required": ["problem", "potential", "wells", "grid"],
    "additionalProperties": False,
    "properties": {
        "problem": {"enum": ["front1d", "planar2d"]},
        "potential": {
            "type": "object",
            "required": ["name"],
            "additionalProperties": False,
            "properties": {
                "name": {"type": "string"},
                "params": {"type": "object"},
            },
        },
        "wells": {
            "type": "object",
            "required": ["minus", "plus"],
            "additionalProperties": False,
            "properties": {
                "minus": {"type": "array", "items": {"type": "number"}},
                "plus": {"type": "array", "items": {"type": "number"}},
            },
        },
        "grid": {
            "type": "object",
            "required": ["L1", "n1"],
            "additionalProperties": False,
            "properties": {
                "L1": {"type": "number", "exclusiveMinimum": 0},
                "n1": {"type": "integer", "minimum": 3},
                "L2": {"type": "number", "exclusiveMinimum": 0},
                "n2": {"type": "integer", "minimum": 3},
            },
        },
        "heteroclinic": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tol": {"type": "number"},
                "max_iter": {"type": "integer"},
                "init_width": {"type": "number"},
                "init_offaxis": {"type": "number"},
                "reflect_component": {"type": "integer"},
                "bump": {
                    "type": "object",
                    "required": ["delta"],
                    "additionalProperties": False,
                    "properties": {
                        "delta": {"type": "number", "exclusiveMinimum": 0},
                        "center": {},
                        "radius": {},
                        "local_radius": {"type": "number"},
                    },
                },
            },
        },
        "constants": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "seed": {"type": "integer"},
                "safety_factor": {"type": "number"},
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "bracket": {"type": "array", "items": {"type": "number"},
                            "minItems": 2, "maxItems": 2},
                "tol_c": {"type": "number"},
                "tol": {"type": "number"},
                "max_iter": {"type": "integer"},
                "t_ref": {"type": "number"},
                "T0": {"type": "number"},
            },
        },
        "evolve": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dt": {"type": "number"},
                "horizon": {"type": "number"},
                "snapshots": {"type": "integer"},
            },
        },
        "seeds": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"master": {"type": "integer"}},
        },
    },
}


def load_config(path: str | Path) -> dict:
    """Read, schema-validate, and lightly cross-check a config file."""
    try:
        cfg = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        field = "/".join(str(x) for x in exc.absolute_path) or "(root)"
        raise ConfigError(f"config field '{field}': {exc.message}") from exc
    if cfg["problem"] == "planar2d":
        grid = cfg["grid"]
        if "L2" not in grid or "n2" not in grid:
            raise ConfigError("config field 'grid': planar2d requires L2 and n2")
    for key in ("n1", "n2"):
        if key in cfg["grid"] and cfg["grid"][key] % 2 == 0:
            raise ConfigError(f"config field 'grid/{key}': node counts must be odd")
    return cfg


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()[:12]


def run_dir(cfg: dict, out_root: str | Path) -> Path:
    d = Path(out_root) / config_hash(cfg)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(cfg: dict, rdir: Path, extra: dict | None = None) -> Path:
    man_path = rdir / "manifest.json"
    manifest = {"config": cfg, "config_hash": config_hash(cfg), "files": {},
                "provenance": {}}
    if man_path.exists():
        manifest = json.loads(man_path.read_text())
    if extra:
        manifest["provenance"].update(extra)
    man_path.write_text(json.dumps(manifest, sort_keys=True, indent=1))
    return man_path


def update_manifest_files(rdir: Path, names: list) -> None:
    man_path = rdir / "manifest.json"
    manifest = json.loads(man_path.read_text()) if man_path.exists() else \
        {"files": {}, "provenance": {}}
    for name in names:
        p = rdir / name
        if p.exists():
            manifest.setdefault("files", {})[name] = _sha256(p)
    man_path.write_text(json.dumps(manifest, sort_keys=True, indent=1))


def verify_checksums(rdir: Path) -> list:
    """Return the list of files whose checksum no longer matches the
    manifest (empty means intact)."""
    man_path = rdir / "manifest.json"
    if not man_path.exists():
        raise ConfigError(f"no manifest in {rdir}")
    manifest = json.loads(man_path.read_text())
    bad = []
    for name, digest in manifest.get("files", {}).items():
        p = rdir / name
        if not p.exists() or _sha256(p) != digest:
            bad.append(name)
    return bad
