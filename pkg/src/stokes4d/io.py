"""Flat key-value experiment configs and CSV result tables.

Configs are diff-friendly ``key = value`` text; unknown keys are rejected and
defaults are filled during normalization, so a normalized config plus the
package version identifies a run exactly.  Results go to a CSV with a fixed
per-kind schema plus a ``.meta`` sidecar carrying the normalized config and
its hash.
"""

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

from .errors import ConfigError
from .harness import CHANNEL_MODES, DETECTORS, FEEDBACK_MODES, ExperimentConfig

_MODES_WITH_BOTH = ("exact", "high_snr", "both")

# key -> (kind, default); choices kinds carry their allowed values
KEY_SPECS: Dict[str, Tuple] = {
    "constellation.n_r": ("int", 2),
    "constellation.n_p": ("int", 4),
    "constellation.r1": ("float", 1.0),
    "constellation.delta_sq": ("float_list", (1.0,)),
    "channel.mode": ("choice", "random", CHANNEL_MODES),
    "channel.a": ("complex", 1.0 + 0.0j),
    "channel.b": ("complex", 0.0 + 0.0j),
    "sweep.snr_db": ("float_list", (10.0,)),
    "block.length": ("int", 64),
    "mc.max_blocks": ("int", 20000),
    "mc.target_errors": ("int", 100),
    "mc.batch_blocks": ("int", 256),
    "detectors": ("str_list", ("sym",)),
    "mode": ("choice", "exact", _MODES_WITH_BOTH),
    "feedback": ("choice", "decision", FEEDBACK_MODES),
    "seed": ("int", 0),
    "rate.max_blocks": ("int", 400),
    "gap.target_ser": ("float", 1e-3),
    "gap.baseline": ("choice", "sym", DETECTORS),
    "gap.candidate": ("choice", "suc", DETECTORS),
}


def _parse_value(key: str, raw: str):
    spec = KEY_SPECS[key]
    kind = spec[0]
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "complex":
            return complex(raw.replace(" ", ""))
        if kind == "float_list":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if kind == "str_list":
            return tuple(v.strip() for v in raw.split(",") if v.strip())
        if kind == "choice":
            if raw not in spec[2]:
                raise ConfigError(
                    f"{key}: {raw!r} not one of {', '.join(spec[2])}"
                )
            return raw
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind}") from exc
    raise ConfigError(f"{key}: unsupported kind {kind!r}")


def _render_value(key: str, value) -> str:
    kind = KEY_SPECS[key][0]
    if kind == "int":
        return str(int(value))
    if kind == "float":
        return repr(float(value))
    if kind == "complex":
        return repr(complex(value))
    if kind == "float_list":
        return ", ".join(repr(float(v)) for v in value)
    if kind == "str_list":
        return ", ".join(value)
    return str(value)


def parse_config(text: str) -> Dict[str, object]:
    """Parse ``key = value`` lines; '#' starts a comment, blanks are skipped."""
    out: Dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in KEY_SPECS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = _parse_value(key, raw)
    return out


def normalize_config(cfg: Dict[str, object]) -> Dict[str, object]:
    """Fill defaults and validate list contents; returns a complete config."""
    out = {}
    for key, spec in KEY_SPECS.items():
        out[key] = cfg.get(key, spec[1])
    for d in out["detectors"]:
        if d not in DETECTORS:
            raise ConfigError(f"detectors: unknown detector {d!r}")
    if not out["sweep.snr_db"]:
        raise ConfigError("sweep.snr_db: empty SNR grid")
    if not out["constellation.delta_sq"]:
        raise ConfigError("constellation.delta_sq: empty list")
    return out


def render_config(cfg: Dict[str, object]) -> str:
    return "".join(
        f"{key} = {_render_value(key, cfg[key])}\n" for key in sorted(cfg)
    )


def config_hash(cfg: Dict[str, object]) -> str:
    return hashlib.sha256(render_config(cfg).encode()).hexdigest()[:12]


def load_config(path) -> Dict[str, object]:
    return normalize_config(parse_config(Path(path).read_text()))


def resolve_modes(mode: str) -> Tuple[str, ...]:
    return ("exact", "high_snr") if mode == "both" else (mode,)


def experiment_from_config(
    cfg: Dict[str, object],
    delta_sq: float,
    threads: int = 1,
    detectors: Sequence[str] = None,
    snr_db: Sequence[float] = None,
) -> ExperimentConfig:
    """Build a resolved single-spacing experiment from a normalized config."""
    return ExperimentConfig(
        n_r=cfg["constellation.n_r"],
        n_p=cfg["constellation.n_p"],
        r1=cfg["constellation.r1"],
        delta_sq=delta_sq,
        snr_db=tuple(snr_db if snr_db is not None else cfg["sweep.snr_db"]),
        block_len=cfg["block.length"],
        max_blocks=cfg["mc.max_blocks"],
        target_errors=cfg["mc.target_errors"],
        batch_blocks=cfg["mc.batch_blocks"],
        detectors=tuple(detectors if detectors is not None else cfg["detectors"]),
        modes=resolve_modes(cfg["mode"]),
        channel_mode=cfg["channel.mode"],
        channel_a=cfg["channel.a"],
        channel_b=cfg["channel.b"],
        feedback=cfg["feedback"],
        seed=cfg["seed"],
        threads=threads,
        rate_max_blocks=cfg["rate.max_blocks"],
        gap_target_ser=cfg["gap.target_ser"],
        gap_baseline=cfg["gap.baseline"],
        gap_candidate=cfg["gap.candidate"],
    ).validate()


SCHEMAS: Dict[str, Tuple[Tuple[str, str], ...]] = {
    "ser": (
        ("snr_db", "float"),
        ("dimension", "int"),
        ("detector", "str"),
        ("mode", "str"),
        ("errors", "int"),
        ("trials", "int"),
        ("ser", "float"),
        ("ci_low", "float"),
        ("ci_high", "float"),
    ),
    "rate": (
        ("snr_db", "float"),
        ("rate_bits", "float"),
        ("stderr", "float"),
        ("samples", "int"),
    ),
    "gap": (
        ("dimension", "int"),
        ("target_ser", "float"),
        ("snr_db_base", "float"),
        ("snr_db_candidate", "float"),
        ("gap_db", "float"),
    ),
    "table1": (
        ("n_r", "int"),
        ("n_p", "int"),
        ("delta_sq_bl", "float"),
    ),
}


@dataclass
class ResultTable:
    """Rows of one experiment kind plus the metadata needed to rerun it."""

    kind: str
    rows: List[Tuple]
    metadata: Dict[str, str] = field(default_factory=dict)

    @property
    def columns(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in SCHEMAS[self.kind])


def _format_cell(value, kind: str) -> str:
    if kind == "int":
        return str(int(value))
    if kind == "float":
        return f"{float(value):.10g}"
    return str(value)


def write_results(table: ResultTable, path) -> None:
    """Write the CSV and its ``.meta`` sidecar (structured key-value text)."""
    path = Path(path)
    schema = SCHEMAS[table.kind]
    lines = [",".join(table.columns)]
    for row in table.rows:
        if len(row) != len(schema):
            raise ValueError(f"row width {len(row)} != schema width {len(schema)}")
        lines.append(",".join(_format_cell(v, k) for v, (_, k) in zip(row, schema)))
    path.write_text("\n".join(lines) + "\n")
    meta = dict(table.metadata)
    meta.setdefault("kind", table.kind)
    meta["rows"] = str(len(table.rows))
    meta["columns"] = ",".join(table.columns)
    meta_lines = [f"{k} = {meta[k]}" for k in sorted(meta)]
    path.with_suffix(".meta").write_text("\n".join(meta_lines) + "\n")


def read_results(path) -> ResultTable:
    """Parse a results CSV (and sidecar, if present) back into a table."""
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty results file")
    header = tuple(lines[0].split(","))
    kind = next((k for k, s in SCHEMAS.items() if tuple(n for n, _ in s) == header), None)
    if kind is None:
        raise ValueError(f"{path}: header matches no known schema")
    schema = SCHEMAS[kind]
    rows = []
    for line in lines[1:]:
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(schema):
            raise ValueError(f"{path}: row width {len(cells)} != {len(schema)}")
        row = []
        for cell, (_, k) in zip(cells, schema):
            if k == "int":
                row.append(int(cell))
            elif k == "float":
                row.append(float(cell))
            else:
                row.append(cell)
        rows.append(tuple(row))
    metadata: Dict[str, str] = {}
    meta_path = path.with_suffix(".meta")
    if meta_path.exists():
        for line in meta_path.read_text().splitlines():
            if " = " in line:
                k, v = line.split(" = ", 1)
                metadata[k] = v
    return ResultTable(kind=kind, rows=rows, metadata=metadata)
