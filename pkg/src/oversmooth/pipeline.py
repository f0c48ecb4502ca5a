"""File formats, run manifests, and the cross-run correlation pipeline.

Matrices travel as `.dmat` text (header ``dmat 1 <rows> <cols>``, then one
space-separated row per line, shortest round-trip float formatting so a
write/read cycle is bit-exact) or as headerless rectangular CSV. A run
manifest is a JSON object describing one trained run: its depth, final
accuracy, per-layer feature files, an architecture label, and which
direction vector to measure against. ``correlate`` turns at least three such
runs into per-metric Pearson correlations between log-metric values at the
final layer and the accuracies.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInput,
    InsufficientRuns,
    InvalidParameter,
    IoError,
    LengthMismatch,
    ParseError,
    ShapeMismatch,
)
from .graph import Graph, constant_unit_vector, gcn_dominant_eigenvector
from .metrics import CANONICAL_METRICS, MetricReport, metric_suite

# Metric values are clamped here before the log transform.
CLAMP_FLOOR = 1e-15
# Rank metrics enter the correlation as (value - 1).
SHIFTED_METRICS = ("erank", "num_rank")

TRACE_COLUMNS = ("layer",) + CANONICAL_METRICS + ("frob_norm",)


def format_float(value) -> str:
    """Shortest decimal string that round-trips the float (NaN -> 'nan')."""
    return repr(float(value))


def write_matrix(m, path) -> None:
    """Write a `.dmat` file; reading it back is bit-exact."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeMismatch(f"matrix must be 2-D, got ndim={m.ndim}")
    lines = [f"dmat 1 {m.shape[0]} {m.shape[1]}"]
    for row in m:
        lines.append(" ".join(repr(float(v)) for v in row))
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _read_text(path) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _parse_float(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"not a number: {token!r}", line=lineno) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite entry {token!r}", line=lineno)
    return value


def _load_dmat(lines: list[str]) -> np.ndarray:
    header = lines[0].split()
    if len(header) != 4 or header[0] != "dmat":
        raise ParseError("header must be 'dmat 1 <rows> <cols>'", line=1)
    if header[1] != "1":
        raise ParseError(f"unsupported dmat version {header[1]!r}", line=1)
    try:
        rows, cols = int(header[2]), int(header[3])
    except ValueError:
        raise ParseError("header counts must be integers", line=1) from None
    if rows < 1 or cols < 1:
        raise ParseError("header counts must be >= 1", line=1)
    out = np.empty((rows, cols))
    filled = 0
    for offset, text in enumerate(lines[1:], start=2):
        if text.strip() == "":
            continue
        if filled == rows:
            raise ParseError("more data rows than the header promised", line=offset)
        tokens = text.split()
        if len(tokens) != cols:
            raise ParseError(f"expected {cols} values, got {len(tokens)}", line=offset)
        out[filled] = [_parse_float(t, offset) for t in tokens]
        filled += 1
    if filled != rows:
        raise ParseError(f"header promised {rows} rows, file has {filled}", line=len(lines))
    return out


def _load_csv(lines: list[str]) -> np.ndarray:
    rows = []
    width = None
    for offset, text in enumerate(lines, start=1):
        if text.strip() == "":
            continue
        tokens = [t.strip() for t in text.split(",")]
        if width is None:
            width = len(tokens)
        elif len(tokens) != width:
            raise ParseError(
                f"ragged row: expected {width} values, got {len(tokens)}", line=offset
            )
        rows.append([_parse_float(t, offset) for t in tokens])
    if not rows:
        raise ParseError("no data rows", line=1)
    return np.asarray(rows, dtype=np.float64)


def load_matrix(path, fmt: str | None = None) -> np.ndarray:
    """Load a `.dmat` or headerless CSV matrix; sniffs the format when
    ``fmt`` is None (a first line starting with ``dmat`` wins)."""
    if fmt not in (None, "dmat", "csv"):
        raise InvalidParameter(f"fmt must be None, 'dmat' or 'csv', got {fmt!r}")
    lines = _read_text(path).split("\n")
    if fmt is None:
        fmt = "dmat" if lines and lines[0].startswith("dmat") else "csv"
    return _load_dmat(lines) if fmt == "dmat" else _load_csv(lines)


def load_vector(path) -> np.ndarray:
    """Load a one-row or one-column matrix file as a vector."""
    m = load_matrix(path)
    if m.shape[0] != 1 and m.shape[1] != 1:
        raise ShapeMismatch(f"expected a vector-shaped file, got {m.shape[0]}x{m.shape[1]}")
    return m.ravel()


@dataclass(frozen=True)
class RunManifest:
    """One trained run: depth, accuracy, layer feature files, labels.

    ``u_source`` is 'gcn', 'const', or 'file'; ``u_path`` holds the file for
    the latter. Relative paths are resolved against the manifest location.
    """

    depth: int
    accuracy: float
    layer_paths: tuple[str, ...]
    arch_label: str
    u_source: str
    u_path: str | None = None


def read_manifest(path) -> RunManifest:
    text = _read_text(path)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ParseError("manifest must be a JSON object")
    base = os.path.dirname(os.path.abspath(path))

    def fail(msg: str):
        raise ParseError(f"{path}: {msg}")

    depth = raw.get("depth")
    if not isinstance(depth, int) or isinstance(depth, bool) or depth < 1:
        fail(f"'depth' must be an integer >= 1, got {depth!r}")
    accuracy = raw.get("accuracy")
    if isinstance(accuracy, bool) or not isinstance(accuracy, (int, float)):
        fail(f"'accuracy' must be a number, got {accuracy!r}")
    accuracy = float(accuracy)
    if not 0.0 <= accuracy <= 1.0:
        fail(f"'accuracy' must lie in [0, 1], got {accuracy}")
    paths = raw.get("layer_paths")
    if not isinstance(paths, list) or not paths or not all(isinstance(p, str) for p in paths):
        fail("'layer_paths' must be a nonempty list of strings")
    arch_label = raw.get("arch_label")
    if not isinstance(arch_label, str):
        fail(f"'arch_label' must be a string, got {arch_label!r}")
    source = raw.get("u_source")
    u_path = None
    if isinstance(source, str) and source in ("gcn", "const"):
        u_source = source
    elif isinstance(source, dict) and isinstance(source.get("file"), str):
        u_source = "file"
        u_path = source["file"] if os.path.isabs(source["file"]) else os.path.join(base, source["file"])
    else:
        fail(f"'u_source' must be 'gcn', 'const', or {{'file': path}}, got {source!r}")
    resolved = tuple(
        p if os.path.isabs(p) else os.path.join(base, p) for p in paths
    )
    return RunManifest(
        depth=depth,
        accuracy=accuracy,
        layer_paths=resolved,
        arch_label=arch_label,
        u_source=u_source,
        u_path=u_path,
    )


def pearson(xs, ys) -> float:
    """Pearson correlation of two equal-length sequences (length >= 3).

    Raises DegenerateInput when either side is constant.
    """
    xs = np.asarray(list(xs), dtype=np.float64)
    ys = np.asarray(list(ys), dtype=np.float64)
    if xs.ndim != 1 or ys.ndim != 1:
        raise ShapeMismatch("pearson needs 1-D sequences")
    if xs.shape[0] != ys.shape[0]:
        raise LengthMismatch(f"lengths differ: {xs.shape[0]} vs {ys.shape[0]}")
    if xs.shape[0] < 3:
        raise DegenerateInput(f"need at least 3 pairs, got {xs.shape[0]}")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise InvalidParameter("sequences must be finite")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sx = float(dx @ dx)
    sy = float(dy @ dy)
    if sx == 0.0 or sy == 0.0:
        raise DegenerateInput("constant sequence has no correlation")
    r = float(dx @ dy) / math.sqrt(sx * sy)
    return min(1.0, max(-1.0, r))


@dataclass(frozen=True)
class CorrelationReport:
    """Per-metric correlation between log final-layer metrics and accuracy.

    ``correlations[metric]`` is None when that metric was undefined or
    degenerate across the runs; ``failures[metric]`` then explains why.
    ``transform`` records the shift/clamp/log recipe applied to raw values.
    """

    correlations: dict
    failures: dict
    accuracy_ratio: float
    run_count: int
    transform: dict


def _direction_for(manifest: RunManifest, g: Graph) -> np.ndarray:
    if manifest.u_source == "gcn":
        return gcn_dominant_eigenvector(g)
    if manifest.u_source == "const":
        return constant_unit_vector(g.n)
    u = load_vector(manifest.u_path)
    norm = math.sqrt(float(u @ u))
    if norm == 0.0:
        raise InvalidParameter(f"direction file {manifest.u_path} holds a zero vector")
    return u / norm


def correlate(manifests, g: Graph) -> CorrelationReport:
    """Correlate log final-layer metric values with run accuracies.

    Needs at least three manifests with pairwise distinct depths. Rank
    metrics are shifted by -1 first; all values are clamped to
    ``CLAMP_FLOOR`` before the natural log. A metric that is undefined on
    some run, or constant after the transform, gets a None entry and an
    explanation instead of poisoning the rest.
    """
    manifests = list(manifests)
    if len(manifests) < 3:
        raise InsufficientRuns(f"need at least 3 runs, got {len(manifests)}")
    depths = [m.depth for m in manifests]
    if len(set(depths)) != len(depths):
        raise InsufficientRuns(f"run depths must be pairwise distinct, got {depths}")
    reports: list[MetricReport] = []
    for manifest in manifests:
        x = load_matrix(manifest.layer_paths[-1])
        if x.shape[0] != g.n:
            raise ShapeMismatch(
                f"{manifest.layer_paths[-1]}: {x.shape[0]} rows for a graph with {g.n} vertices"
            )
        reports.append(metric_suite(x, g, _direction_for(manifest, g)))
    accuracies = [m.accuracy for m in manifests]
    correlations: dict = {}
    failures: dict = {}
    for metric in CANONICAL_METRICS:
        shift = 1.0 if metric in SHIFTED_METRICS else 0.0
        logs = []
        for manifest, report in zip(manifests, reports):
            value = getattr(report, metric)
            if value is None:
                failures[metric] = f"undefined at depth {manifest.depth}"
                correlations[metric] = None
                break
            logs.append(math.log(max(value - shift, CLAMP_FLOOR)))
        else:
            try:
                correlations[metric] = pearson(logs, accuracies)
            except DegenerateInput as exc:
                correlations[metric] = None
                failures[metric] = str(exc)
    deep = max(range(len(manifests)), key=lambda i: depths[i])
    shallow = min(range(len(manifests)), key=lambda i: depths[i])
    if accuracies[shallow] == 0.0:
        raise DegenerateInput("shallowest run has zero accuracy; ratio undefined")
    return CorrelationReport(
        correlations=correlations,
        failures=failures,
        accuracy_ratio=accuracies[deep] / accuracies[shallow],
        run_count=len(manifests),
        transform={
            "shifted_metrics": SHIFTED_METRICS,
            "clamp_floor": CLAMP_FLOOR,
            "log": "natural",
        },
    )


def _write_text(path, content: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(content)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _report_cell(value) -> str:
    return "nan" if value is None else format_float(value)


def write_report(out_dir, correlation=None, grid=None, traces=None) -> list[str]:
    """Emit CSV artifacts into ``out_dir``; returns the paths written.

    ``correlation`` -> correlations.csv (one row per metric);
    ``grid`` -> table3_grid.csv (row, metric, yes/no verdict);
    ``traces`` (mapping ``(label, seed) -> reports``) -> one
    trace_<label>_<seed>.csv per rollout with the canonical trace columns.
    Identical inputs produce byte-identical files.
    """
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out_dir}: {exc}") from exc
    written = []
    if correlation is not None:
        lines = ["metric,r"]
        for metric in CANONICAL_METRICS:
            lines.append(f"{metric},{_report_cell(correlation.correlations[metric])}")
        path = os.path.join(out_dir, "correlations.csv")
        _write_text(path, "\n".join(lines) + "\n")
        written.append(path)
    if grid is not None:
        lines = ["row,metric,verdict"]
        for name in grid.config.rows:
            for metric in CANONICAL_METRICS:
                verdict = "yes" if grid.verdicts[(name, metric)] else "no"
                lines.append(f"{name},{metric},{verdict}")
        path = os.path.join(out_dir, "table3_grid.csv")
        _write_text(path, "\n".join(lines) + "\n")
        written.append(path)
    if traces is not None:
        for (label, seed) in sorted(traces):
            reports = traces[(label, seed)]
            lines = [",".join(TRACE_COLUMNS)]
            for layer, rep in enumerate(reports):
                cells = [str(layer)]
                for metric in CANONICAL_METRICS:
                    cells.append(_report_cell(getattr(rep, metric)))
                cells.append(format_float(rep.frob_norm))
                lines.append(",".join(cells))
            path = os.path.join(out_dir, f"trace_{label}_{seed}.csv")
            _write_text(path, "\n".join(lines) + "\n")
            written.append(path)
    return written
