"""Input tables and the JSON result document.

Inputs are UTF-8 delimiter-separated text with a header row.  Columns:

    summary     group_id, estimate, sd
    raw_ab      group_id, arm (control|treatment), outcome
    classifier  group_id, label (0|1), classification (0|1)

Extra columns are ignored.  Rows are never dropped silently: a malformed row
raises :class:`ParseError` with its line number, and groups that cannot be
summarised are reported together in :class:`DegenerateGroupsError`.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import DegenerateGroupsError, HetclustError, InsufficientDataError, ParseError
from .similarity import GroupMetric, MetricKind, classifier_rate_metric
from .stats_primitives import SampleSummary, welch_summary

SCHEMA_VERSION = "1.0"

INPUT_KINDS = ("summary", "raw_ab", "classifier")

_COLUMNS = {
    "summary": ("group_id", "estimate", "sd"),
    "raw_ab": ("group_id", "arm", "outcome"),
    "classifier": ("group_id", "label", "classification"),
}


def _delimiter_for(path, delimiter):
    if delimiter is not None:
        return delimiter
    return "\t" if str(path).lower().endswith((".tsv", ".tab")) else ","


def iter_rows(path, kind, delimiter=None):
    """Yield ``(line_number, row_dict)`` after checking the header."""
    required = _COLUMNS[kind]
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=_delimiter_for(path, delimiter))
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file, expected a header row", line=1, path=path) from None
        header = [h.strip() for h in header]
        missing = [c for c in required if c not in header]
        if missing:
            raise ParseError(f"header lacks column(s) {missing}; found {header}", line=1, path=path)
        idx = {c: header.index(c) for c in required}
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=line, path=path)
            yield line, {c: row[i].strip() for c, i in idx.items()}


def _float(value, name, line, path):
    try:
        x = float(value)
    except ValueError:
        raise ParseError(f"{name} {value!r} is not a number", line=line, path=path) from None
    if not math.isfinite(x):
        raise ParseError(f"{name} {value!r} is not finite", line=line, path=path)
    return x


def _binary(value, name, line, path):
    if value not in ("0", "1"):
        raise ParseError(f"{name} must be 0 or 1, got {value!r}", line=line, path=path)
    return int(value)


def _group_id(value, line, path):
    if not value:
        raise ParseError("empty group_id", line=line, path=path)
    return value


def read_summary(path, delimiter=None):
    metrics = []
    seen = {}
    for line, row in iter_rows(path, "summary", delimiter):
        gid = _group_id(row["group_id"], line, path)
        if gid in seen:
            raise ParseError(f"duplicate group_id {gid!r} (first on line {seen[gid]})", line=line, path=path)
        seen[gid] = line
        est = _float(row["estimate"], "estimate", line, path)
        sd = _float(row["sd"], "sd", line, path)
        if sd <= 0:
            raise ParseError(f"sd must be positive, got {sd!r}", line=line, path=path)
        metrics.append(GroupMetric(gid, est, sd))
    return metrics


def read_raw_ab(path, delimiter=None):
    """Per-group difference in means (treatment - control) and its standard error."""
    arms = defaultdict(lambda: {"control": [], "treatment": []})
    for line, row in iter_rows(path, "raw_ab", delimiter):
        gid = _group_id(row["group_id"], line, path)
        arm = row["arm"].lower()
        if arm not in ("control", "treatment"):
            raise ParseError(f"arm must be 'control' or 'treatment', got {row['arm']!r}", line=line, path=path)
        arms[gid][arm].append(_float(row["outcome"], "outcome", line, path))
    return _summarise_groups(arms, _welch_group, path)


def _welch_group(gid, arms):
    t, c = arms["treatment"], arms["control"]
    if len(t) < 2 or len(c) < 2:
        raise InsufficientDataError(f"needs >= 2 rows per arm (treatment={len(t)}, control={len(c)})")
    return welch_summary(SampleSummary.from_values(t), SampleSummary.from_values(c))


def read_classifier(path, metric_kind, delimiter=None):
    kind = MetricKind(metric_kind)
    rows = defaultdict(list)
    for line, row in iter_rows(path, "classifier", delimiter):
        gid = _group_id(row["group_id"], line, path)
        label = _binary(row["label"], "label", line, path)
        cls = _binary(row["classification"], "classification", line, path)
        rows[gid].append((cls, label))
    return _summarise_groups(rows, lambda gid, r: classifier_rate_metric(gid, r, kind), path)


def _summarise_groups(groups, summarise, path):
    if not groups:
        raise ParseError("no data rows", path=path)
    metrics, problems = [], {}
    for gid, data in groups.items():
        try:
            metrics.append(summarise(gid, data).with_id(gid))
        except HetclustError as exc:
            problems[gid] = str(exc)
    if problems:
        raise DegenerateGroupsError(problems)
    return metrics


def read_metrics(path, kind, metric_kind=None, delimiter=None):
    if kind == "summary":
        return read_summary(path, delimiter)
    if kind == "raw_ab":
        return read_raw_ab(path, delimiter)
    if kind == "classifier":
        if metric_kind is None:
            raise HetclustError("classifier input needs a metric kind (fpr, tpr, positive-rate, misclassification)")
        return read_classifier(path, metric_kind, delimiter)
    raise HetclustError(f"unknown input kind {kind!r}; choose from {INPUT_KINDS}")


def write_summary(path, metrics, delimiter=","):
    """Write GroupMetrics as a summary table; floats use repr so they round-trip."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(_COLUMNS["summary"])
        for m in metrics:
            w.writerow([m.group_id, repr(float(m.estimate)), repr(float(m.sd))])


@dataclass
class ClusterRecord:
    members: list
    mle_mean: float
    precision_sum: float
    weighted_sum: float


@dataclass
class TraceRecord:
    iteration: int
    merged: list  # two sorted member lists
    max_pvalue: float
    threshold: float


@dataclass
class ResultDocument:
    config: dict
    rejected: bool
    n_groups: int
    threshold: float
    decision_pvalue: float | None
    final_clusters: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    schema_version: str = SCHEMA_VERSION

    @classmethod
    def from_result(cls, result, config_echo):
        clusters = [
            ClusterRecord(list(c.key), c.mle_mean, c.precision_sum, c.weighted_sum)
            for c in result.final_clusters
        ]
        trace = [
            TraceRecord(s.iteration, [sorted(s.merged_pair[0]), sorted(s.merged_pair[1])],
                        float(s.max_pvalue), s.threshold_used)
            for s in result.trace
        ]
        dp = None if result.decision_pvalue is None else float(result.decision_pvalue)
        return cls(dict(config_echo), result.rejected, result.n_groups, result.threshold, dp, clusters, trace)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if d.get("schema_version") != SCHEMA_VERSION:
            raise HetclustError(f"unsupported schema version {d.get('schema_version')!r}")
        d["final_clusters"] = [ClusterRecord(**c) for c in d["final_clusters"]]
        d["trace"] = [TraceRecord(**t) for t in d["trace"]]
        return cls(**d)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def write_document(doc: ResultDocument, path):
    if str(path) == "-":
        sys.stdout.write(doc.to_json())
    else:
        Path(path).write_text(doc.to_json(), encoding="utf-8")
