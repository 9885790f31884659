"""Command-line entry point.

    hetclust cluster INPUT --kind summary|raw_ab|classifier [--metric fpr] [--alpha 0.05]
    hetclust summarize INPUT --kind raw_ab|classifier [--metric fpr] --out summary.csv
    hetclust power-curve [--config spec.json] [--preset desk] [--replications 100] --out power.tsv
    hetclust fpr-curve [--n-groups 21] [--alpha-grid 0.01,0.05] --out fpr.tsv

Exit status of ``cluster``: 0 no rejection, 10 heterogeneity found
(rejected), 1 usage or input error.  Other commands exit 0 or 1.

Defaults for --alpha, --policy, --seed and --replications can be overridden
with HETCLUST_ALPHA, HETCLUST_POLICY, HETCLUST_SEED and
HETCLUST_REPLICATIONS.  The choice of alpha is a judgement call for the
analyst, as with any A/B test; 0.05 is only a convention.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .engine import ClusteringConfig, ThresholdPolicy, run_clustering
from .errors import DegenerateGroupsError, HetclustError
from .io import INPUT_KINDS, ResultDocument, read_metrics, write_document, write_summary
from .similarity import MetricKind
from .simulation import PRESETS, fpr_curve, power_curve, two_continent_spec, unit_mu_grid

log = logging.getLogger("hetclust")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECTED = 10

DEFAULT_ALPHA_GRID = (0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _env(name, default, cast):
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError:
        raise HetclustError(f"environment variable {name}={raw!r} is invalid") from None


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _policy(text):
    try:
        return ThresholdPolicy(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"invalid policy {text!r}; choose from {[p.value for p in ThresholdPolicy]}"
        ) from None


def build_parser():
    p = _Parser(prog="hetclust", description="Likelihood-ratio agglomerative clustering of group effects.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_common(sp):
        sp.add_argument("--alpha", type=float, default=None, help="significance level (default 0.05)")
        sp.add_argument("--policy", type=_policy, default=None,
                        help="threshold policy: bonferroni-k2 (alpha/K^2, default) or per-k (alpha/K, "
                             "only for independent per-iteration data splits)")

    c = sub.add_parser("cluster", help="cluster groups from an input table")
    c.add_argument("input")
    c.add_argument("--kind", choices=INPUT_KINDS, default="summary")
    c.add_argument("--metric", choices=[m.value for m in MetricKind], default=None)
    c.add_argument("--delimiter", default=None, help="field delimiter (default: tab for .tsv, else comma)")
    c.add_argument("--out", default="-", help="result JSON path, '-' for stdout")
    add_common(c)

    s = sub.add_parser("summarize", help="reduce raw_ab / classifier input to a summary table")
    s.add_argument("input")
    s.add_argument("--kind", choices=("raw_ab", "classifier"), required=True)
    s.add_argument("--metric", choices=[m.value for m in MetricKind], default=None)
    s.add_argument("--delimiter", default=None)
    s.add_argument("--out", required=True)

    pc = sub.add_parser("power-curve", help="exact-recovery power of the two-continent study")
    pc.add_argument("--config", default=None, help="JSON file with any of the flags below (flags win)")
    pc.add_argument("--preset", choices=sorted(PRESETS), default=None)
    pc.add_argument("--n-asia", type=int, default=None)
    pc.add_argument("--n-africa", type=int, default=None)
    pc.add_argument("--n-per-arm", type=int, default=None)
    pc.add_argument("--noise-sd", type=float, default=None)
    pc.add_argument("--mu-grid", type=_float_list, default=None)
    pc.add_argument("--grid-points", type=int, default=None)
    pc.add_argument("--replications", type=int, default=None)
    pc.add_argument("--seed", type=int, default=None)
    pc.add_argument("--out", default="-")
    add_common(pc)

    fc = sub.add_parser("fpr-curve", help="false rejection rate under the null vs alpha")
    fc.add_argument("--n-groups", type=int, default=21)
    fc.add_argument("--alpha-grid", type=_float_list, default=list(DEFAULT_ALPHA_GRID))
    fc.add_argument("--n-per-arm", type=int, default=100)
    fc.add_argument("--noise-sd", type=float, default=0.1)
    fc.add_argument("--replications", type=int, default=None)
    fc.add_argument("--seed", type=int, default=None)
    fc.add_argument("--policy", type=_policy, default=None)
    fc.add_argument("--out", default="-")
    return p


def _resolve_common(args):
    alpha = args.alpha if args.alpha is not None else _env("HETCLUST_ALPHA", 0.05, float)
    policy = args.policy if args.policy is not None else _env(
        "HETCLUST_POLICY", ThresholdPolicy.BONFERRONI_K2, ThresholdPolicy
    )
    return ClusteringConfig(alpha=alpha, threshold_policy=policy)


def _emit(text, out):
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_cluster(args):
    config = _resolve_common(args)
    if args.kind == "classifier" and args.metric is None:
        raise HetclustError("--metric is required for classifier input")
    metrics = read_metrics(args.input, args.kind, args.metric, args.delimiter)
    result = run_clustering(metrics, config=config)
    echo = {
        "alpha": config.alpha,
        "threshold_policy": config.threshold_policy.value,
        "tie_break": config.tie_break,
        "input_kind": args.kind,
        "metric": args.metric,
        "input": os.path.basename(args.input),
    }
    doc = ResultDocument.from_result(result, echo)
    write_document(doc, args.out)
    log.info("%d groups -> %d clusters, rejected=%s", result.n_groups, len(result.final_clusters), result.rejected)
    return EXIT_REJECTED if result.rejected else EXIT_OK


def cmd_summarize(args):
    if args.kind == "classifier" and args.metric is None:
        raise HetclustError("--metric is required for classifier input")
    metrics = read_metrics(args.input, args.kind, args.metric, args.delimiter)
    write_summary(args.out, metrics)
    return EXIT_OK


def _power_settings(args):
    cfg = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise HetclustError("power-curve config must be a JSON object")
    known = {"preset", "n_asia", "n_africa", "n_per_arm", "noise_sd", "mu_grid", "grid_points",
             "replications", "seed", "alpha", "policy"}
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise HetclustError(f"unknown config field(s): {unknown}")
    for key in known:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    cfg.setdefault("preset", "full")
    cfg.setdefault("n_per_arm", 100)
    cfg.setdefault("noise_sd", 0.1)
    cfg.setdefault("replications", _env("HETCLUST_REPLICATIONS", 100, int))
    cfg.setdefault("seed", _env("HETCLUST_SEED", 20200101, int))
    cfg.setdefault("alpha", _env("HETCLUST_ALPHA", 0.05, float))
    cfg.setdefault("policy", _env("HETCLUST_POLICY", ThresholdPolicy.BONFERRONI_K2, ThresholdPolicy))
    cfg.setdefault("grid_points", 20)

    problems = []
    if cfg["preset"] not in PRESETS:
        problems.append(f"preset: must be one of {sorted(PRESETS)}")
    for key in ("n_asia", "n_africa"):
        if key in cfg and not (isinstance(cfg[key], int) and cfg[key] >= 0):
            problems.append(f"{key}: must be a nonnegative integer")
    if not (isinstance(cfg["n_per_arm"], int) and cfg["n_per_arm"] >= 2):
        problems.append("n_per_arm: must be an integer >= 2")
    if not (isinstance(cfg["noise_sd"], (int, float)) and cfg["noise_sd"] > 0):
        problems.append("noise_sd: must be positive")
    if not (isinstance(cfg["replications"], int) and cfg["replications"] >= 1):
        problems.append("replications: must be a positive integer")
    if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
        problems.append("seed: must be a nonnegative integer")
    if not (isinstance(cfg["alpha"], (int, float)) and 0 < cfg["alpha"] < 1):
        problems.append("alpha: must lie in (0, 1)")
    try:
        cfg["policy"] = ThresholdPolicy(cfg["policy"])
    except ValueError:
        problems.append(f"policy: must be one of {[p.value for p in ThresholdPolicy]}")
    if "mu_grid" in cfg:
        grid = cfg["mu_grid"]
        if not isinstance(grid, list) or not grid or not all(isinstance(x, (int, float)) for x in grid):
            problems.append("mu_grid: must be a nonempty list of numbers")
    elif not (isinstance(cfg["grid_points"], int) and cfg["grid_points"] >= 1):
        problems.append("grid_points: must be a positive integer")
    if problems:
        raise HetclustError("invalid power-curve settings: " + "; ".join(problems))
    return cfg


def cmd_power_curve(args):
    cfg = _power_settings(args)
    spec = two_continent_spec(
        n_asia=cfg.get("n_asia"),
        n_africa=cfg.get("n_africa"),
        preset=cfg["preset"],
        n_per_arm=cfg["n_per_arm"],
        noise_sd=float(cfg["noise_sd"]),
        replications=cfg["replications"],
        seed=cfg["seed"],
        alpha=float(cfg["alpha"]),
        policy=cfg["policy"],
    )
    grid = cfg["mu_grid"] if "mu_grid" in cfg else unit_mu_grid(cfg["grid_points"])
    points = power_curve(spec, grid)
    lines = ["mu\texact_recovery_rate\trejection_rate\treplications\tmc_se"]
    for pt in points:
        lines.append(f"{pt.mu:.6f}\t{pt.exact_recovery_rate:.6f}\t{pt.rejection_rate:.6f}\t"
                     f"{pt.replications}\t{pt.mc_se:.6f}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_fpr_curve(args):
    replications = args.replications if args.replications is not None else _env("HETCLUST_REPLICATIONS", 2000, int)
    seed = args.seed if args.seed is not None else _env("HETCLUST_SEED", 20200101, int)
    policy = args.policy if args.policy is not None else _env(
        "HETCLUST_POLICY", ThresholdPolicy.BONFERRONI_K2, ThresholdPolicy
    )
    problems = []
    if not args.alpha_grid:
        problems.append("alpha_grid: must not be empty")
    elif not all(0 < a < 1 for a in args.alpha_grid):
        problems.append("alpha_grid: every alpha must lie in (0, 1)")
    if args.n_groups < 2:
        problems.append("n_groups: must be >= 2")
    if replications < 1:
        problems.append("replications: must be positive")
    if args.n_per_arm < 2:
        problems.append("n_per_arm: must be >= 2")
    if not args.noise_sd > 0:
        problems.append("noise_sd: must be positive")
    if seed < 0:
        problems.append("seed: must be nonnegative")
    if problems:
        raise HetclustError("invalid fpr-curve settings: " + "; ".join(problems))
    points = fpr_curve(args.n_groups, args.alpha_grid, replications, seed,
                       n_per_arm=args.n_per_arm, noise_sd=args.noise_sd, policy=policy)
    lines = ["alpha\tfalse_rejection_rate\treplications\tmc_se"]
    for pt in points:
        lines.append(f"{pt.alpha:.6g}\t{pt.false_rejection_rate:.6f}\t{pt.replications}\t{pt.mc_se:.6f}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


COMMANDS = {
    "cluster": cmd_cluster,
    "summarize": cmd_summarize,
    "power-curve": cmd_power_curve,
    "fpr-curve": cmd_fpr_curve,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except DegenerateGroupsError as exc:
        print(f"hetclust: error: {exc}", file=sys.stderr)
        for gid, why in exc.problems.items():
            print(f"  {gid}: {why}", file=sys.stderr)
        return EXIT_ERROR
    except (HetclustError, OSError, json.JSONDecodeError) as exc:
        print(f"hetclust: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
