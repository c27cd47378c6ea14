"""Command-line benchmark harness.

Exit codes: 0 success, 1 usage or input error, 2 clustering hit the epoch cap.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import data as dio
from .ga import GaConfig, evolve
from .kflann import DEFAULT_MAX_EPOCHS, KflannParams, cluster
from .report import RunReport, write_comparison
from .validity import evaluate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2

BUILTIN_PREFIX = "builtin:"


class UsageError(Exception):
    pass


def _load(path: str, has_labels: bool = True) -> dio.Dataset:
    if path.startswith(BUILTIN_PREFIX):
        return dio.load_builtin(path[len(BUILTIN_PREFIX):])
    return dio.load_csv(path, has_labels=has_labels)


def _float_list(text: str):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


# cluster -----------------------------------------------------------------------


def cmd_cluster(args) -> int:
    ds = _load(args.data, not args.no_labels)
    tol = np.asarray(args.tol, dtype=float)
    if tol.size != ds.n_features:
        raise UsageError(
            f"dimension mismatch: expected {ds.n_features} tolerances, got {tol.size}"
        )
    try:
        params = KflannParams(args.rho, tol, args.variant, args.max_epochs)
    except ValueError as exc:
        raise UsageError(str(exc))
    order = None
    if args.seed is not None:
        order = np.random.default_rng(args.seed).permutation(ds.n_patterns)
    out = cluster(ds, params, order)
    rep = evaluate(ds.patterns, out.assignments, out.centroids, ds.labels,
                   unsupervised=ds.labels is None)
    result = {
        "dataset": ds.name,
        "variant": args.variant,
        "vigilance": params.vigilance,
        "tolerances": params.tolerances.tolist(),
        "K": out.cluster_count,
        "epochs": out.epochs_run,
        "converged": out.converged,
        "degenerate": rep.degenerate,
        "cs": None if rep.degenerate else rep.cs,
        "error_rate": None if ds.labels is None else rep.error_rate,
        "fitness": rep.fitness,
        "centroids": out.centroids.tolist(),
        "assignments": out.assignments.tolist(),
    }
    with open(args.out, "w") as fh:
        json.dump(result, fh, indent=2)
        fh.write("\n")
    err = "n/a" if ds.labels is None else f"{rep.error_rate:.4f}%"
    cs = "n/a (degenerate)" if rep.degenerate else f"{rep.cs:.6f}"
    print(f"{ds.name}: K={out.cluster_count} error={err} CS={cs} "
          f"epochs={out.epochs_run} converged={out.converged}")
    return EXIT_OK if out.converged else EXIT_NOT_CONVERGED


# search ------------------------------------------------------------------------

_FLAG_TO_FIELD = {
    "popsize": "popsize", "runs": "runs", "gens": "generations", "cr": "cr", "mu": "mu",
    "b": "b", "a": "a", "cong_mode": "cong_mode", "threads": "threads", "seed": "seed",
    "max_epochs": "max_epochs", "target_k": "target_k",
}


def read_config_file(path) -> dict:
    """Parse ``key=value`` lines named after :class:`GaConfig` fields."""
    types = {"popsize": int, "generations": int, "runs": int, "seed": int, "threads": int,
             "max_epochs": int, "target_k": int, "cr": float, "mu": float, "a": float,
             "b": float, "cong_mode": _bool, "unsupervised": _bool, "free_k": _bool}
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in types:
                raise UsageError(f"{path}:{lineno}: expected key=value with a known key, got {line!r}")
            try:
                out[key] = types[key](value.strip())
            except ValueError:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {value.strip()!r}")
    return out


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


def build_config(args) -> GaConfig:
    """Flags override config-file values, which override the defaults."""
    values = read_config_file(args.config) if args.config else {}
    for flag, name in _FLAG_TO_FIELD.items():
        v = getattr(args, flag)
        if v is not None:
            values[name] = v
    if args.unsupervised:
        values["unsupervised"] = True
    if args.free_k:
        values["free_k"] = True
    try:
        return GaConfig(**values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc))


def cmd_search(args) -> int:
    config = build_config(args)
    ds = _load(args.data, not args.no_labels)
    if ds.labels is None and not config.unsupervised:
        raise UsageError("dataset has no labels; pass --unsupervised")
    variants = ["enhanced", "original"] if args.variant == "both" else [args.variant]
    reports = []
    for v in variants:
        result = evolve(ds, config, v)
        rep = RunReport.from_result(result)
        rep.write(args.out)
        reports.append(rep)
        agg = rep.aggregate()
        mv = rep.max_vigilance()
        print(f"{ds.name} [{v}] runs={len(rep.rows)} mean K={agg['K']:.2f} "
              f"mean error={agg['error_rate']:.4f}% mean vigilance={agg['vigilance']:.4f}")
        print(f"  max vigilance {mv.vigilance:.4f}: K={mv.K} error={mv.error_rate:.4f}% "
              f"tolerances={', '.join(f'{t:.4f}' for t in mv.tolerances)}")
    if len(reports) > 1:
        write_comparison(reports, os.path.join(args.out, "comparison.csv"))
    return EXIT_OK


# generate / distances ------------------------------------------------------------


def load_spec_file(path) -> dio.SyntheticSpec:
    """Read a JSON synthetic spec: ``{"clusters": [{"center", "std", "count"}], "seed"}``."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
        clusters = []
        for c in raw["clusters"]:
            center = tuple(float(v) for v in c["center"])
            std = c["std"]
            std = tuple(float(v) for v in std) if isinstance(std, list) else (float(std),) * len(center)
            clusters.append(dio.ClusterDef(center, std, int(c["count"])))
        return dio.SyntheticSpec(tuple(clusters), int(raw.get("seed", 0)),
                                 raw.get("name", os.path.splitext(os.path.basename(path))[0]))
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: cannot read synthetic spec ({exc})")


def cmd_generate(args) -> int:
    if args.preset:
        if args.preset not in dio.PRESETS:
            raise UsageError(f"unknown preset {args.preset!r}; valid presets: {', '.join(dio.PRESETS)}")
        spec = dio.PRESETS[args.preset]
    else:
        spec = load_spec_file(args.spec)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    ds = dio.generate_synthetic(spec)
    dio.write_csv(ds, args.out)
    sizes = "/".join(str(n) for n in np.bincount(ds.labels))
    print(f"{spec.name}: {ds.n_patterns} patterns, {ds.n_features} features, "
          f"{ds.n_classes} classes ({sizes}) -> {args.out}")
    return EXIT_OK


def cmd_distances(args) -> int:
    ds = _load(args.data, not args.no_labels)
    m = dio.distance_matrix(ds)
    dio.write_matrix(m, args.out)
    print(f"{ds.name}: {m.shape[0]}x{m.shape[1]} distance matrix -> {args.out}")
    return EXIT_OK


# parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gakflann",
        description="K-FLANN / EK-FLANN clustering with genetic parameter search.",
        epilog=f"DATA may be a CSV path or {BUILTIN_PREFIX}NAME for iris, wine, newthyroid "
               "or a syndata preset.",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def data_args(sp):
        sp.add_argument("--data", required=True, metavar="DATA")
        sp.add_argument("--no-labels", action="store_true",
                        help="the CSV has no label column")

    c = sub.add_parser("cluster", help="cluster with fixed vigilance and tolerances")
    data_args(c)
    c.add_argument("--rho", type=float, required=True, help="vigilance in (0, 1]")
    c.add_argument("--tol", type=_float_list, required=True, help="tolerances T1,T2,...")
    c.add_argument("--variant", choices=["original", "enhanced"], default="enhanced")
    c.add_argument("--seed", type=int, default=None,
                   help="shuffle the initial presentation order with this seed")
    c.add_argument("--max-epochs", type=int, default=DEFAULT_MAX_EPOCHS)
    c.add_argument("--out", default="cluster_result.json")
    c.set_defaults(func=cmd_cluster)

    s = sub.add_parser("search", help="genetic search for vigilance and tolerances")
    data_args(s)
    s.add_argument("--variant", choices=["original", "enhanced", "both"], default="enhanced")
    s.add_argument("--config", help="key=value file with GA settings")
    s.add_argument("--popsize", type=int)
    s.add_argument("--runs", type=int)
    s.add_argument("--gens", type=int, help="generations per run")
    s.add_argument("--cr", type=float)
    s.add_argument("--mu", type=float)
    s.add_argument("--a", type=float, help="arithmetic crossover weight")
    s.add_argument("--b", type=float, help="non-uniform mutation shape")
    s.add_argument("--cong-mode", type=_on_off, metavar="{on,off}")
    s.add_argument("--unsupervised", action="store_true")
    s.add_argument("--target-k", type=int, help="required cluster count (default: class count)")
    s.add_argument("--free-k", action="store_true", help="score every cluster count")
    s.add_argument("--max-epochs", type=int)
    s.add_argument("--threads", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", default="search_out", help="output directory")
    s.set_defaults(func=cmd_search)

    g = sub.add_parser("generate", help="write a synthetic dataset")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset")
    src.add_argument("--spec", help="JSON cluster spec file")
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int)
    g.set_defaults(func=cmd_generate)

    d = sub.add_parser("distances", help="write the pairwise distance matrix")
    data_args(d)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_distances)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, dio.DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
