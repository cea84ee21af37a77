"""Command-line front end.

One project directory per site under assessment; every subcommand takes
``--project`` (or the WUIQ_PROJECT environment variable). Timestamps can
be pinned with ``--now`` / WUIQ_NOW so that two runs over the same inputs
produce byte-identical artifacts.

Exit codes: 0 success, 1 rejected input or invalid state, 2 unexpected
internal failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from . import engine, reporting
from .errors import WuiqError
from .store import ProjectConfig, ProjectStore


def _env(name: str, default=None):
    return os.environ.get(f"WUIQ_{name}", default)


def _default_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wuiq",
        description="Hybrid web quality assessment: expert-weighted "
                    "performance, accessibility, and usability scoring "
                    "with respondent segmentation and attributions.",
    )
    parser.add_argument(
        "--project", default=_env("PROJECT"),
        help="project directory (env WUIQ_PROJECT)",
    )
    parser.add_argument(
        "--now", default=_env("NOW"),
        help="pin the timestamp written into artifacts (env WUIQ_NOW); "
             "defaults to the current UTC time",
    )
    parser.add_argument(
        "--seed", type=int, default=_env("SEED"),
        help="override the project's random seed for this invocation (env WUIQ_SEED)",
    )
    parser.add_argument(
        "--cr-threshold", type=float, default=_env("CR_THRESHOLD"),
        help="override the consistency-ratio acceptance threshold (env WUIQ_CR_THRESHOLD)",
    )
    parser.add_argument(
        "--scorer", default=_env("SCORER"),
        help="override the sentiment scorer for this invocation (env WUIQ_SCORER)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create a new project directory")
    p.add_argument("--id", help="project identifier (defaults to the directory name)")
    p.add_argument("--criteria", help="comma-separated criterion labels "
                                      "(default: performance,accessibility,usability)")
    p.set_defaults(handler=cmd_init)

    p = sub.add_parser("ingest", help="validate and append input data")
    kind = p.add_subparsers(dest="kind", required=True)
    for name, help_text in (
        ("surveys", "survey batch (JSON or delimited text)"),
        ("experts", "expert pairwise-judgment batch (JSON)"),
        ("lighthouse", "automated audit result (JSON)"),
    ):
        q = kind.add_parser(name, help=help_text)
        q.add_argument("file", help="input file, or - for standard input")
        q.set_defaults(handler=cmd_ingest, kind=name)

    p = sub.add_parser("weights", help="aggregate expert judgments into baseline weights")
    p.add_argument("--override", action="store_true",
                   help="replace already-frozen baseline weights")
    p.set_defaults(handler=cmd_weights)

    p = sub.add_parser("evaluate", help="compute the quality score for the current state")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("segment", help="cluster respondents")
    p.add_argument("--k", default=_env("K", "auto"),
                   help="cluster count, or 'auto' for elbow selection (env WUIQ_K)")
    p.set_defaults(handler=cmd_segment)

    p = sub.add_parser("explain", help="attribute cluster membership to feature groups")
    p.add_argument("--cluster", type=int, required=True,
                   help="target cluster index from the latest segmentation")
    p.add_argument("--mode", choices=("indicator", "soft"), default="indicator",
                   help="membership definition (default: indicator)")
    p.set_defaults(handler=cmd_explain)

    p = sub.add_parser("report", help="write the consolidated report, tables, and charts")
    p.add_argument("--out", help="output directory (default: <project>/report)")
    p.set_defaults(handler=cmd_report)

    p = sub.add_parser("serve", help="run the HTTP service over this project")
    p.add_argument("--listen", default=_env("LISTEN", "127.0.0.1:8177"),
                   help="host:port to bind (env WUIQ_LISTEN; default 127.0.0.1:8177)")
    p.set_defaults(handler=cmd_serve)

    return parser


def _require_project(args) -> Path:
    if not args.project:
        raise WuiqError("no project directory; pass --project or set WUIQ_PROJECT")
    return Path(args.project)


def _open_store(args) -> ProjectStore:
    store = ProjectStore(_require_project(args))
    # Per-invocation overrides touch only the in-memory config.
    changes = {}
    if args.cr_threshold is not None:
        changes["cr_threshold"] = float(args.cr_threshold)
    if args.scorer is not None:
        changes["scorer"] = args.scorer
    if args.seed is not None:
        changes["seed"] = int(args.seed)
    if changes:
        store.manifest.config = replace(store.manifest.config, **changes)
    return store


def _now(args) -> str:
    return args.now if args.now else _default_now()


def cmd_init(args) -> int:
    root = _require_project(args)
    criteria = tuple(
        c.strip() for c in args.criteria.split(",") if c.strip()
    ) if args.criteria else engine.ahp.DEFAULT_CRITERIA
    config = ProjectConfig(
        cr_threshold=float(args.cr_threshold) if args.cr_threshold is not None
        else ProjectConfig.cr_threshold,
        seed=int(args.seed) if args.seed is not None else ProjectConfig.seed,
        scorer=args.scorer if args.scorer is not None else ProjectConfig.scorer,
    )
    store = ProjectStore.init(
        root,
        project_id=args.id or root.name,
        criteria=criteria,
        config=config,
        now=_now(args),
    )
    print(f"initialized project {store.manifest.project_id!r} in {root}")
    print(f"criteria: {', '.join(store.manifest.criteria)}")
    return 0


def _read_input(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def cmd_ingest(args) -> int:
    store = _open_store(args)
    document = _read_input(args.file)
    now = _now(args)
    if args.kind == "surveys":
        result = engine.ingest_surveys(store, document, now)
        print(f"ingested {result['ingested']} survey(s); {result['total']} total")
    elif args.kind == "experts":
        result = engine.ingest_experts(store, document, now)
        print(f"ingested {result['ingested']} expert judgment(s); {result['total']} total")
        for row in result["consistency"]:
            status = "accepted" if row["accepted"] else "REJECTED (inconsistent)"
            print(f"  {row['expert_id']}: CR = {row['cr']:.4f} -> {status}")
    else:
        result = engine.ingest_audit(store, document, now)
        print(
            f"ingested audit: performance {result['performance_score']:.2f}, "
            f"accessibility {result['accessibility_score']:.2f}"
        )
    return 0


def cmd_weights(args) -> int:
    store = _open_store(args)
    payload = engine.compute_weights(
        store,
        threshold=float(args.cr_threshold) if args.cr_threshold is not None else None,
        override=args.override,
        now=_now(args),
    )
    print(f"baseline weights from {payload['accepted_count']} accepted expert(s) "
          f"(CR threshold {payload['cr_threshold']}):")
    for criterion in payload["criteria"]:
        print(f"  {criterion}: {payload['weights'][criterion]:.4f}")
    for row in payload["experts"]:
        status = "accepted" if row["accepted"] else "rejected"
        print(f"  {row['expert_id']}: CR = {row['cr']:.4f} ({status})")
    return 0


def cmd_evaluate(args) -> int:
    store = _open_store(args)
    payload = engine.run_evaluation(store, _now(args))
    it = payload["iterations"][-1]
    s = it["scores"]
    print(f"iteration {it['t']}:")
    print(f"  performance   {s['performance']:.4f}")
    print(f"  accessibility {s['accessibility']:.4f}")
    print(f"  usability     {s['usability']:.4f}")
    print(f"  quality score {it['wuiq']:.6f} ({it['display']}, {it['grade']})")
    return 0


def cmd_segment(args) -> int:
    store = _open_store(args)
    k = args.k if args.k == "auto" else int(args.k)
    payload = engine.run_segmentation(
        store, k=k,
        seed=int(args.seed) if args.seed is not None else None,
        now=_now(args),
    )
    chosen = payload["k"]
    how = "elbow-selected" if payload["k_selection"] == "elbow" else "requested"
    print(f"k = {chosen} ({how}); SSE = {payload['sse']:.4f}")
    names = payload["feature_names"]
    for cl in payload["clusters"]:
        means = ", ".join(f"{name} {cl[name]:.2f}" for name in names)
        print(f"  cluster {cl['cluster']}: n = {cl['size']}; {means}")
    return 0


def cmd_explain(args) -> int:
    store = _open_store(args)
    payload = engine.run_explanations(
        store, cluster=args.cluster, mode=args.mode, now=_now(args)
    )
    print(f"cluster {payload['cluster']} ({payload['mode']} membership), "
          f"base value {payload['base_value']:.4f}")
    print("group importance (mean |attribution|):")
    for row in payload["global_importance"]:
        print(f"  {row['group']}: {row['mean_abs_phi']:.5f}")
    return 0


def cmd_report(args) -> int:
    store = _open_store(args)
    outdir = Path(args.out) if args.out else _require_project(args) / "report"
    written = reporting.export_report(store, outdir)
    print(f"report written to {outdir}:")
    for name in written:
        print(f"  {name}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    store = _open_store(args)
    host, _, port = args.listen.rpartition(":")
    if not host or not port.isdigit():
        raise WuiqError(f"--listen must be host:port, got {args.listen!r}")
    app = create_app(store, now_fn=(lambda: args.now) if args.now else None)
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except WuiqError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        details = getattr(exc, "details", None)
        if details:
            for line in details:
                print(f"  - {line}", file=sys.stderr)
        return 1
    except Exception:
        print("internal error:", file=sys.stderr)
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
