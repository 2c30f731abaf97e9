"""Headless driver: validate, lay out, simulate, and serve workspace files.

Exit codes: 0 success, 1 domain/validation error, 2 usage error. Never prompts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import QnetError
from .layout import LayoutParams, compute_layout
from .randreq import RandomRequestSim, SimulationReport
from .serialization import (
    WorkspaceFiles,
    check_workspace,
    export_simulation,
    import_simulation,
    import_templates,
    import_topology,
    write_results,
)

DEFAULT_OUTPUT_ROOT = "runs"


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise QnetError(f"cannot read {path}: {exc}") from exc


def _load_workspace(topology_path: str, templates_path: str):
    topo = import_topology(_read(topology_path))
    store = import_templates(_read(templates_path))
    check_workspace(topo, store)
    return topo, store


def cmd_validate(args) -> int:
    errors = []
    topo = store = None
    try:
        topo = import_topology(_read(args.topology))
    except QnetError as exc:
        errors.append(exc)
    try:
        store = import_templates(_read(args.templates))
    except QnetError as exc:
        errors.append(exc)
    if topo is not None and store is not None:
        try:
            check_workspace(topo, store)
        except QnetError as exc:
            errors.append(exc)
    for exc in errors:
        print(f"{exc.code}: {exc}", file=sys.stderr)
    return 1 if errors else 0


def cmd_layout(args) -> int:
    topo = import_topology(_read(args.topology))
    result = compute_layout(topo, LayoutParams(), seed=args.seed)
    doc = {
        "positions": {name: [x, y] for name, (x, y) in result.positions.items()},
        "iterations_used": result.iterations_used,
        "converged": result.converged,
    }
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _print_report(report: SimulationReport) -> None:
    header = f"{'node':<20} {'avg_wait_ps':>16} {'reservations':>13} {'pairs_per_s':>12}"
    print(header)
    print("-" * len(header))
    for node in report.nodes:
        print(f"{node.name:<20} {node.avg_wait_time_ps:>16.1f} "
              f"{node.reservations:>13d} {node.throughput_pairs_per_s:>12.4f}")
    totals = report.totals
    print(f"requests: {totals['requests_generated']} generated, "
          f"{totals['requests_granted']} granted, "
          f"{totals['requests_completed']} completed, "
          f"{totals['requests_rejected']} rejected; "
          f"pairs: {totals['pairs_completed']}; seed: {totals['seed']}")


def cmd_simulate(args) -> int:
    topo, store = _load_workspace(args.topology, args.templates)
    cfg = import_simulation(_read(args.simulation))
    if args.seed is not None:
        cfg.seed = args.seed
    report = RandomRequestSim(topo, store, cfg).run()
    files = WorkspaceFiles(topology_doc=_read(args.topology),
                           template_doc=_read(args.templates),
                           simulation_doc=export_simulation(cfg))
    run_dir = write_results(report, args.output_root, files, force=args.force)
    _print_report(report)
    print(f"results written to {run_dir}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.bind.partition(":")
    app = create_app(output_root=args.output_root, max_runs=args.max_runs,
                     ui_dir=args.ui_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000),
                log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qnetsim",
        description="Quantum network simulation workbench.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check topology and template files")
    p.add_argument("topology")
    p.add_argument("templates")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("layout", help="compute node positions")
    p.add_argument("topology")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write positions to this file instead of stdout")
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("simulate", help="run a random-request simulation")
    p.add_argument("topology")
    p.add_argument("templates")
    p.add_argument("simulation")
    p.add_argument("--seed", type=int, default=None,
                   help="override the simulation file's seed")
    p.add_argument("--output-root",
                   default=os.environ.get("QNET_OUTPUT_ROOT", DEFAULT_OUTPUT_ROOT))
    p.add_argument("--force", action="store_true",
                   help="overwrite an existing run directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--bind", default="127.0.0.1:8000")
    p.add_argument("--output-root",
                   default=os.environ.get("QNET_OUTPUT_ROOT", DEFAULT_OUTPUT_ROOT))
    p.add_argument("--max-runs", type=int, default=2)
    p.add_argument("--ui-dir", default=os.environ.get("QNET_UI_DIR"))
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except QnetError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
