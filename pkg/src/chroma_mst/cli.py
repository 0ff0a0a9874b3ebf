"""Command line entry point ``chroma-mst``.

Exit codes: 0 success, 1 usage error, 2 numeric or consistency failure,
3 input/output failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from . import analytics
from .geom import Topology

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 by default
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, *, points: bool = True) -> None:
    p.add_argument("--n", type=int, nargs="+", help="number of points (or intensity for --sampler poisson)")
    p.add_argument("--seed", type=int, default=None, help="root seed (default 0)")
    p.add_argument("--topology", default=None, help="square, torus or both (estimate)")
    p.add_argument("--sampler", choices=["uniform", "poisson"], default=None)
    p.add_argument("--p", type=float, default=0.5, help="probability of color 1")
    p.add_argument("--out", default=None, help="output file or directory")
    if points:
        p.add_argument("--input", default=None, help="CSV with columns x,y[,color]; replaces sampling")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chroma-mst", description="Chromatic persistence, EMST and lunar EMST of random point sets.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("sample", help="draw a colored point set and write it as CSV")
    _common(p, points=False)

    p = sub.add_parser("persist", help="persistence diagrams of a point set (colors ignored)")
    _common(p)
    p.add_argument("--cells", default=None, help="also write the per-cell filtration CSV here")

    p = sub.add_parser("lunar", help="lunar EMST of a two-colored point set")
    _common(p)
    p.add_argument("--lunar-mode", choices=["exact", "pruned"], default="pruned")
    p.add_argument("--events", default=None, help="write the sweep event log CSV here")

    p = sub.add_parser("sixpack", help="all eleven 1-norms of one instance")
    _common(p)
    p.add_argument("--lunar-mode", choices=["exact", "pruned"], default="pruned")
    p.add_argument("--norms", type=float, nargs=5, metavar=("DOM0", "DOM1", "COD0", "COD1", "REL1"),
                   help="derive from given inputs instead of a point set")
    p.add_argument("--strict", action="store_true", help="fail on negative cok1 or im1")

    p = sub.add_parser("estimate", help="Monte Carlo sweep with sqrt(n) fits")
    _common(p, points=False)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--lunar-mode", choices=["exact", "pruned"], default=None)
    p.add_argument("--config", default=None, help="JSON file with ExperimentConfig fields")
    p.add_argument("--fast", action="store_true", help="small preset: n in 200, 400, 800; 20 trials")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--record-timing", action="store_true", help="fill wall_ms (breaks byte-identical output)")
    p.add_argument("--no-plots", action="store_true")

    p = sub.add_parser("analytic", help="print all closed-form constants and bounds as JSON")
    p.add_argument("--n", type=float, default=1.0, help="intensity for the moment formulas")
    p.add_argument("--out", default=None)
    return parser


# ---------------------------------------------------------------------------


def _single_n(args) -> int:
    if not args.n or len(args.n) != 1:
        raise UsageError("--n takes exactly one value here")
    return args.n[0]


def _topology(args, default="square") -> Topology:
    try:
        return Topology.parse(args.topology or default)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _read_points(path: str):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    if rows and ("x" not in rows[0] or "y" not in rows[0]):
        raise UsageError("input CSV needs x and y columns")
    P = np.array([[float(r["x"]), float(r["y"])] for r in rows]).reshape(-1, 2)
    colors = np.array([int(r.get("color") or 0) for r in rows], dtype=int)
    return P, colors


def _points(args):
    from .harness import sample_poisson, sample_uniform

    if getattr(args, "input", None):
        return _read_points(args.input)
    n = _single_n(args)
    rng = np.random.default_rng(args.seed or 0)
    P = sample_poisson(n, rng) if args.sampler == "poisson" else sample_uniform(n, rng)
    if not 0 < args.p < 1:
        raise UsageError("--p must lie strictly between 0 and 1")
    ones = rng.random(len(P)) < args.p  # same draw order as random_coloring
    return P, ones.astype(int)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _cmd_sample(args) -> int:
    P, colors = _points(args)
    lines = ["x,y,color"] + [f"{x!r},{y!r},{c}" for (x, y), c in zip(P.tolist(), colors.tolist())]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_persist(args) -> int:
    import io

    from .delaunay import triangulate
    from .filtration import radius_values, write_cells_csv
    from .persistence import emst, h0_diagram, h1_diagram, one_norm, write_diagrams_csv

    P, _ = _points(args)
    topo = _topology(args)
    fm = radius_values(triangulate(P, topo, allow_degenerate=topo is Topology.SQUARE))
    tree = emst(fm)
    d0, d1 = h0_diagram(fm, tree), h1_diagram(fm)
    buf = io.StringIO()
    write_diagrams_csv([d0, d1], buf)
    if args.out:
        _emit(buf.getvalue(), args.out)
    if args.cells:
        write_cells_csv(fm, args.cells)
    summary = {
        "points": len(P), "topology": topo.value, "emst_length": tree.total_length,
        "h0_norm": one_norm(d0), "h1_norm": one_norm(d1), "h1_essential": d1.essential,
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _split(P, colors):
    return P[colors == 0], P[colors != 0]


def _cmd_lunar(args) -> int:
    from .lunar import lunar_emst, write_events_csv

    P, colors = _points(args)
    P0, P1 = _split(P, colors)
    if len(P0) == 0 or len(P1) == 0:
        raise ValueError("both color classes must be nonempty")
    tree = lunar_emst(P0, P1, _topology(args), args.lunar_mode, keep_events=bool(args.events))
    if args.events:
        write_events_csv(tree, args.events)
    out = {"cost": tree.cost, "rel1_norm": tree.cost / 2.0, "components": len(tree.component_births),
           "mode": tree.mode, "lunes": tree.n_lunes}
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_sixpack(args) -> int:
    from .sixpack import derive_norms, instance_record

    if args.norms:
        norms = derive_norms(*args.norms, strict=args.strict)
        rec = norms.as_dict()
    else:
        from .harness import instance_norms

        P, colors = _points(args)
        P0, P1 = _split(P, colors)
        norms, length, cost, _ = instance_norms(P0, P1, _topology(args), args.lunar_mode, strict=args.strict)
        rec = instance_record(norms, length, cost)
    _emit(json.dumps(rec, indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_estimate(args) -> int:
    from .harness import ExperimentConfig, run_sweep

    if args.config:
        with open(args.config) as f:
            text = f.read()
        try:
            cfg = ExperimentConfig.from_json(text)
        except (ValueError, TypeError) as exc:
            raise UsageError(f"bad config: {exc}") from exc
        base = dict(vars(cfg))
    else:
        base = dict(vars(ExperimentConfig.fast() if args.fast else ExperimentConfig()))
    if args.n:
        base["n_values"] = args.n
    if args.trials is not None:
        base["trials"] = args.trials
    if args.topology:
        base["topologies"] = ["square", "torus"] if args.topology == "both" else [args.topology]
    if args.sampler:
        base["sampler"] = args.sampler
    if args.seed is not None:
        base["seed"] = args.seed
    if args.lunar_mode:
        base["lunar_mode"] = args.lunar_mode
    if args.workers is not None:
        base["workers"] = args.workers
    if args.record_timing:
        base["record_timing"] = True
    if args.no_plots:
        base["plots"] = False
    if args.p != 0.5:
        base["color_p"] = args.p
    base["out_dir"] = args.out or base.get("out_dir") or "results"
    try:
        cfg = ExperimentConfig(**base)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    res = run_sweep(cfg)
    est = {t: v.get("estimates") for t, v in res["summary"].items()}
    print(json.dumps({"out_dir": cfg.out_dir, "estimates": est}, indent=2))
    return EXIT_OK


def _cmd_analytic(args) -> int:
    if not args.n > 0:
        raise UsageError("--n must be positive")
    _emit(json.dumps(analytics.analytic_table(args.n), indent=2) + "\n", args.out)
    return EXIT_OK


_COMMANDS = {
    "sample": _cmd_sample,
    "persist": _cmd_persist,
    "lunar": _cmd_lunar,
    "sixpack": _cmd_sixpack,
    "estimate": _cmd_estimate,
    "analytic": _cmd_analytic,
}


def main(argv=None) -> int:
    from .harness import is_numeric_failure

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"chroma-mst: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"chroma-mst: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001
        if is_numeric_failure(exc) or isinstance(exc, ValueError):
            print(f"chroma-mst: numeric error: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        raise


if __name__ == "__main__":
    sys.exit(main())
