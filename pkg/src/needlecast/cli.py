"""Command-line front end.

Every command produces one :class:`OutputRecord`, written either as CSV
(comment-line header followed by a table) or as JSON.  Floats are rendered
with 17 significant digits in both formats, so parsing the output gives back
the exact binary values.

Settings resolve as flag, then ``NEEDLECAST_*`` environment variable, then
built-in default.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from needlecast import __version__
from needlecast.conditional import ClusterSpec
from needlecast.convergence import convergence_report
from needlecast.errors import ConvergenceError, NeedlecastError
from needlecast.lattice import LatticeParams
from needlecast.limit import LimitLaw, limit_atom, limit_cdf, limit_moment
from needlecast.montecarlo import ThrowConfig, simulate
from needlecast.quadrature import TOL_MOMENT, TOL_PROBABILITY
from needlecast.unconditional import pmf

SCHEMA = "needlecast-output/1"
ENV_PREFIX = "NEEDLECAST_"
VERIFY_LATTICES = ((2.0, 2.0), (2.0, 4.0), (3.0, 5.0))
VERIFY_NS = (1, 2, 5)
VERIFY_MIN_PROB = 1e-4
VERIFY_Z = 4.0


def render_float(value: float) -> str:
    text = format(value, ".17g")
    if text.lstrip("-").isdigit():
        text += ".0"
    return text


def _render_json(obj) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return json.dumps(str(float(obj)))
        return render_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_render_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_render_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _render_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return render_float(float(value))
    return str(value)


@dataclass
class OutputRecord:
    command: str
    lattice: dict
    parameters: dict
    columns: list[str]
    rows: list[list]
    metadata: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "command": self.command,
            "lattice": self.lattice,
            "parameters": self.parameters,
            "columns": self.columns,
            "rows": self.rows,
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return _render_json(self.as_dict()) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema: {SCHEMA}\n")
        buf.write(f"# command: {self.command}\n")
        for title, section in (("lattice", self.lattice), ("parameters", self.parameters),
                               ("metadata", self.metadata)):
            pairs = " ".join(f"{k}={_render_cell(v)}" for k, v in section.items())
            buf.write(f"# {title}: {pairs}\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(_render_cell(v) for v in row) + "\n")
        return buf.getvalue()


# -- argument handling -------------------------------------------------------


def _side(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if math.isnan(value) or value < 2:
        raise argparse.ArgumentTypeError(
            f"{text} is below 2; the model needs min(a, b) >= 2 so a needle meets at most one line per direction"
        )
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {value}")
    return value


def _int_list(text: str) -> list[int]:
    return [_positive_int(part) for part in text.split(",") if part.strip()]


def _env(name: str, cast, default):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None or raw == "":
        return default
    try:
        return cast(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value for {ENV_PREFIX}{name}: {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--a", type=_side, default=None, help="cell width (>= 2, default 2)")
    common.add_argument("--b", type=_side, default=None, help="cell height (>= 2, default 2)")
    common.add_argument("--tol", type=float, default=None, help="absolute quadrature tolerance")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="write here instead of standard output")
    common.add_argument("--timing", action="store_true", help="add wall-clock runtime to metadata")

    parser = argparse.ArgumentParser(
        prog="needlecast",
        description="Crossing counts of a needle cluster thrown on a rectangle lattice.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pmf", parents=[common], help="exact pmf of the crossing count")
    p.add_argument("--n", type=_positive_int, default=1)

    p = sub.add_parser("cdf", parents=[common], help="exact step CDF of crossings per needle")
    p.add_argument("--n", type=_positive_int, default=1)
    p.add_argument("--grid", type=_positive_int, default=201, help="grid points on [0, 2]")

    p = sub.add_parser("limit", parents=[common], help="limit law: CDF curve, atom, moments")
    p.add_argument("--k", type=_positive_int, default=4, help="highest moment order")
    p.add_argument("--grid", type=_positive_int, default=101, help="grid points on [0, 1]")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--throws", type=_positive_int, default=1_000_000)
    mc.add_argument("--seed", type=int, default=None)
    mc.add_argument("--streams", type=_positive_int, default=4, help="logical random streams")
    mc.add_argument("--threads", type=_positive_int, default=None, help="worker threads")

    p = sub.add_parser("simulate", parents=[common, mc], help="Monte Carlo histogram")
    p.add_argument("--n", type=_positive_int, default=1)

    p = sub.add_parser("converge", parents=[common], help="distance tables between F_n and F")
    p.add_argument("--n", type=_int_list, default=[5, 20, 80, 320], help="comma-separated n values")
    p.add_argument("--k", type=_positive_int, default=4, help="highest moment order")
    p.add_argument("--grid", type=_positive_int, default=10_000)

    p = sub.add_parser("verify", parents=[common, mc], help="exact pmf against Monte Carlo")
    p.add_argument("--n", type=_int_list, default=None, help="comma-separated n values")
    return parser


def _lattice_fields(a: float, b: float) -> dict:
    return {"a": a, "b": b, "lambda": 1.0 / a, "mu": 1.0 / b}


def _tol(args, default: float) -> float:
    if args.tol is not None:
        return args.tol
    return _env("TOL", float, default)


def _seed(args) -> int:
    return args.seed if args.seed is not None else _env("SEED", int, 0)


def _threads(args) -> int:
    return args.threads if args.threads is not None else _env("THREADS", int, 1)


# -- commands -----------------------------------------------------------------


def cmd_pmf(args, echo: str) -> OutputRecord:
    lat = LatticeParams(args.a, args.b)
    tol = _tol(args, TOL_PROBABILITY)
    law = pmf(ClusterSpec(args.n), lat, tol)
    rows = [[i, float(p)] for i, p in enumerate(law.probs)]
    return OutputRecord(echo, _lattice_fields(lat.a, lat.b), {"n": args.n, "tol": tol},
                        ["i", "p"], rows, {"evals": law.evals})


def cmd_cdf(args, echo: str) -> OutputRecord:
    lat = LatticeParams(args.a, args.b)
    tol = _tol(args, TOL_PROBABILITY)
    law = pmf(ClusterSpec(args.n), lat, tol)
    step = law.cdf()
    xs = np.linspace(0.0, 2.0, args.grid) if args.grid > 1 else np.array([0.0])
    rows = [[float(x), float(step(float(x)))] for x in xs]
    return OutputRecord(echo, _lattice_fields(lat.a, lat.b),
                        {"n": args.n, "tol": tol, "grid": args.grid},
                        ["x", "F_n"], rows, {"evals": law.evals})


def cmd_limit(args, echo: str) -> OutputRecord:
    law = LimitLaw.from_sides(args.a, args.b)
    tol = _tol(args, 1e-10)
    xs = np.linspace(0.0, 1.0, args.grid) if args.grid > 1 else np.array([0.0])
    rows = [["cdf", float(x), float(limit_cdf(law, float(x)))] for x in xs]
    rows.append(["atom", 0.0, limit_atom(law)])
    rows.extend(["moment", float(k), limit_moment(law, k, tol)] for k in range(1, args.k + 1))
    regime = "extrapolated" if law.extrapolated else "lattice"
    return OutputRecord(echo, _lattice_fields(args.a, args.b),
                        {"k": args.k, "grid": args.grid, "tol": tol},
                        ["quantity", "arg", "value"], rows, {"regime": regime})


def _summary_rows(summary) -> list[list]:
    rows = []
    for i, (count, freq, se) in enumerate(zip(summary.histogram, summary.frequencies, summary.stderr)):
        rows.append(["count", i, int(count)])
        rows.append(["frequency", i, float(freq)])
        rows.append(["stderr", i, float(se)])
    for k, m in enumerate(summary.moments, start=1):
        rows.append(["moment", k, float(m)])
    return rows


def cmd_simulate(args, echo: str) -> OutputRecord:
    lat = LatticeParams(args.a, args.b)
    seed = _seed(args)
    cfg = ThrowConfig(ClusterSpec(args.n), lat, args.throws, seed, args.streams)
    summary = simulate(cfg, threads=_threads(args))
    params = {"n": args.n, "throws": args.throws, "seed": seed, "streams": args.streams}
    return OutputRecord(echo, _lattice_fields(lat.a, lat.b), params,
                        ["quantity", "arg", "value"], _summary_rows(summary))


def cmd_converge(args, echo: str) -> OutputRecord:
    lat = LatticeParams(args.a, args.b)
    tol = _tol(args, TOL_PROBABILITY)
    report = convergence_report(lat, args.n, args.k, tol=tol, grid=args.grid)
    rows = []
    for n, sup, atom in zip(report.n_values, report.sup_distances, report.atom_gaps):
        rows.append(["sup_distance", n, None, sup])
        rows.append(["atom_gap", n, None, atom])
    for r in report.moment_rows:
        rows.append(["moment_gap", r.n, r.k, r.gap])
    meta = {f"decreasing_{k}": v for k, v in report.monotone().items()}
    return OutputRecord(echo, _lattice_fields(lat.a, lat.b),
                        {"n": ",".join(map(str, report.n_values)), "k": args.k, "tol": tol},
                        ["quantity", "n", "k", "value"], rows, meta)


def verification_rows(lattices, ns, throws: int, seed: int, streams: int = 4,
                      threads: int = 1, tol: float = TOL_PROBABILITY) -> list[list]:
    """Compare exact pmfs and the mean with Monte Carlo at 4 standard errors.

    Bins with fewer than 10 hits are reported as
    ``flagged`` and not tested.
    """
    rows = []
    for a, b in lattices:
        lat = LatticeParams(a, b)
        for n in ns:
            exact = pmf(ClusterSpec(n), lat, tol).probs
            cfg = ThrowConfig(ClusterSpec(n), lat, throws, seed, streams)
            emp = simulate(cfg, threads=threads)
            for i, p in enumerate(exact):
                if p <= VERIFY_MIN_PROB:
                    continue
                observed = float(emp.frequencies[i])
                se = float(emp.stderr[i])
                if emp.flagged[i] or se == 0.0:
                    rows.append(["pmf", a, b, n, i, float(p), observed, se, None, "flagged"])
                    continue
                z = (observed - p) / se
                rows.append(["pmf", a, b, n, i, float(p), observed, se, z,
                             "pass" if abs(z) <= VERIFY_Z else "fail"])
            mean = 2.0 * (lat.lam + lat.mu) / math.pi
            se = emp.moment_stderr(1)
            z = (emp.moments[0] - mean) / se if se > 0 else 0.0
            rows.append(["mean", a, b, n, None, mean, float(emp.moments[0]), se, z,
                         "pass" if abs(z) <= VERIFY_Z else "fail"])
    return rows


def cmd_verify(args, echo: str) -> OutputRecord:
    seed = _seed(args)
    tol = _tol(args, TOL_PROBABILITY)
    if args.a is None and args.b is None:
        lattices = VERIFY_LATTICES
    else:
        lattices = ((args.a or 2.0, args.b or 2.0),)
    ns = tuple(args.n) if args.n else VERIFY_NS
    rows = verification_rows(lattices, ns, args.throws, seed, args.streams, _threads(args), tol)
    failures = sum(1 for r in rows if r[-1] == "fail")
    params = {"n": ",".join(map(str, ns)), "throws": args.throws, "seed": seed,
              "streams": args.streams, "tol": tol}
    lattice = {"lattices": ";".join(f"{a:g}x{b:g}" for a, b in lattices)}
    return OutputRecord(echo, lattice, params,
                        ["check", "a", "b", "n", "i", "expected", "observed", "stderr", "z", "status"],
                        rows, {"failures": failures})


COMMANDS = {
    "pmf": cmd_pmf,
    "cdf": cmd_cdf,
    "limit": cmd_limit,
    "simulate": cmd_simulate,
    "converge": cmd_converge,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "verify":
        args.a = 2.0 if args.a is None else args.a
        args.b = 2.0 if args.b is None else args.b
    echo = " ".join(["needlecast", *argv])
    started = time.perf_counter()
    try:
        record = COMMANDS[args.command](args, echo)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    except ConvergenceError as exc:
        print(f"needlecast: error: {exc}", file=sys.stderr)
        return 1
    except NeedlecastError as exc:
        print(f"needlecast: error: {exc}", file=sys.stderr)
        return 2
    record.metadata = {"version": __version__, **record.metadata}
    if args.timing:
        record.metadata["runtime_s"] = time.perf_counter() - started
    text = record.to_json() if args.format == "json" else record.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "verify" and record.metadata.get("failures", 0):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
