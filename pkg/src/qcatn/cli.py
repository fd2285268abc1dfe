"""Command-line front end: ``qcatn classify | build-pepu | audit-arealaw | run-example | selftest``.

Exit status is 0 on success, 1 on usage or input errors and 2 when the
classifier's verdicts contradict the class inclusions.  Failures print a
single line ``error[CODE]: message`` on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from urllib.parse import parse_qsl

import numpy as np

from . import __version__
from . import channels as C
from .classify import (
    DEFAULT_TOL,
    REGION_POLICIES,
    EmptyRegionSetError,
    TaxonomyInconsistency,
    taxonomy,
)
from .entanglement import audit_area_law, cjs_mutual_information, doubled, left_half
from .lattice import Lattice, parse_lattice
from .tensor_core import DenseCapError

EXIT_OK, EXIT_USAGE, EXIT_INCONSISTENT = 0, 1, 2


class CLIError(Exception):
    def __init__(self, code: str, message: str, status: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code
        self.status = status


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError("USAGE", message)


def _value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if "," in text or "-" in text.strip("-"):
        parts = text.replace("-", ",").split(",")
        try:
            return [int(p) for p in parts if p]
        except ValueError:
            pass
    return text


def parse_channel_spec(spec: str):
    """``builtin:NAME[?key=value&...]`` or a path to a JSON channel description.

    Returns a constructor ``Lattice -> Channel`` and a printable identifier.
    """
    if spec.startswith("builtin:"):
        body = spec[len("builtin:"):]
        name, _, query = body.partition("?")
        params = {k: _value(v) for k, v in parse_qsl(query, keep_blank_values=False)}
        if "sites" in params and isinstance(params["sites"], list):
            params["sites"] = tuple(params["sites"])
        if name not in C.BUILTINS and name not in ("brickwork", "swap", "product", "depolarizing"):
            raise CLIError("SPEC", f"unknown builtin channel {name!r}")
        return (lambda lat: C.builtin(name, lat, **params)), spec
    path = Path(spec[len("file:"):] if spec.startswith("file:") else spec)
    if not path.exists():
        raise CLIError("SPEC", f"channel spec {spec!r} is neither builtin:NAME nor an existing file")
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CLIError("SPEC", f"malformed channel file {path}: {exc}") from None
    return (lambda lat: C.channel_from_json(obj, lat)), str(path)


def _lattice(spec: str, default_M: int | None = None) -> Lattice:
    if default_M is not None and "M=" not in spec:
        spec = f"{spec},M={default_M}"
    try:
        return parse_lattice(spec)
    except ValueError as exc:
        raise CLIError("LATTICE", str(exc)) from None


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


# commands


def cmd_classify(args) -> int:
    make, ident = parse_channel_spec(args.channel)
    lat = _lattice(args.lattice)
    ch = make(lat)
    status = EXIT_OK
    try:
        report = taxonomy(ch, args.tol, args.regions)
    except TaxonomyInconsistency as exc:
        report = exc.report
        report.notes.append(f"inconsistent verdicts: {exc}")
        status = EXIT_INCONSISTENT
    report.channel_id = ident
    if args.format == "csv":
        keys = ["cpqc_residual", "cpqc_heisenberg_residual", "lpqc_residual", "fqc_residual"]
        rows = [[" ".join(",".join(map(str, s)) for s in r["A"])] + [repr(r[k]) for k in keys]
                for r in report.per_region]
        text = _rows_csv(["A"] + keys, rows)
    else:
        text = _dump(report.to_json())
    _emit(text, args.output)
    if status == EXIT_INCONSISTENT:
        raise CLIError("INCONSISTENT", report.notes[-1], EXIT_INCONSISTENT)
    return status


def cmd_build_pepu(args) -> int:
    from .tn import QCAError, build_pepu_from_qca

    make, ident = parse_channel_spec(args.channel)
    lat = _lattice(args.lattice)
    try:
        res = build_pepu_from_qca(make(lat), r=args.r, seed=args.seed, tol=args.tol)
    except QCAError as exc:
        raise CLIError("NOT_QCA", str(exc)) from None
    if args.format == "csv":
        rows = [[" ".join(",".join(map(str, s)) for s in e), D] for e, D in sorted(res.tno.bond_dims.items())]
        text = _rows_csv(["edge", "bond_dim"], rows)
    else:
        text = _dump({
            "channel": ident,
            "lattice": lat.to_dict(),
            "tolerance": args.tol,
            "version": __version__,
            "report": res.report(),
            "network": res.tno.to_json(),
        })
    _emit(text, args.output)
    return EXIT_OK


def cmd_audit(args) -> int:
    make, ident = parse_channel_spec(args.family)
    try:
        sizes = [int(x) for x in args.sizes.split(",") if x]
    except ValueError:
        raise CLIError("USAGE", f"cannot parse sizes {args.sizes!r}") from None
    if not sizes:
        raise CLIError("USAGE", "no sizes given")
    template = _lattice(args.lattice, default_M=max(sizes))
    metric = {"ee": "ee", "mi": "mi"}[args.metric]
    report = audit_area_law(make, sizes, template, metric=metric, samples=args.samples,
                            seed=args.seed, regions=args.regions, c_bound=args.c_bound, name=ident)
    text = report.to_csv() if args.format == "csv" else _dump(report.to_json())
    _emit(text, args.output)
    return EXIT_OK


def _example_mi(lat: Lattice) -> dict:
    ch = C.example3(lat)
    pairs = C.half_shift_pairs(lat)
    per_pair = [
        {"pair": [list(n), list(m)], "mutual_information": cjs_mutual_information(ch, doubled([n]), doubled([m]))}
        for n, m in pairs
    ]
    (A,) = left_half(lat)
    rest = [s for s in lat.sites if s not in set(A)]
    return {
        "per_pair": per_pair,
        "left_half": [list(s) for s in A],
        "left_half_mutual_information": cjs_mutual_information(ch, doubled(A), doubled(rest)),
        "straddling_pairs": sum((n in A) != (m in A) for n, m in pairs),
    }


def cmd_run_example(args) -> int:
    if args.name not in ("example1", "example2", "example3"):
        raise CLIError("USAGE", f"unknown example {args.name!r}")
    lat = _lattice(args.lattice)
    out = {"example": args.name, "lattice": lat.to_dict(), "tolerance": args.tol, "version": __version__}
    if args.report == "mi":
        if args.name != "example3":
            raise CLIError("USAGE", "the mi report is defined for example3")
        out["mutual_information"] = _example_mi(lat)
    else:
        ch = C.builtin(args.name, lat)
        try:
            out["taxonomy"] = taxonomy(ch, args.tol, args.regions).to_json()
        except TaxonomyInconsistency as exc:
            raise CLIError("INCONSISTENT", str(exc), EXIT_INCONSISTENT) from None
    if args.format == "csv":
        if args.report == "mi":
            rows = [[" ".join(",".join(map(str, s)) for s in p["pair"]), repr(p["mutual_information"])]
                    for p in out["mutual_information"]["per_pair"]]
            text = _rows_csv(["pair", "mutual_information"], rows)
        else:
            text = _rows_csv(["predicate", "verdict"], sorted(out["taxonomy"]["verdicts"].items()))
    else:
        text = _dump(out)
    _emit(text, args.output)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    checks = run_selftest()
    if args.format == "csv":
        text = _rows_csv(["check", "passed", "detail"], [list(c) for c in checks])
    else:
        text = _dump({"version": __version__, "checks": [c._asdict() for c in checks]})
    _emit(text, args.output)
    if not all(c.passed for c in checks):
        failed = [c.name for c in checks if not c.passed]
        raise CLIError("SELFTEST", f"failed checks: {', '.join(failed)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qcatn", description="Locality taxonomy of quantum channels on qudit lattices.")
    p.add_argument("--version", action="version", version=f"qcatn {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, tol=True):
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")
        if tol:
            sp.add_argument("--tol", type=float, default=DEFAULT_TOL)

    sp = sub.add_parser("classify", help="evaluate every class predicate on a channel")
    sp.add_argument("--channel", required=True, help="builtin:NAME[?k=v&...] or a JSON file")
    sp.add_argument("--lattice", required=True, help='e.g. "1d,M=4,open,d=2,r=1"')
    sp.add_argument("--regions", default="default", choices=REGION_POLICIES)
    common(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("build-pepu", help="tensor-network form of a QCA")
    sp.add_argument("--channel", required=True)
    sp.add_argument("--lattice", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--r", type=int, default=None, help="range (defaults to the lattice's r)")
    common(sp)
    sp.set_defaults(func=cmd_build_pepu)

    sp = sub.add_parser("audit-arealaw", help="entanglement or mutual-information scaling audit")
    sp.add_argument("--family", required=True)
    sp.add_argument("--lattice", default="1d,open", help="lattice template; M comes from --sizes")
    sp.add_argument("--sizes", default="4,5,6")
    sp.add_argument("--metric", choices=("ee", "mi"), default="ee")
    sp.add_argument("--regions", choices=("blocks", "half"), default="blocks")
    sp.add_argument("--samples", type=int, default=16)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--c-bound", type=float, default=None, dest="c_bound")
    common(sp, tol=False)
    sp.set_defaults(func=cmd_audit)

    sp = sub.add_parser("run-example", help="reproduce one of the worked examples")
    sp.add_argument("--name", required=True)
    sp.add_argument("--lattice", required=True)
    sp.add_argument("--report", choices=("taxonomy", "mi"), default="taxonomy")
    sp.add_argument("--regions", default="default", choices=REGION_POLICIES)
    common(sp)
    sp.set_defaults(func=cmd_run_example)

    sp = sub.add_parser("selftest", help="run the built-in invariant checks")
    common(sp, tol=False)
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            raise CLIError("USAGE", "a command is required (classify, build-pepu, audit-arealaw, run-example, selftest)")
        return args.func(args)
    except CLIError as exc:
        status, code, msg = exc.status, exc.code, str(exc)
    except DenseCapError as exc:
        status, code, msg = EXIT_USAGE, "DENSE_CAP", str(exc)
    except EmptyRegionSetError as exc:
        status, code, msg = EXIT_USAGE, "EMPTY_S", str(exc)
    except (C.ChannelError, ValueError) as exc:
        status, code, msg = EXIT_USAGE, "INPUT", str(exc)
    sys.stderr.write(f"error[{code}]: {' '.join(msg.split())}\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
