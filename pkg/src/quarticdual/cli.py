"""Command line front end: ``gen``, ``certify`` and ``report``.

Exit codes: 0 certified / ok, 1 certificate failed, 2 input error,
3 numerical precondition failure.
"""
from __future__ import annotations

import argparse
import csv
import glob
import io
import json
import sys
from pathlib import Path

import numpy as np

from ._linalg import PreconditionError
from .certify import CertifyConfig, certify, save_certificate
from .instance import (
    CASE_TARGETS,
    DimensionError,
    InstanceError,
    generate_random,
    instance_digest,
    load_instance,
    save_instance,
)

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3

REPORT_COLUMNS = (
    "file", "instance_digest", "case_label", "passed", "primal_value", "dual_value",
    "gap_rel", "dual_stationarity", "K", "hessian_lambda_min", "hessian_lambda_max",
    "margin_Aplus", "margin_Aminus", "margin_Bstar", "margin_M", "violations",
)


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_INPUT)


def _positive_int(flag):
    def conv(text):
        try:
            val = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{flag} must be an integer, got {text!r}") from None
        if val < 1:
            raise argparse.ArgumentTypeError(f"{flag} must be >= 1, got {val}")
        return val
    return conv


def _positive_float(flag):
    def conv(text):
        try:
            val = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{flag} must be a number, got {text!r}") from None
        if not val > 0:
            raise argparse.ArgumentTypeError(f"{flag} must be > 0, got {val}")
        return val
    return conv


def _K_flag(text):
    return None if text == "auto" else _positive_float("--K")(text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="quarticdual", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a random instance document")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--n", type=_positive_int("--n"), required=True)
    g.add_argument("--N", type=_positive_int("--N"), required=True)
    g.add_argument("--case", choices=CASE_TARGETS, default="unbiased")
    g.add_argument("--out", type=Path, required=True)

    d = CertifyConfig()
    c = sub.add_parser("certify", help="find a critical point and certify it")
    c.add_argument("--instance", type=Path, required=True)
    c.add_argument("--x-init", default="zero", help="zero | random:SEED | comma separated values")
    c.add_argument("--K", type=_K_flag, default=None, help="auto or a positive value")
    c.add_argument("--r", type=_positive_float("--r"), default=None)
    c.add_argument("--r1", type=_positive_float("--r1"), default=None)
    c.add_argument("--r2", type=_positive_float("--r2"), default=None)
    c.add_argument("--samples", type=_positive_int("--samples"), default=d.samples)
    c.add_argument("--seed", type=int, default=d.seed)
    c.add_argument("--multistart", type=int, default=d.multistart)
    c.add_argument("--gap-tol", type=_positive_float("--gap-tol"), default=d.gap_tol)
    c.add_argument("--stat-tol", type=_positive_float("--stat-tol"), default=d.stat_tol)
    c.add_argument("--newton-tol", type=_positive_float("--newton-tol"), default=d.newton_tol)
    c.add_argument("--max-iter", type=_positive_int("--max-iter"), default=d.max_iter)
    c.add_argument("--legendre-tol", type=_positive_float("--legendre-tol"), default=d.legendre_tol)
    c.add_argument("--out", type=Path, default=None, help="certificate file to write")

    r = sub.add_parser("report", help="tabulate certificate files")
    r.add_argument("--certs", required=True, help="glob pattern")
    r.add_argument("--format", choices=("text", "csv"), default="text")
    return p


def parse_x_init(text: str, n: int) -> np.ndarray:
    if text == "zero":
        return np.zeros(n)
    if text.startswith("random:"):
        try:
            seed = int(text.split(":", 1)[1])
        except ValueError:
            raise InputError(f"--x-init: bad seed in {text!r}") from None
        return np.random.default_rng(seed).standard_normal(n)
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise InputError(f"--x-init: expected zero, random:SEED or numbers, got {text!r}") from None
    if len(vals) != n:
        raise InputError(f"--x-init: expected {n} values, got {len(vals)}")
    return np.array(vals)


def _read_instance(path: Path):
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise InputError(f"--instance: cannot read {path} ({exc.strerror})") from None
    try:
        return load_instance(data)
    except InstanceError as exc:
        raise InputError(f"--instance {path}: {exc}") from None


def _fmt(x, spec=".6e"):
    if x is None:
        return "-"
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return format(x, spec)
    return str(x)


def render_summary(doc: dict) -> str:
    """Human summary built only from a certificate document."""
    p = doc["primal"]
    lines = [
        f"instance      {doc['instance_digest'][:16]}",
        f"x0            {np.array2string(np.array(p['x0']), precision=10, max_line_width=200)}",
        f"converged     {_fmt(p['converged'])}  ({p['iterations']} Newton iterations, "
        f"||grad J|| = {_fmt(p['grad_norm'], '.3e')})",
        f"Hessian       {p['hessian_class']}  lambda_min = {_fmt(p['lambda_min'])}  "
        f"lambda_max = {_fmt(p['lambda_max'])}",
    ]
    if doc["dual"] is not None:
        m = doc["membership"]
        lines += [
            f"J(x0)         {_fmt(doc['primal_value'], '.15g')}",
            f"J*(dual)      {_fmt(doc['dual_value'], '.15g')}",
            f"gap           abs {_fmt(doc['gap_abs'], '.3e')}  rel {_fmt(doc['gap_rel'], '.3e')}",
            f"||grad J*||   {_fmt(doc['dual_stationarity'], '.3e')}",
            f"K             {_fmt(doc['dual']['K'], '.6g')}",
            "membership    set     member  margin",
            f"              B*      {_fmt(m['in_Bstar']):6}  {_fmt(m['margin_Bstar'])}",
            f"              A+*     {_fmt(m['in_Aplus']):6}  {_fmt(m['margin_Aplus'])}",
            f"              A-*     {_fmt(m['in_Aminus']):6}  {_fmt(m['margin_Aminus'])}",
            f"              E*      {_fmt(m['in_Estar']):6}",
            f"              M pd    {_fmt(m['M_pd']):6}  {_fmt(m['margin_M'])}",
        ]
    lines.append(f"case          {doc['case_label']}")
    for name, rec in doc["sampling"].items():
        lines.append(f"  {name:20s} checked {rec['checked']:6d}  violations {rec['violations']:6d}  "
                     f"worst margin {_fmt(rec['worst_margin'], '.3e')}")
    if doc["legendre"] is not None:
        L = doc["legendre"]
        lines.append(f"legendre      L1 {_fmt(L['L1'], '.2e')}  L2 {_fmt(L['L2'], '.2e')}  "
                     f"L3 {_fmt(L['L3'], '.2e')}  ({L['checked']} points)")
    for msg in doc["diagnostics"]:
        lines.append(f"note          {msg}")
    lines.append(f"result        {'PASSED' if doc['passed'] else 'FAILED'}")
    return "\n".join(lines)


def cmd_gen(args) -> int:
    try:
        inst = generate_random(args.seed, args.n, args.N, args.case)
    except DimensionError as exc:
        raise InputError(str(exc)) from None
    args.out.write_bytes(save_instance(inst))
    print(instance_digest(inst))
    return EXIT_OK


def cmd_certify(args) -> int:
    inst = _read_instance(args.instance)
    x_init = parse_x_init(args.x_init, inst.n)
    try:
        cfg = CertifyConfig(r=args.r, r1=args.r1, r2=args.r2, samples=args.samples, seed=args.seed,
                            gap_tol=args.gap_tol, stat_tol=args.stat_tol, multistart=args.multistart,
                            K=args.K, newton_tol=args.newton_tol, max_iter=args.max_iter,
                            legendre_tol=args.legendre_tol)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    try:
        cert = certify(inst, x_init, cfg)
    except PreconditionError as exc:
        print(f"numerical precondition failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    data = save_certificate(cert)
    if args.out is not None:
        args.out.write_bytes(data)
    print(render_summary(json.loads(data)))
    return EXIT_OK if cert.passed else EXIT_FAILED


def report_rows(paths: list[str]) -> list[dict]:
    rows = []
    for path in paths:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
            p, m, d = doc["primal"], doc["membership"] or {}, doc["dual"] or {}
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise InputError(f"--certs: cannot read certificate {path} ({exc})") from None
        rows.append({
            "file": path,
            "instance_digest": doc["instance_digest"],
            "case_label": doc["case_label"],
            "passed": doc["passed"],
            "primal_value": doc["primal_value"],
            "dual_value": doc["dual_value"],
            "gap_rel": doc["gap_rel"],
            "dual_stationarity": doc["dual_stationarity"],
            "K": d.get("K"),
            "hessian_lambda_min": p["lambda_min"],
            "hessian_lambda_max": p["lambda_max"],
            "margin_Aplus": m.get("margin_Aplus"),
            "margin_Aminus": m.get("margin_Aminus"),
            "margin_Bstar": m.get("margin_Bstar"),
            "margin_M": m.get("margin_M"),
            "violations": sum(r["violations"] for r in doc["sampling"].values()),
        })
    return rows


def format_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for row in rows:
        w.writerow(["" if row[k] is None else repr(row[k]) if isinstance(row[k], float)
                    else str(row[k]).lower() if isinstance(row[k], bool) else row[k]
                    for k in REPORT_COLUMNS])
    return buf.getvalue()


def format_text(rows: list[dict]) -> str:
    cells = [list(REPORT_COLUMNS)]
    for row in rows:
        cells.append([Path(row["file"]).name if k == "file" else
                      row[k][:12] if k == "instance_digest" else
                      _fmt(row[k], ".4e") for k in REPORT_COLUMNS])
    widths = [max(len(r[i]) for r in cells) for i in range(len(REPORT_COLUMNS))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells) + "\n"


def cmd_report(args) -> int:
    paths = sorted(glob.glob(args.certs))
    if not paths:
        print(f"warning: no certificate files match {args.certs!r}", file=sys.stderr)
    rows = report_rows(paths)
    sys.stdout.write(format_csv(rows) if args.format == "csv" else format_text(rows))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"gen": cmd_gen, "certify": cmd_certify, "report": cmd_report}[args.command]
    try:
        return handler(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
