"""Command-line front end: ``info``, ``gen``, ``curvature`` and ``probe``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .exceptions import HypercurvError, ValidationError
from .hypergraph import FAMILIES, FamilySpec, Hypergraph, generate, parse, serialize
from .kantorovich import KAPPA_TOL, LAMBDAS, c_value, kappa, kd, pairing_l0, wkd
from .resolvent import probe_liminf
from .transport import lly_curvature

COLUMNS = [
    "x",
    "y",
    "d",
    "kappa_lly",
    "kappa_iktu",
    "kappa_wiktu",
    "C",
    "pairing_constant",
    "stabilization_lambda",
    "certificate",
    "error",
]
METHODS = ("lly", "iktu", "wiktu", "c")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def _lambdas(text):
    try:
        vals = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad lambda list {text!r}") from None
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("lambdas must be positive")
    return vals


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _read(args) -> Hypergraph:
    if args.input in (None, "-"):
        text = sys.stdin.read()
    else:
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
    return parse(text, allow_multi=args.allow_multi)


def _write(args, text):
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _emit_rows(args, rows, columns):
    if args.format == "json":
        out = [{k: r.get(k) for k in columns} for r in rows]
        _write(args, json.dumps(out, indent=2) + "\n")
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(k)) for k in columns])
    _write(args, buf.getvalue())


def _pairs(h, args):
    if args.pair:
        return [(h.index(_label(args.pair[0])), h.index(_label(args.pair[1])))]
    return [(a, b) for a in range(h.n) for b in range(a + 1, h.n)]


def _label(s):
    return int(s) if s.lstrip("-").isdigit() else s


def cmd_info(args):
    h = _read(args)
    lines = [
        f"n {h.n}",
        f"edges {h.n_edges}",
        f"vol {_fmt(float(h.vol))}",
        f"diam {h.diam}",
        "vertex degree",
    ]
    lines += [f"{h.name(v)} {_fmt(float(h.deg[v]))}" for v in range(h.n)]
    _write(args, "\n".join(lines) + "\n")
    return 0


def cmd_gen(args):
    spec = FamilySpec(
        args.family,
        n=args.n,
        A=args.A,
        B=args.B,
        w=args.w,
        w_ev=args.w_ev,
        w_e=args.w_e,
        allow_multi=args.allow_multi,
    )
    h = generate(spec)
    _write(args, f"# family {args.family}\n" + serialize(h))
    return 0


def _curvature_row(h, x, y, methods, args):
    row = {"x": h.name(x), "y": h.name(y), "d": int(h.dist[x, y])}
    errors, certs = [], []
    if "lly" in methods:
        if h.is_graph():
            try:
                row["kappa_lly"] = lly_curvature(h, x, y)
            except HypercurvError as exc:
                errors.append(f"lly: {exc}")
        elif args.method:
            errors.append("lly: not a graph")
    for variant in ("iktu", "wiktu"):
        if variant not in methods:
            continue
        try:
            rep = kappa(h, x, y, variant, lambdas=args.lambdas, tol=args.tol, rng=args.seed)
        except HypercurvError as exc:
            errors.append(f"{variant}: {exc}")
            continue
        row[f"kappa_{variant}"] = rep.kappa
        row["pairing_constant"] = rep.pairing_constant
        row["stabilization_lambda"] = rep.stabilization_lambda
        certs.append(f"{variant}_fw_gap={rep.certificate:.3g}")
    if "c" in methods:
        try:
            val, _, exact = c_value(h, x, y, rng=args.seed)
            row["C"] = val
            certs.append("C=exact" if exact else "C=upper_bound")
        except HypercurvError as exc:
            errors.append(f"c: {exc}")
    row["certificate"] = ";".join(certs)
    row["error"] = "; ".join(errors)
    return row, not errors


def cmd_curvature(args):
    h = _read(args)
    methods = args.method or list(METHODS)
    rows, ok = [], True
    for x, y in _pairs(h, args):
        if x == y:
            raise ValidationError("pair vertices must differ")
        row, good = _curvature_row(h, x, y, methods, args)
        rows.append(row)
        ok &= good
    _emit_rows(args, rows, COLUMNS)
    return 0 if ok else 1


PROBE_COLUMNS = [
    "x",
    "y",
    "lambda",
    "inf_psi_over_lambda",
    "mean_psi_over_lambda",
    "samples",
    "kd",
    "wkd",
    "kd_minus_wkd",
    "pairing_constant",
]


def cmd_probe(args):
    h = _read(args)
    rows = []
    for x, y in _pairs(h, args):
        table = probe_liminf(h, x, y, args.lambdas, args.samples, rng=args.seed)
        for t in table:
            lam = t["lambda"]
            a = kd(h, x, y, lam, rng=args.seed)
            b = wkd(h, x, y, lam, rng=args.seed)
            rows.append({
                "x": h.name(x),
                "y": h.name(y),
                "lambda": lam,
                "inf_psi_over_lambda": t["inf"],
                "mean_psi_over_lambda": t["mean"],
                "samples": t["samples"],
                "kd": a.value,
                "wkd": b.value,
                "kd_minus_wkd": a.value - b.value,
                "pairing_constant": pairing_l0(h, np.round(b.potential), x, y),
            })
    _emit_rows(args, rows, PROBE_COLUMNS)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="hypercurv", description="Ricci-type curvatures of weighted hypergraphs.")
    sub = p.add_subparsers(dest="command", required=True)

    def io_flags(sp, fmt=False):
        sp.add_argument("-i", "--input", help="hypergraph file (default: stdin)")
        sp.add_argument("-o", "--output", help="output path (default: stdout)")
        sp.add_argument("--allow-multi", action="store_true", help="accept repeated hyperedges")
        if fmt:
            sp.add_argument("--format", choices=("csv", "json"), default="csv")

    def pair_flags(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--pair", nargs=2, metavar=("X", "Y"), help="vertex names or indices")
        g.add_argument("--all", action="store_true", help="all unordered pairs (default)")
        sp.add_argument("--lambdas", type=_lambdas, default=LAMBDAS, help="comma separated lambda schedule")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("info", help="summary of a hypergraph file")
    io_flags(sp)
    sp.set_defaults(func=cmd_info)

    sp = sub.add_parser("gen", help="write a family instance")
    sp.add_argument("family", choices=FAMILIES)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--A", type=int, default=0)
    sp.add_argument("--B", type=int, default=0)
    sp.add_argument("--w", type=_positive, default=1.0, help="hyperedge weight of r1")
    sp.add_argument("--w-ev", type=_positive, default=1.0, help="weight of the covering hyperedge")
    sp.add_argument("--w-e", type=_positive, default=1.0, help="weight of the second hyperedge")
    sp.add_argument("-o", "--output")
    sp.add_argument("--allow-multi", action="store_true")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("curvature", help="curvature table for vertex pairs")
    io_flags(sp, fmt=True)
    pair_flags(sp)
    sp.add_argument("--method", action="append", choices=METHODS,
                    help="repeatable; default computes every applicable method")
    sp.add_argument("--tol", type=_positive, default=KAPPA_TOL, help="lambda-stabilisation threshold")
    sp.set_defaults(func=cmd_curvature)

    sp = sub.add_parser("probe", help="evidence tables for the open questions")
    io_flags(sp, fmt=True)
    pair_flags(sp)
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--tol", type=_positive, default=KAPPA_TOL)
    sp.set_defaults(func=cmd_probe, lambdas=(1e-2, 1e-3, 1e-4))
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (HypercurvError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
