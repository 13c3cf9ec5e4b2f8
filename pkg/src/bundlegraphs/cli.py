"""Command-line front end.

Exit status: 0 on success or pass, 1 on verification failure, 2 on usage
or guard errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from importlib import resources
from typing import Any, Sequence

from bundlegraphs import __version__
from bundlegraphs.coding import (
    CONVENTIONS,
    POSITIVE,
    format_address,
    format_code,
    format_vertex,
    p_param,
    parse_code,
    parse_vertex,
)
from bundlegraphs.embed_esa import build_esa, psi_esa
from bundlegraphs.embed_l1 import SCALE_MODES, SEPARATED, ConstructionError, build_l1, psi_l1_summary
from bundlegraphs.embed_linf import psi_linf
from bundlegraphs.graph import DEFAULT_VERTEX_LIMIT, dist_bfs, dist_formula, materialize
from bundlegraphs.harness import (
    EMBEDDINGS,
    SUITES,
    Corpus,
    PairPolicy,
    evaluate,
    report_to_dict,
    run_suite,
)
from bundlegraphs.products import check_isomorphism, family, oslash, oslash_n

OK, FAILED, USAGE = 0, 1, 2
CSV_COLUMNS = ("code", "kappa", "k", "embedding", "distortion_exact", "bound_exact", "vertices", "seconds")


def report_schema() -> dict[str, Any]:
    """The published JSON schema for ``verify`` and ``suite`` output."""
    text = resources.files("bundlegraphs").joinpath("schemas/report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bundlegraphs", description="Bundle graphs, their metrics and embeddings.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--limit", type=int, default=DEFAULT_VERTEX_LIMIT, help="vertex cap for materialized graphs")
    common.add_argument("--json-errors", action="store_true", help="report errors on stderr as JSON")
    modes = _Parser(add_help=False)
    modes.add_argument("--scale-mode", choices=SCALE_MODES, default=SEPARATED)
    modes.add_argument("--convention", choices=CONVENTIONS, default=POSITIVE, help="index range for p_W")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("graph", parents=[common], help="materialize and dump a graph")
    p.add_argument("--w", required=True)
    p.add_argument("--kappa", type=int, required=True)

    p = sub.add_parser("dist", parents=[common], help="distance of one pair")
    p.add_argument("--w", required=True)
    p.add_argument("--u", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--bfs", action="store_true", help="also compute the BFS distance")
    p.add_argument("--kappa", type=int, help="branching for --bfs (default: smallest that fits the addresses, at least 2)")

    p = sub.add_parser("embed", parents=[common, modes], help="build an embedding and dump every vertex")
    p.add_argument("--w", required=True)
    p.add_argument("--kappa", type=int, required=True)
    p.add_argument("--embedding", choices=EMBEDDINGS, required=True)

    p = sub.add_parser("verify", parents=[common, modes], help="distortion report for one graph")
    p.add_argument("--w", required=True)
    p.add_argument("--kappa", type=int, required=True)
    p.add_argument("--embedding", choices=EMBEDDINGS, required=True)
    p.add_argument("--pairs", default="all", help="all, sample:N or sample:N:SEED")

    p = sub.add_parser("suite", parents=[common], help="run invariant suites over a corpus")
    p.add_argument("--max-height", type=int, default=6, help="largest M+1")
    p.add_argument("--max-depth", type=int, default=2)
    p.add_argument("--kappa", type=int, action="append", help="repeatable (default: 2 and 3)")
    p.add_argument("--codes", help="explicit codes separated by ';' instead of the enumeration")
    p.add_argument("--suites", default=",".join(SUITES), help="comma-separated subset of " + ",".join(SUITES))
    p.add_argument("--axiom-trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("oslash", parents=[common], help="compose two codes")
    p.add_argument("--w", required=True)
    p.add_argument("--w2", required=True)
    p.add_argument("--n", type=int, help="replace only the edges between heights n and n+1")
    p.add_argument("--check-iso", action="store_true", help="check the edge-replacement isomorphism")
    p.add_argument("--kappa", type=int, default=2)

    p = sub.add_parser("family", parents=[common, modes], help="iterate the product; optionally sweep an embedding")
    p.add_argument("--w", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--embedding", choices=EMBEDDINGS, help="report distortion for k = 1..K")
    p.add_argument("--kappa", type=int, default=2)
    p.add_argument("--pairs", default="all")

    p = sub.add_parser("pw", parents=[common], help="p_W under both index conventions")
    p.add_argument("--w", required=True)
    return parser


# -- subcommands -----------------------------------------------------------


def _graph(args: argparse.Namespace) -> tuple[Any, int]:
    code = parse_code(args.w)
    g = materialize(code, args.kappa, args.limit)
    if args.format == "json":
        return {
            "code": format_code(code),
            "kappa": args.kappa,
            "vertices": [format_vertex(v) for v in g.vertices],
            "edges": [[format_vertex(a), format_vertex(b)] for a, b in g.edges()],
        }, OK
    return g.dump(), OK


def _dist(args: argparse.Namespace) -> tuple[Any, int]:
    code = parse_code(args.w)
    u, v = parse_vertex(args.u), parse_vertex(args.v)
    d = dist_formula(code, u, v)
    out: dict[str, Any] = {"formula": d}
    status = OK
    if args.bfs:
        kappa = args.kappa or max(2, 1 + max((*u.address, *v.address), default=0))
        out["bfs"] = dist_bfs(materialize(code, kappa, args.limit), u, v)
        status = OK if out["bfs"] == d else FAILED
    if args.format == "json":
        return out, status
    return "\n".join([str(d)] + ([f"bfs {out['bfs']}"] if args.bfs else [])), status


def _embed(args: argparse.Namespace) -> tuple[Any, int]:
    code = parse_code(args.w)
    rows: list[dict[str, Any]] = []
    if args.embedding == "linf":
        g = materialize(code, args.kappa, args.limit)
        for v in g.vertices:
            coeffs = psi_linf(code, v)
            rows.append({"vertex": format_vertex(v), "coefficients": {format_address(a): c for a, c in coeffs.items()}})
    elif args.embedding == "l1":
        emb = build_l1(code, args.kappa, args.scale_mode, args.limit)
        for v in emb.vertices:
            summary = psi_l1_summary(emb, v)
            rows.append(
                {
                    "vertex": format_vertex(v),
                    "measure": str(summary["measure"]),
                    "levels": [str(q) for q in summary["levels"]],  # type: ignore[attr-defined]
                }
            )
    else:
        esa = build_esa(code, args.kappa, args.convention)
        for v in esa.vertices:
            vec = psi_esa(esa, v)
            rows.append(
                {
                    "vertex": format_vertex(v),
                    "plus": [n for n, s in vec.entries if s > 0],
                    "minus": [n for n, s in vec.entries if s < 0],
                    "scale": str(vec.scale),
                }
            )
    if args.format == "json":
        return {"code": format_code(code), "kappa": args.kappa, "embedding": args.embedding, "vertices": rows}, OK
    lines = []
    for row in rows:
        rest = {k: val for k, val in row.items() if k != "vertex"}
        lines.append(row["vertex"] + "  " + json.dumps(rest, separators=(",", ":")))
    return "\n".join(lines), OK


def _verify(args: argparse.Namespace) -> tuple[Any, int]:
    code = parse_code(args.w)
    policy = PairPolicy.parse(args.pairs)
    start = time.perf_counter()
    rep = evaluate(
        args.embedding,
        code,
        args.kappa,
        policy,
        scale_mode=args.scale_mode,
        index_convention=args.convention,
        limit=args.limit,
    )
    status = OK if rep.passed else FAILED
    data = report_to_dict(rep)
    if args.format == "csv":
        row = _csv_row(data, 1, len(materialize(code, args.kappa, args.limit)), time.perf_counter() - start)
        return _csv([row]), status
    if args.format == "json":
        return data, status
    lines = [
        f"{rep.embedding} on {rep.code} (kappa {rep.kappa}): {rep.pairs} pairs",
        f"c1 {data['c1_exact']}  c2 {data['c2_exact']}",
        f"distortion {data['distortion_exact']}  bound {data['bound_exact']}",
        f"comparable equality {rep.comparable_equality}",
    ]
    lines += [f"{k} {val}" for k, val in rep.checks.items()]
    if rep.first_violation:
        lines.append(f"first violation: {rep.first_violation}")
    lines.append("PASS" if rep.passed else "FAIL")
    return "\n".join(lines), status


def _suite(args: argparse.Namespace) -> tuple[Any, int]:
    kappas = tuple(args.kappa or (2, 3))
    if args.codes is not None:
        corpus = Corpus.of([c for c in args.codes.split(";") if c.strip()], kappas)
    else:
        corpus = Corpus.enumerate(args.max_height, args.max_depth, kappas)
    names = [s.strip() for s in args.suites.split(",") if s.strip()]
    summary = run_suite(corpus, names, axiom_trials=args.axiom_trials, seed=args.seed)
    if args.format == "json":
        return summary.to_dict(), summary.exit_status
    lines = []
    for r in summary.results:
        flag = "vacuous" if r.vacuous else ("pass" if r.passed else "FAIL")
        line = f"{r.suite}: {flag} ({r.cases} cases, {r.failures} failures)"
        if r.notes:
            line += " " + ", ".join(f"{k}={v}" for k, v in sorted(r.notes.items()))
        lines.append(line)
        if r.first_failure:
            lines.append(f"  first failure: {r.first_failure}")
    return "\n".join(lines), summary.exit_status


def _oslash(args: argparse.Namespace) -> tuple[Any, int]:
    w, wp = parse_code(args.w), parse_code(args.w2)
    out = oslash(w, wp) if args.n is None else oslash_n(w, wp, args.n)
    data: dict[str, Any] = {"code": format_code(out)}
    status = OK
    if args.check_iso:
        res = check_isomorphism(w, wp, args.kappa, args.n)
        data["isomorphism"] = res.ok
        if not res.ok:
            data["diagnostic"] = res.message
            status = FAILED
    if args.format == "json":
        return data, status
    lines = [data["code"]]
    if args.check_iso:
        lines.append("isomorphism ok" if data["isomorphism"] else f"isomorphism FAILED: {data['diagnostic']}")
    return "\n".join(lines), status


def _family(args: argparse.Namespace) -> tuple[Any, int]:
    w = parse_code(args.w)
    if args.embedding is None:
        code = format_code(family(w, args.k))
        return ({"code": code, "k": args.k} if args.format == "json" else code), OK
    rows = []
    reports = []
    status = OK
    for k in range(1, args.k + 1):
        code = family(w, k)
        start = time.perf_counter()
        rep = evaluate(
            args.embedding,
            code,
            args.kappa,
            args.pairs,
            scale_mode=args.scale_mode,
            index_convention=args.convention,
            limit=args.limit,
        )
        data = report_to_dict(rep)
        vertices = len(materialize(code, args.kappa, args.limit))
        rows.append(_csv_row(data, k, vertices, time.perf_counter() - start))
        reports.append(data)
        status = status if rep.passed else FAILED
    if args.format == "json":
        return {"reports": reports}, status
    return _csv(rows), status


def _csv_row(data: dict[str, Any], k: int, vertices: int, seconds: float) -> dict[str, Any]:
    return {
        "code": data["code"],
        "kappa": data["kappa"],
        "k": k,
        "embedding": data["embedding"],
        "distortion_exact": data["distortion_exact"],
        "bound_exact": data["bound_exact"],
        "vertices": vertices,
        "seconds": f"{seconds:.3f}",
    }


def _csv(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _pw(args: argparse.Namespace) -> tuple[Any, int]:
    code = parse_code(args.w)
    values = {conv: p_param(code, conv) for conv in CONVENTIONS}
    if args.format == "json":
        return {"code": format_code(code), **values}, OK
    return "\n".join(f"{conv} {p}" for conv, p in values.items()), OK


COMMANDS = {
    "graph": _graph,
    "dist": _dist,
    "embed": _embed,
    "verify": _verify,
    "suite": _suite,
    "oslash": _oslash,
    "family": _family,
    "pw": _pw,
}


# -- entry point -----------------------------------------------------------


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _error(kind: str, message: str, as_json: bool) -> int:
    if as_json:
        sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    else:
        sys.stderr.write(f"error: {message}\n")
    return USAGE


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    as_json = "--json-errors" in argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _error("usage", str(exc), as_json)
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    if args.format == "csv" and args.command not in ("verify", "family"):
        return _error("usage", "--format csv is only available for verify and family", as_json)
    start = time.perf_counter()
    try:
        payload, status = COMMANDS[args.command](args)
    except ConstructionError as exc:
        if as_json:
            sys.stderr.write(json.dumps({"error": "construction", "message": str(exc)}) + "\n")
        else:
            sys.stderr.write(f"construction failed: {exc}\n")
        return FAILED
    except ValueError as exc:
        return _error(type(exc).__name__, str(exc), as_json)
    if isinstance(payload, dict):
        payload["meta"] = {
            "tool": "bundlegraphs",
            "version": __version__,
            "command": args.command,
            "seconds": round(time.perf_counter() - start, 6),
        }
        text = json.dumps(payload, indent=2, ensure_ascii=False)
    else:
        text = payload
    _emit(text + "\n", args.out)
    return status


if __name__ == "__main__":
    sys.exit(main())
