"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 resource bound, 3 theorem-check failure.
Payloads go to stdout and are deterministic; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from . import corpus as corpus_mod
from .extensions import ExtensionError, ExtensionSpec, analyze_extension, build_extension
from .gerbes import GerbeError, PicModel, add_classes, class_group, equivariant_twist, kummer_class
from .graphs import GraphError, ResourceBoundExceeded, WeightVector, component_descriptor, enumerate_graphs
from .groups import GroupError
from .lattice import IntMatrix, LatticeError, smith_normal_form, torus_kernel
from .theorem import PreconditionError, QuotientCase, TheoremReport, verify_main_theorem

log = logging.getLogger("fixedloci")

EXIT_OK, EXIT_INPUT, EXIT_BOUND, EXIT_THEOREM = 0, 1, 2, 3
INPUT_ERRORS = (LatticeError, GroupError, ExtensionError, GraphError, GerbeError)


class InputError(ValueError):
    pass


def dumps(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _md_table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def _csv_table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _table(fmt: str, header, rows) -> str:
    return _csv_table(header, rows) if fmt == "csv" else _md_table(header, rows)


def _matrix(text: str) -> IntMatrix:
    try:
        return IntMatrix.parse(text)
    except LatticeError as exc:
        raise InputError(f"field 'matrix': {exc}") from None


# ---------------------------------------------------------------- commands


def cmd_snf(args) -> tuple[int, str]:
    A = _matrix(args.matrix)
    snf = smith_normal_form(A)
    payload = {
        "matrix": str(A),
        "U": str(snf.U),
        "D": str(snf.D),
        "V": str(snf.V),
        "factors": list(snf.factors),
    }
    if args.format == "json":
        return EXIT_OK, dumps(payload)
    rows = [(k, payload[k] if k != "factors" else ",".join(map(str, snf.factors))) for k in ("U", "D", "V", "factors")]
    return EXIT_OK, _table(args.format, ("field", "value"), rows)


def cmd_torus_kernel(args) -> tuple[int, str]:
    A = _matrix(args.matrix)
    try:
        K = torus_kernel(A)
    except LatticeError as exc:
        raise InputError(f"field 'matrix': {exc}") from None
    if args.format == "json":
        return EXIT_OK, dumps({"matrix": str(A), "kernel": K.as_mu(), "invariants": list(K.torsion.moduli)})
    if args.format == "csv":
        return EXIT_OK, _csv_table(("matrix", "kernel"), [(str(A), K.as_mu())])
    return EXIT_OK, K.as_mu() + "\n"


def _read_json(path: str, field: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"field {field!r}: cannot read {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"field {field!r}: invalid JSON in {path!r}: {exc.msg}") from None


def cmd_extension(args) -> tuple[int, str]:
    if args.spec:
        data = _read_json(args.spec, "spec")
        if not isinstance(data, dict):
            raise InputError("field 'spec': expected a JSON object")
    else:
        if args.group is None or args.r is None or args.M is None:
            raise InputError("field 'spec': give --spec FILE or all of --group, --r and --M")
        try:
            data = {"group": args.group, "r": [int(x) for x in args.r.split(",")], "M": args.M}
            if args.iota is not None:
                data["iota"] = [int(x) for x in args.iota.split(",")]
        except ValueError:
            raise InputError("field 'r'/'iota': expected comma-separated integers") from None
    spec = ExtensionSpec.from_json(data)
    report = analyze_extension(build_extension(spec))
    payload = report.to_json()
    if args.format == "json":
        return EXIT_OK, dumps(payload)
    rows = [(k, payload[k]) for k in sorted(payload)]
    return EXIT_OK, _table(args.format, ("field", "value"), rows)


def _run_case(raw: dict) -> dict:
    """Evaluate one corpus case; precondition failures are reported, not raised."""
    case = QuotientCase.from_json(raw, default_name=str(raw.get("name", "case")))
    try:
        return {"status": "ok", "report": verify_main_theorem(case).to_json()}
    except PreconditionError as exc:
        return {"status": "rejected", "name": case.name, "condition": exc.condition, "reason": str(exc)}


def run_corpus(cases: list[dict], jobs: int = 1) -> dict:
    """Aggregate per-case results with counts per check; case order is preserved."""
    named = [dict(c, name=c.get("name", f"case{i}")) for i, c in enumerate(cases)]
    # parse everything up front so malformed input fails before any work
    for c in named:
        QuotientCase.from_json(c)
    if jobs > 1 and len(named) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_case, named))
    else:
        results = [_run_case(c) for c in named]
    per_check = {c: {"pass": 0, "fail": 0} for c in TheoremReport.CHECKS}
    passed = failed = rejected = 0
    for res in results:
        if res["status"] == "rejected":
            rejected += 1
            continue
        rep = res["report"]
        for c in TheoremReport.CHECKS:
            per_check[c]["pass" if rep[c] else "fail"] += 1
        if rep["passed"]:
            passed += 1
        else:
            failed += 1
    summary = {"total": len(results), "passed": passed, "failed": failed, "rejected": rejected,
               "per_check": per_check}
    return {"summary": summary, "cases": results}


def cmd_verify_theorem(args) -> tuple[int, str]:
    if args.corpus:
        cases = corpus_mod.load_corpus(args.corpus)
    elif args.seed == corpus_mod.DEFAULT_SEED:
        cases = corpus_mod.bundled_corpus()
    else:
        cases = corpus_mod.generate_corpus(args.seed)
    if args.dump_corpus:
        return EXIT_OK, corpus_mod.dump_corpus(cases, None if args.corpus else args.seed)
    result = run_corpus(cases, jobs=args.jobs)
    code = EXIT_THEOREM if result["summary"]["failed"] else EXIT_OK
    if args.format == "json":
        return code, dumps(result)
    header = ("case", "r", "Y") + tuple(c.removesuffix("_ok") for c in TheoremReport.CHECKS) + ("status",)
    rows = []
    for res in result["cases"]:
        if res["status"] == "rejected":
            rows.append((res["name"], "", "") + ("",) * len(TheoremReport.CHECKS)
                        + (f"rejected ({res['condition']})",))
            continue
        rep = res["report"]
        rows.append((rep["name"], ",".join(map(str, rep["r"])), rep["Y"])
                    + tuple("pass" if rep[c] else "FAIL" for c in TheoremReport.CHECKS)
                    + ("pass" if rep["passed"] else "FAIL",))
    out = _table(args.format, header, rows)
    s = result["summary"]
    if args.format == "md":
        out += f"\n{s['total']} cases: {s['passed']} passed, {s['failed']} failed, {s['rejected']} rejected\n"
    return code, out


GRAPH_COLUMNS = ("graph", "r", "aut_order", "deck_order", "A_order", "moduli_factors", "unstable_vertices")


def cmd_gp_graphs(args) -> tuple[int, str]:
    weights = WeightVector.parse(args.weights) if args.weights else None
    if weights is not None and len(weights) != args.N + 1:
        raise InputError(f"field 'weights': need N+1 = {args.N + 1} weights, got {len(weights)}")
    if args.cap is not None and args.cap <= 0:
        raise InputError("field 'cap': must be positive")
    graphs = enumerate_graphs(args.g, args.n, args.N, args.d, cap=args.cap)
    reports = [component_descriptor(G, weights) for G in graphs]
    if args.format == "json":
        return EXIT_OK, dumps([rep.to_json() for rep in reports])
    rows = [
        (rep.graph.describe(), "" if rep.r is None else rep.r, rep.aut_order, rep.deck_order, rep.A_order,
         " ".join(f"M{g},{k}" for g, k in rep.moduli_factors), ",".join(map(str, rep.unstable_vertices)))
        for rep in reports
    ]
    return EXIT_OK, _table(args.format, GRAPH_COLUMNS, rows)


def _coords(text: str, field: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise InputError(f"field {field!r}: expected comma-separated integers, got {text!r}") from None


def _base(args) -> PicModel:
    labels = args.labels.split(",") if args.labels else None
    return PicModel.parse(args.pic, labels)


def _emit_class(args, c, extra: dict | None = None) -> tuple[int, str]:
    payload = c.to_json()
    payload["class"] = str(c)
    if extra:
        payload.update(extra)
    if args.format == "json":
        return EXIT_OK, dumps(payload)
    if args.format == "csv":
        return EXIT_OK, _csv_table(("pic", "r", "class", "trivial"), [(payload["pic"], c.r, str(c), payload["trivial"])])
    return EXIT_OK, str(c) + "\n"


def cmd_gerbe_kummer(args) -> tuple[int, str]:
    if args.r < 1:
        raise InputError("field 'r': must be >= 1")
    base = _base(args)
    c = kummer_class(base, _coords(args.L, "L"), args.r)
    if args.twist is not None:
        c = equivariant_twist(c, args.twist)
    return _emit_class(args, c, {"class_group": str(class_group(c.base, c.r))})


def cmd_gerbe_add(args) -> tuple[int, str]:
    if args.r < 1:
        raise InputError("field 'r': must be >= 1")
    base = _base(args)
    c = add_classes(kummer_class(base, _coords(args.a, "a"), args.r), kummer_class(base, _coords(args.b, "b"), args.r))
    return _emit_class(args, c)


# ---------------------------------------------------------------- parser


def _format_arg(p, default="md"):
    p.add_argument("--format", choices=("json", "csv", "md"), default=default)


def _graph_args(p):
    p.add_argument("--g", type=int, required=True, help="arithmetic genus")
    p.add_argument("--n", type=int, required=True, help="number of marked points")
    p.add_argument("--N", type=int, required=True, help="target P^N")
    p.add_argument("--d", type=int, required=True, help="degree")
    p.add_argument("--weights", help="torus weights a_0,...,a_N (pairwise distinct)")
    p.add_argument("--cap", type=int, help="enumeration cap (default: FIXEDLOCI_CAP or built-in)")
    _format_arg(p, "json")
    p.set_defaults(func=cmd_gp_graphs)


def _gerbe_args(sub):
    k = sub.add_parser("kummer", help="class of a line bundle in H^2(-, mu_r)")
    k.add_argument("--pic", required=True, help='Picard group, e.g. "Z" or "Z x Z/2"')
    k.add_argument("--L", required=True, help="line bundle coordinates, comma-separated")
    k.add_argument("--r", type=int, required=True)
    k.add_argument("--twist", type=int, help="append the weight-w character of BGm")
    k.add_argument("--labels", help="comma-separated generator names")
    _format_arg(k)
    k.set_defaults(func=cmd_gerbe_kummer)
    a = sub.add_parser("add", help="sum of two Kummer classes (contracted product)")
    a.add_argument("--pic", required=True)
    a.add_argument("--a", required=True)
    a.add_argument("--b", required=True)
    a.add_argument("--r", type=int, required=True)
    a.add_argument("--labels")
    _format_arg(a)
    a.set_defaults(func=cmd_gerbe_add)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fixedloci", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("snf", help="Smith normal form U A V = D")
    p.add_argument("--matrix", required=True, help='rows separated by ";", e.g. "2,1;0,3"')
    _format_arg(p)
    p.set_defaults(func=cmd_snf)

    p = sub.add_parser("torus-kernel", help="kernel of the isogeny of tori given by a cocharacter matrix")
    p.add_argument("--matrix", required=True)
    _format_arg(p)
    p.set_defaults(func=cmd_torus_kernel)

    p = sub.add_parser("extension", help="build and analyse Gamma_M from pushout data")
    p.add_argument("--spec", help="ExtensionSpec JSON file")
    p.add_argument("--group")
    p.add_argument("--r", help="comma-separated divisor chain")
    p.add_argument("--iota", help="comma-separated images of the elements of mu_r")
    p.add_argument("--M", type=int)
    _format_arg(p, "json")
    p.set_defaults(func=cmd_extension)

    p = sub.add_parser("verify-theorem", help="run the finite verification over a case corpus")
    p.add_argument("--corpus", help="corpus JSON (default: bundled corpus)")
    p.add_argument("--seed", type=int, default=corpus_mod.DEFAULT_SEED,
                   help="seed for the generated corpus when --corpus is absent")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--dump-corpus", action="store_true", help="print the corpus instead of running it")
    _format_arg(p)
    p.set_defaults(func=cmd_verify_theorem)

    _graph_args(sub.add_parser("gp-graphs", help="torus-fixed loci of stable maps to P^N"))

    p = sub.add_parser("gerbe", help="mu_r-gerbe class ledger")
    _gerbe_args(p.add_subparsers(dest="gerbe_command", required=True))
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        code, out = args.func(args)
    except (InputError, *INPUT_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceBoundExceeded as exc:
        print(f"resource bound: {exc}", file=sys.stderr)
        return EXIT_BOUND
    sys.stdout.write(out)
    return code


def gp_graphs_main(argv: Sequence[str] | None = None) -> int:
    return main(["gp-graphs", *(sys.argv[1:] if argv is None else argv)])


def gerbe_main(argv: Sequence[str] | None = None) -> int:
    return main(["gerbe", *(sys.argv[1:] if argv is None else argv)])


if __name__ == "__main__":
    sys.exit(main())
