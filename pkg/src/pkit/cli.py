"""Command-line front end: ``pkit check | dual | walls | bar``.

Exit codes: 0 certified (or success), 2 inconclusive, 1 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from . import barhom, protoperad, quadalg
from .exactq import row_space_equal
from .walls import enum_walls

SCHEMA = "pkit/1"
EXIT_OK, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    input: str | None
    max_arity: int = 5
    bar_cross_check_arity: int = 3
    hilbert_degree: int = 6
    order_search_budget: int = 8
    output: str | None = None
    format: str = "json"

    def __post_init__(self):
        if not 2 <= self.bar_cross_check_arity <= self.max_arity:
            raise InputError("need 2 <= --bar-arity <= --max-arity")
        if self.hilbert_degree < 2:
            raise InputError("--hilbert-degree must be at least 2")
        if self.order_search_budget < 0:
            raise InputError("--orders must be non-negative")


def worker_count() -> int:
    raw = os.environ.get("PKIT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"PKIT_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise InputError("PKIT_THREADS must be a positive integer")
    return min(n, os.cpu_count() or 1)


def _load_json(path: str | None) -> dict:
    if path is None:
        path = str(Path(protoperad.__file__).with_name("data") / "dlie.json")
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: top level must be an object")
    if data.get("schema", SCHEMA) != SCHEMA:
        raise InputError(f"{path}: schema: unsupported value {data['schema']!r}")
    return data


def _is_algebra(data: Mapping) -> bool:
    return data.get("kind") == "algebra" or "relations" in data


def _load_protoperad(data: Mapping) -> protoperad.BinaryQuadraticProtoperad:
    if data.get("kind", "protoperad") != "protoperad":
        raise InputError(f"kind: expected 'protoperad', got {data['kind']!r}")
    try:
        return protoperad.BinaryQuadraticProtoperad.from_json(data)
    except quadalg.PresentationError as exc:
        raise InputError(str(exc)) from None
    except (TypeError, KeyError, AttributeError) as exc:
        raise InputError(f"malformed presentation: {exc}") from None


def _load_algebra(data: Mapping) -> tuple[quadalg.QuadraticAlgebra, quadalg.MonomialOrder | None]:
    if "generators" not in data:
        raise InputError("generators: missing")
    try:
        a = quadalg.QuadraticAlgebra.from_json(data)
    except quadalg.PresentationError as exc:
        raise InputError(str(exc)) from None
    except (TypeError, KeyError, AttributeError) as exc:
        raise InputError(f"malformed presentation: {exc}") from None
    order = None
    if "order" in data:
        names = data["order"]
        index = {g: i for i, g in enumerate(a.generators)}
        if not isinstance(names, list) or sorted(names) != sorted(a.generators):
            raise InputError("order: must list every generator exactly once, smallest first")
        order = quadalg.MonomialOrder.from_sequence([index[x] for x in names])
    return a, order


# ---- serialisation of results -----------------------------------------------


def _coeff(c: Fraction) -> str:
    return str(c)


def _comb_json(a: quadalg.QuadraticAlgebra, comb: Mapping) -> list:
    return [{"word": [a.generators[x] for x in w], "coeff": _coeff(c)} for w, c in sorted(comb.items())]


def _comb_text(a: quadalg.QuadraticAlgebra, comb: Mapping) -> str:
    if not comb:
        return "0"
    parts = []
    for w, c in sorted(comb.items()):
        mag = abs(c)
        sign = "-" if c < 0 else "+"
        body = a.format_word(w) if mag == 1 else f"{mag} {a.format_word(w)}"
        parts.append((sign, body))
    text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


def attempt_json(a: quadalg.QuadraticAlgebra, att: quadalg.OrderAttempt) -> dict:
    rs = att.rules
    return {
        "order": [a.generators[i] for i in att.order.increasing()],
        "rules": [{"lhs": [a.generators[x] for x in lhs], "rhs": _comb_json(a, rhs)}
                  for lhs, rhs in sorted(rs.rules.items(), key=lambda t: rs.order.key(t[0]))],
        "critical_monomials": att.report.critical_count,
        "confluent": att.report.confluent,
        "failures": [
            {"monomial": [a.generators[x] for x in f.monomial],
             "normal_forms": [_comb_json(a, nf) for nf in f.normal_forms],
             "traces": [[_comb_json(a, step) for step in tr] for tr in f.traces]}
            for f in att.report.failures
        ],
    }


def certificate_json(cert: quadalg.Certificate) -> dict:
    a = cert.algebra
    return {
        "status": cert.status,
        "generators": list(a.generators),
        "orders_tried": len(cert.attempts),
        "witness": attempt_json(a, cert.best()),
    }


def verdict_json(v: protoperad.KoszulVerdict, cfg: RunConfig) -> dict:
    arities = []
    for r in v.results:
        entry = {
            "n": r.n,
            "via": r.via,
            "algebra": certificate_json(r.certificate),
            "dual": certificate_json(r.dual_certificate) if r.dual_certificate else None,
            "hilbert": r.hilbert,
            "homology": r.homology,
            "cross_checks_passed": r.cross_checks_passed,
        }
        arities.append(entry)
    return {
        "schema": SCHEMA,
        "command": "check",
        "status": v.label(),
        "config": {"max_arity": cfg.max_arity, "bar_arity": cfg.bar_cross_check_arity,
                   "hilbert_degree": cfg.hilbert_degree, "orders": cfg.order_search_budget},
        "conventions": {"dual_generator_symmetry": "unchanged", "pairing": "dot product on the wall basis"},
        "arities": arities,
    }


def _columns(left: Sequence[str], right: Sequence[str], gap: int = 4) -> list[str]:
    width = max((len(s) for s in left), default=0)
    rows = max(len(left), len(right))
    out = []
    for i in range(rows):
        lt = left[i] if i < len(left) else ""
        rt = right[i] if i < len(right) else ""
        out.append(f"{lt.ljust(width)}{' ' * gap}{rt}".rstrip())
    return out


def attempt_text(a: quadalg.QuadraticAlgebra, att: quadalg.OrderAttempt, indent: str = "  ") -> list[str]:
    lines = [f"{indent}order: " + " < ".join(a.generators[i] for i in att.order.increasing())]
    for lhs, rhs in sorted(att.rules.rules.items(), key=lambda t: att.rules.order.key(t[0])):
        lines.append(f"{indent}  {a.format_word(lhs)} ~> {_comb_text(a, rhs)}")
    lines.append(f"{indent}critical monomials: {att.report.critical_count}, "
                 f"confluent: {'yes' if att.report.confluent else 'no'}")
    for f in att.report.failures:
        lines.append(f"{indent}not confluent at {a.format_word(f.monomial)}:")
        left = [_comb_text(a, s) for s in f.traces[0]]
        right = [_comb_text(a, s) for s in f.traces[1]]
        lines.extend(indent + "  " + row for row in _columns(["left first"] + left, ["right first"] + right))
        lines.append(f"{indent}  normal forms: " + " | ".join(_comb_text(a, nf) for nf in f.normal_forms))
    return lines


def verdict_text(v: protoperad.KoszulVerdict) -> str:
    lines = [v.label()]
    for r in v.results:
        a = r.certificate.algebra
        lines.append(f"arity {r.n}: {len(a.generators)} generators, certified via {r.via}")
        lines.extend(attempt_text(a, r.certificate.best()))
        if r.hilbert:
            lines.append(f"  hilbert: {r.hilbert['algebra']} / dual {r.hilbert['dual']}, "
                         f"identity {'holds' if r.hilbert['identity_holds'] else 'FAILS'}")
        for row in r.homology or ():
            lines.append(f"  bar weight {row['weight']}: {row['homology']}"
                         f"{'' if row['concentrated'] else '  NOT concentrated'}")
    return "\n".join(lines) + "\n"


def _emit(payload, text: str | None, cfg_format: str, out: str | None) -> None:
    body = text if cfg_format == "text" and text is not None else json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(body)
    else:
        sys.stdout.write(body)


# ---- commands ---------------------------------------------------------------


def cmd_check(cfg: RunConfig) -> int:
    data = _load_json(cfg.input)
    if _is_algebra(data):
        a, order = _load_algebra(data)
        if order is not None:
            orders = [order]
        else:
            orders = quadalg.candidate_orders(quadalg.MonomialOrder.identity(a.ngens), cfg.order_search_budget)
        cert = quadalg.certify_koszul(a, orders)
        payload = {"schema": SCHEMA, "command": "check", "status": cert.status,
                   "algebra": certificate_json(cert)}
        text = cert.status + "\n" + "\n".join(attempt_text(a, cert.best())) + "\n"
        _emit(payload, text, cfg.format, cfg.output)
        return EXIT_OK if cert.certified else EXIT_INCONCLUSIVE
    p = _load_protoperad(data)
    v = protoperad.check_koszul(p, cfg.max_arity, cfg.bar_cross_check_arity, cfg.hilbert_degree,
                                cfg.order_search_budget, workers=worker_count())
    _emit(verdict_json(v, cfg), verdict_text(v), cfg.format, cfg.output)
    return EXIT_OK if v.certified else EXIT_INCONCLUSIVE


def _algebra_json(a: quadalg.QuadraticAlgebra) -> dict:
    out = a.to_json()
    out.update({"schema": SCHEMA, "kind": "algebra"})
    return out


def cmd_dual(input_path: str | None, algebra: str | None, fmt: str, out: str | None) -> int:
    data = _load_json(input_path)
    if algebra is not None:
        key, _, value = algebra.partition("=")
        if key != "n" or not value.isdigit() or int(value) < 2:
            raise InputError("--algebra expects n=<arity>, arity at least 2")
        n = int(value)
        p = _load_protoperad(data)
        w = quadalg.quadratic_dual(protoperad.build_algebra(p, n))
        rs = quadalg.derive_rewrite_system(w, protoperad.default_order(w))
        payload = _algebra_json(w)
        payload["order"] = list(w.generators)
        rules = [f"{w.format_word(lhs)} ~> {_comb_text(w, rhs)}"
                 for lhs, rhs in sorted(rs.rules.items(), key=lambda t: rs.order.key(t[0]))]
        _emit(payload, "\n".join(rules) + "\n", fmt, out)
        return EXIT_OK
    if _is_algebra(data):
        a, _ = _load_algebra(data)
        d = quadalg.quadratic_dual(a)
        back = quadalg.quadratic_dual(d)
        same = row_space_equal(back.relations, a.relations)
        print(f"dual relation dimension {d.relation_dim}; double dual equal: {str(same).lower()}", file=sys.stderr)
        _emit(_algebra_json(d), None, "json", out)
        return EXIT_OK
    p = _load_protoperad(data)
    d = protoperad.dual_presentation(p)
    back = protoperad.dual_presentation(d)
    same = all(row_space_equal(back.relation_space(k), p.relation_space(k)) for k in (2, 3))
    print(f"dual relation dimensions: arity 2 = {d.relation_dim(2)}, arity 3 = {d.relation_dim(3)}; "
          f"double dual equal: {str(same).lower()}", file=sys.stderr)
    _emit(d.to_json(), None, "json", out)
    return EXIT_OK


def cmd_walls(n: int, bricks: int, sizes: Sequence[int], fmt: str, out: str | None) -> int:
    if n < 1 or bricks < 1:
        raise InputError("n and bricks must be positive")
    ws = enum_walls(n, bricks, set(sizes))
    payload = {"schema": SCHEMA, "command": "walls", "n": n, "bricks": bricks, "sizes": sorted(set(sizes)),
               "count": len(ws), "walls": [w.to_json() for w in ws]}
    text = f"count {len(ws)}\n" + "".join(json.dumps(w.to_json(), sort_keys=True) + "\n" for w in ws)
    _emit(payload, text, fmt, out)
    return EXIT_OK


def cmd_bar(input_path: str | None, n: int, weight: int, fmt: str, out: str | None, max_weight: int = 6) -> int:
    if n < 2 or weight < 1:
        raise InputError("need n >= 2 and weight >= 1")
    if weight > max_weight:
        raise InputError(f"weight {weight} exceeds the truncation bound {max_weight}")
    p = _load_protoperad(_load_json(input_path))
    a = protoperad.build_algebra(p, n)
    comp = protoperad.Components(p)
    try:
        conn = barhom.homology_ranks(barhom.connected_bar_component(a, weight, n))
    except barhom.DimensionsUnavailable as exc:
        raise InputError(str(exc)) from None
    norm = barhom.homology_ranks(barhom.normalized_bar_complex(p, n, weight, comp, max_weight))
    agree = conn.by_degree(weight) == norm.by_degree(weight)
    payload = {"schema": SCHEMA, "command": "bar", "n": n, "weight": weight,
               "connected_bar": conn.table(n), "normalized_bar": norm.table(n), "agreement": agree}
    lines = [f"n={n} weight={weight}", "degree  connected  normalized"]
    cd, nd = conn.by_degree(weight), norm.by_degree(weight)
    for d in sorted(set(cd) | set(nd)):
        lines.append(f"{d:>6}  {cd.get(d, 0):>9}  {nd.get(d, 0):>10}")
    lines.append(f"agreement: {str(agree).lower()}")
    _emit(payload, "\n".join(lines) + "\n", fmt, out)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors; exit status 2 is reserved for inconclusive runs
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pkit", description="Koszulness checks for binary quadratic protoperads")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=("json", "text"), default="json")

    c = sub.add_parser("check", help="certify A(P, n) through an arity, or a single quadratic algebra")
    c.add_argument("input", nargs="?", help="presentation file (default: the shipped double Lie file)")
    c.add_argument("--max-arity", type=int, default=5)
    c.add_argument("--bar-arity", type=int, default=3)
    c.add_argument("--hilbert-degree", type=int, default=6)
    c.add_argument("--orders", type=int, default=8, help="number of extra monomial orders to try")
    common(c)

    d = sub.add_parser("dual", help="Koszul dual presentation")
    d.add_argument("input", nargs="?", help="presentation file (default: the shipped double Lie file)")
    d.add_argument("--algebra", metavar="n=N", help="emit the dual of A(P, N) instead")
    common(d)

    w = sub.add_parser("walls", help="list connected walls")
    w.add_argument("n", type=int)
    w.add_argument("bricks", type=int)
    w.add_argument("--sizes", type=int, nargs="+", default=[2])
    common(w)

    b = sub.add_parser("bar", help="homology of the connected bar and normalized bar complexes")
    b.add_argument("input", nargs="?", help="presentation file (default: the shipped double Lie file)")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--weight", type=int, required=True)
    common(b)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            cfg = RunConfig(args.input, args.max_arity, args.bar_arity, args.hilbert_degree, args.orders,
                            args.out, args.format)
            return cmd_check(cfg)
        if args.command == "dual":
            return cmd_dual(args.input, args.algebra, args.format, args.out)
        if args.command == "walls":
            return cmd_walls(args.n, args.bricks, args.sizes, args.format, args.out)
        return cmd_bar(args.input, args.n, args.weight, args.format, args.out)
    except InputError as exc:
        print(f"pkit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
