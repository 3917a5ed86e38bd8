"""Command-line interface.

Subcommands: validate | eval | props | surgery | roundtrip.  JSON is the
source format for systems; reports are printed as text or JSON and, when an
output directory is given, also written as delimited CSV with matplotlib
figures and DOT files alongside.

Exit codes: 0 success, 1 property failure, 2 input error, 3 resource limit.
"""

import argparse
import csv
import json
import pathlib
import re
import sys

from .errors import (
    BadCoordinate,
    InvalidSystem,
    NoValidStep,
    NotChainUp,
    ParseError,
    PreconditionViolated,
    RefmonError,
    ResourceLimit,
    UnknownElement,
)
from .monoid import Monoid
from .posets import ChainTree, id_sort_key
from .props import run_props
from .surgery import collapse_sequence, verify_pushout
from .systems import parse_system

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3

_TOKEN = re.compile(r"\s*([A-Za-z0-9_*.]+|\(|\)|\+|,|-?\d+|\{)")


class _ExprParser:
    """Sums of generator terms: `p`, `j(2,1)`, `0`, `x + y`, `(x + y)`.

    A bare id is the unit there (level 1 at a free index, the group zero at
    a regular one); a coordinate list gives the unit level first at free
    indices, then the group coordinates.  A `{...}` literal is parsed as
    the JSON element format.
    """

    def __init__(self, monoid, text):
        self.m = monoid
        self.text = text
        self.pos = 0

    def error(self, msg):
        raise ParseError(f"element expression: {msg} at "
                         f"{self.text[self.pos:self.pos + 20]!r}")

    def peek(self):
        rest = self.text[self.pos:]
        if not rest.strip():
            return None
        if rest.lstrip().startswith("{"):
            return "{"
        mt = _TOKEN.match(self.text, self.pos)
        if not mt:
            self.error("bad token")
        return mt.group(1)

    def take(self):
        tok = self.peek()
        if tok == "{":
            depth = 0
            start = self.text.index("{", self.pos)
            for i in range(start, len(self.text)):
                if self.text[i] == "{":
                    depth += 1
                elif self.text[i] == "}":
                    depth -= 1
                    if depth == 0:
                        self.pos = i + 1
                        return self.text[start:i + 1]
            self.error("unbalanced literal")
        mt = _TOKEN.match(self.text, self.pos)
        self.pos = mt.end()
        return tok

    def parse(self):
        out = self.expr()
        if self.peek() is not None:
            self.error("trailing input")
        return out

    def expr(self):
        acc = self.term()
        while self.peek() == "+":
            self.take()
            acc = self.m.add(acc, self.term())
        return acc

    def term(self):
        tok = self.peek()
        if tok is None:
            self.error("expected a term")
        if tok == "(":
            self.take()
            inner = self.expr()
            if self.peek() != ")":
                self.error("expected )")
            self.take()
            return inner
        if tok == "{":
            literal = self.take()
            return element_from_json(self.m, json.loads(literal))
        if tok == "0" and not self._id_exists("0"):
            self.take()
            return self.m.zero()
        self.take()
        name = tok
        if not self._id_exists(name):
            raise UnknownElement(f"{name!r} is not an element id")
        coords = None
        if self.peek() == "(":
            self.take()
            coords = []
            while True:
                v = self.take()
                try:
                    coords.append(int(v))
                except ValueError:
                    self.error("expected an integer coordinate")
                nxt = self.peek()
                if nxt == ",":
                    self.take()
                    continue
                if nxt == ")":
                    self.take()
                    break
                self.error("expected , or )")
        return self._chi(name, coords)

    def _id_exists(self, name):
        return name in self.m.system.poset.index

    def _chi(self, name, coords):
        g = self.m.system.group(name)
        if self.m.system.kind(name) == "free":
            if coords is None:
                return self.m.chi(name, (1, g.zero()))
            if len(coords) != 1 + g.dim:
                raise BadCoordinate(
                    f"{name!r} takes (unit level, {g.dim} coords)")
            return self.m.chi(name, (coords[0], tuple(coords[1:])))
        if coords is None:
            return self.m.chi(name, g.zero())
        if len(coords) != g.dim:
            raise BadCoordinate(f"{name!r} takes {g.dim} coordinates")
        return self.m.chi(name, tuple(coords))


def element_from_json(monoid, data):
    support = data.get("support", [])
    coords = {}
    for key, val in data.get("coords", {}).items():
        if "n" in val:
            coords[key] = (val["n"], tuple(val.get("g", ())))
        else:
            coords[key] = tuple(val.get("g", ()))
    return monoid.element(support, coords)


def element_to_json(x):
    m = x.monoid
    out = {"support": sorted((str(i) for i in m.system.poset.members(
        x.support)), key=id_sort_key), "coords": {}}
    for name, val in sorted(x.coords().items(),
                            key=lambda kv: id_sort_key(kv[0])):
        if m.system.kind(name) == "free":
            n, g = val
            out["coords"][str(name)] = {"n": n, "g": list(g)}
        else:
            out["coords"][str(name)] = {"g": list(val)}
    return out


def render_element(x, fmt):
    if fmt == "json":
        return json.dumps(element_to_json(x), sort_keys=True)
    if x.is_zero:
        return "0"
    bits = []
    for name, val in sorted(x.coords().items(),
                            key=lambda kv: id_sort_key(kv[0])):
        if x.monoid.system.kind(name) == "free":
            n, g = val
            coord = ",".join(str(v) for v in (n,) + tuple(g))
        else:
            coord = ",".join(str(v) for v in val)
        bits.append(f"{name}({coord})" if coord else f"{name}()")
    return " ".join(bits)


def _load_system(path):
    try:
        text = pathlib.Path(path).read_text()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}")
    return parse_system(text, require_valid=False)


def cmd_validate(args):
    system = _load_system(args.file)
    violations = system.validate()
    if args.format == "json":
        print(json.dumps({"valid": not violations,
                          "violations": violations}, sort_keys=True))
    else:
        if violations:
            for v in violations:
                print(f"violation: {v}")
        else:
            print("valid")
    return EXIT_OK if not violations else EXIT_FAIL


def _parse_elems(monoid, exprs):
    return [_ExprParser(monoid, e).parse() for e in exprs]


def _split_refine_args(args_list):
    joined = " ".join(args_list)
    if ";" in joined:
        rows, cols = joined.split(";", 1)
        x1, x2 = rows.split(",", 1)
        y1, y2 = cols.split(",", 1)
        return [x1, x2, y1, y2]
    return args_list


def cmd_eval(args):
    system = _load_system(args.file)
    bad = system.validate()
    if bad:
        raise InvalidSystem(bad)
    m = Monoid(system, budget=args.budget)
    op = args.op
    fmt = args.format
    if op == "eq":
        x, y = _parse_elems(m, args.args)
        print("true" if m.eq(x, y) else "false")
        return EXIT_OK
    if op == "add":
        x, y = _parse_elems(m, args.args)
        total = m.add(x, y)
        assert m.eq(total, m.add(y, x))
        print(render_element(total, fmt))
        return EXIT_OK
    if op == "leq":
        x, y = _parse_elems(m, args.args)
        z = m.leq(x, y)
        if z is None:
            print("NONE")
        else:
            assert m.eq(m.add(x, z), y)
            print(render_element(z, fmt))
        return EXIT_OK
    if op == "refine":
        parts = _split_refine_args(args.args)
        x1, x2, y1, y2 = _parse_elems(m, parts)
        sq = m.refine(x1, x2, y1, y2)
        assert sq.verify(x1, x2, y1, y2)
        if fmt == "json":
            print(json.dumps({
                "rows": [render_element(x1, "json"), render_element(x2, "json")],
                "cols": [render_element(y1, "json"), render_element(y2, "json")],
                "square": [[element_to_json(sq.z11), element_to_json(sq.z12)],
                           [element_to_json(sq.z21), element_to_json(sq.z22)]],
            }, sort_keys=True))
        else:
            _print_square(m, sq, x1, x2, y1, y2)
        return EXIT_OK
    if op == "primes":
        fams = m.prime_families()
        if fmt == "json":
            print(json.dumps([{"id": str(x), "kind": kind,
                               "rank": g.rank, "torsion": list(g.torsion)}
                              for x, kind, g in fams], sort_keys=True))
        else:
            for x, kind, g in fams:
                level = "unit level 1, " if kind == "free" else ""
                print(f"prime family at {x} ({kind}): {level}group {g!r}")
            if all(g.order() is not None for _, _, g in fams):
                elems = m.enumerate_primes()
                print(f"total primes: {len(elems)}")
                for e in elems:
                    print("  " + render_element(e, "text"))
        return EXIT_OK
    if op == "gens":
        gens = m.generators()
        if fmt == "json":
            print(json.dumps([element_to_json(g) for g in gens],
                             sort_keys=True))
        else:
            for g in gens:
                print(render_element(g, "text"))
        return EXIT_OK
    if op == "classify":
        (x,) = _parse_elems(m, args.args)
        cls = m.classify(x)
        idem = m.is_idempotent(x)
        if fmt == "json":
            print(json.dumps({"class": cls, "idempotent": idem},
                             sort_keys=True))
        else:
            print(f"{cls}" + (" (idempotent)" if idem else ""))
        return EXIT_OK
    raise ParseError(f"unknown eval op {op!r}")


def _print_square(m, sq, x1, x2, y1, y2):
    cells = [[render_element(sq.z11, "text"), render_element(sq.z12, "text")],
             [render_element(sq.z21, "text"), render_element(sq.z22, "text")]]
    top = [render_element(y1, "text"), render_element(y2, "text")]
    side = [render_element(x1, "text"), render_element(x2, "text")]
    widths = [max(len(top[c]), len(cells[0][c]), len(cells[1][c]))
              for c in range(2)]
    side_w = max(len(s) for s in side)
    print(" " * side_w + " | " + " | ".join(
        top[c].ljust(widths[c]) for c in range(2)))
    print("-" * (side_w + 3 + widths[0] + 3 + widths[1]))
    for r in range(2):
        print(side[r].ljust(side_w) + " | " + " | ".join(
            cells[r][c].ljust(widths[c]) for c in range(2)))


def cmd_props(args):
    system = _load_system(args.file)
    bad = system.validate()
    if bad:
        raise InvalidSystem(bad)
    results = run_props(system, seed=args.seed, samples=args.samples,
                        budget=args.budget)
    failures = sum(len(r.failures) for r in results)
    if args.format == "json":
        print(json.dumps({
            "seed": args.seed,
            "samples": args.samples,
            "suites": [{"name": r.name, "cases": r.cases,
                        "failures": r.failures, "status": r.status()}
                       for r in results],
        }, sort_keys=True))
    else:
        print(f"seed={args.seed} samples={args.samples}")
        for r in results:
            print(f"{r.name:22s} cases={r.cases:<6d} "
                  f"failures={len(r.failures):<4d} {r.status()}")
            for f in r.failures[:5]:
                print(f"    {f}")
    if args.dot_dir:
        outdir = pathlib.Path(args.dot_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / "props_report.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["suite", "cases", "failures", "status"])
            for r in results:
                w.writerow([r.name, r.cases, len(r.failures), r.status()])
        from .render import props_figure, system_dot
        props_figure(results, outdir / "props_summary.png",
                     title=f"property suites (seed={args.seed})")
        (outdir / "system.dot").write_text(system_dot(system))
    return EXIT_OK if failures == 0 else EXIT_FAIL


def cmd_surgery(args):
    system = _load_system(args.file)
    bad = system.validate()
    if bad:
        raise InvalidSystem(bad)
    k = args.element
    if k not in system.poset.index:
        raise UnknownElement(f"{k!r} is not an element")
    trace = collapse_sequence(system, k)
    ct = ChainTree(system.poset, k)
    lines = [f"chain tree at {k}: {len(ct.tree.ids)} nodes",
             f"initial system: {trace.initial.n} elements"]
    ok = trace.final_isomorphic_to_target()
    reports = []
    for idx, step in enumerate(trace.steps):
        rep = verify_pushout(step, samples=args.samples,
                             seed=f"{args.seed}:{idx}")
        reports.append(rep)
        lines.append(f"step {idx}: {step.before.n} -> {step.after.n} "
                     f"elements; pushout checks: {rep['checks']}, "
                     f"failures: {len(rep['failures'])}")
    lines.append(f"final: {trace.final.n} elements; isomorphic to base: "
                 f"{'yes' if ok else 'NO'}")
    failures = sum(len(r["failures"]) for r in reports) + (0 if ok else 1)
    if args.format == "json":
        print(json.dumps({
            "tree_nodes": len(ct.tree.ids),
            "stages": [s.n for s in trace.systems()],
            "isomorphic": ok,
            "pushout_failures": sum(len(r["failures"]) for r in reports),
            "seed": args.seed,
        }, sort_keys=True))
    else:
        print("\n".join(lines))
    if args.dot_dir:
        outdir = pathlib.Path(args.dot_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        from .render import poset_figure, system_dot
        for idx, stage in enumerate(trace.systems()):
            (outdir / f"stage{idx}.dot").write_text(
                system_dot(stage, name=f"stage{idx}"))
            poset_figure(stage.poset, outdir / f"stage{idx}.png",
                         title=f"stage {idx}: {stage.n} elements")
        with open(outdir / "trace.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["stage", "elements", "pushout_checks",
                        "pushout_failures"])
            w.writerow([0, trace.initial.n, "", ""])
            for idx, (step, rep) in enumerate(zip(trace.steps, reports)):
                w.writerow([idx + 1, step.after.n, rep["checks"],
                            len(rep["failures"])])
    return EXIT_OK if failures == 0 else EXIT_FAIL


def cmd_roundtrip(args):
    system = _load_system(args.file)
    bad = system.validate()
    if bad:
        raise InvalidSystem(bad)
    m = Monoid(system, budget=args.budget)
    ok = m.roundtrip_check()
    print("true" if ok else "false")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser():
    ap = argparse.ArgumentParser(
        prog="refmon",
        description="Monoids of group-labeled posets: validation, exact "
                    "arithmetic, refinement search, surgery traces.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=50)
    common.add_argument("--budget", type=int, default=500_000,
                        help="feasibility node budget")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--dot-dir", default=None,
                        help="directory for DOT/CSV/PNG artifacts")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("validate", parents=[common],
                       help="check the two system laws")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)
    p = sub.add_parser("eval", parents=[common],
                       help="evaluate a monoid operation")
    p.add_argument("file")
    p.add_argument("op", choices=("eq", "add", "leq", "refine", "primes",
                                  "gens", "classify"))
    p.add_argument("args", nargs="*")
    p.set_defaults(func=cmd_eval)
    p = sub.add_parser("props", parents=[common],
                       help="run the property suites")
    p.add_argument("file")
    p.set_defaults(func=cmd_props)
    p = sub.add_parser("surgery", parents=[common],
                       help="collapse the chain tree back onto the base")
    p.add_argument("file")
    p.add_argument("element", help="a maximal element id")
    p.set_defaults(func=cmd_surgery)
    p = sub.add_parser("roundtrip", parents=[common],
                       help="rebuild the system from its monoid and compare")
    p.add_argument("file")
    p.set_defaults(func=cmd_roundtrip)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimit as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ParseError, UnknownElement, OSError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except InvalidSystem as e:
        for v in e.violations:
            print(f"violation: {v}", file=sys.stderr)
        return EXIT_FAIL
    except (BadCoordinate, PreconditionViolated, NotChainUp,
            NoValidStep) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except RefmonError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
