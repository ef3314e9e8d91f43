"""Command-line front end: ``series-lab {ps,sums,series} <command> ...``.

Series arguments are either a path to a series document (JSON) or a catalog
spec such as ``geometric:r=0.5``.  Exit codes: 0 success, 1 domain or
validation error, 2 budget exhausted or inconclusive verdict.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import power_series as ps
from .core import NumericConfig
from .errors import BudgetError, ParseError, SeriesLabError
from .io import (
    RunReport,
    SeriesDocument,
    digest,
    load_document,
    load_generator_spec,
    serialize_series,
)
from .real_series import classify, divergent_rearrangement, split_parts
from .unordered_sums import (
    PAIR_ORDERS,
    Family,
    Partition,
    cauchy_coefficients,
    double_sum,
    pair_order,
    regrouped_sum,
    sup_finite_subsets,
    unordered_sum,
)

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2
SEED_ENV = "SERIES_LAB_SEED"


class UsageError(SeriesLabError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; that code is reserved for verdicts here
    def error(self, message):
        raise UsageError(message)


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def parse_complex(text: str) -> complex:
    s = text.strip()
    try:
        if "," in s:
            re_, im = s.split(",", 1)
            z = complex(float(re_), float(im))
        else:
            z = complex(s.replace("i", "j"))
    except ValueError:
        raise UsageError(f"not a complex number: {text!r} (use 're,im' or 'a+bj')") from None
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise UsageError(f"complex argument must be finite: {text!r}")
    return z


def parse_grid(text: str) -> np.ndarray:
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"grid must be start:stop:step, got {text!r}") from None
    if not step > 0 or stop < start:
        raise UsageError(f"grid needs step > 0 and stop >= start, got {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def resolve_seed(seed: int | None) -> int:
    if seed is None:
        env = os.environ.get(SEED_ENV)
        if env is None or env == "":
            return 0
        try:
            seed = int(env, 0)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    if not 0 <= seed < 2**64:
        raise UsageError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


class Context:
    """Per-invocation state: config, seed, and the raw inputs for the digest."""

    def __init__(self, args):
        self.args = args
        self.cfg = NumericConfig().replace(tol=args.tol, term_budget=args.budget, trunc_order=args.order)
        self.seed = resolve_seed(args.seed)
        self.override = args.override_radius
        self._inputs: list[str] = []

    def series(self, ref: str) -> ps.PowerSeries:
        path = Path(ref)
        if path.suffix == ".json" or path.exists():
            self._inputs.append(path.read_text(encoding="utf-8") if path.exists() else ref)
            return load_document(path).to_series(self.cfg.trunc_order)
        self._inputs.append(ref)
        return ps.PowerSeries.from_generator(load_generator_spec(ref), self.cfg.trunc_order)

    def generator(self, ref: str):
        self._inputs.append(ref)
        return load_generator_spec(ref)

    def family(self, ref: str) -> Family:
        path = Path(ref)
        if path.suffix == ".json" or path.exists():
            self._inputs.append(path.read_text(encoding="utf-8") if path.exists() else ref)
            doc = load_document(path)
            if doc.coeffs is not None:
                return Family.finite(doc.to_series(self.cfg.trunc_order).coeffs.tolist())
            return Family.from_generator(load_generator_spec(_spec_string(doc.generator)))
        return Family.from_generator(self.generator(ref))

    def report(self, operation: str) -> RunReport:
        return RunReport(
            operation=operation,
            inputs_digest=digest(operation, *self._inputs),
            seed=self.seed,
            config={
                "tol": self.cfg.tol,
                "term_budget": self.cfg.term_budget,
                "trunc_order": self.cfg.trunc_order,
                "override_radius": self.override,
            },
        )

    def emit(self, text: str):
        out = self.args.output
        if out is None or out == "-":
            sys.stdout.write(text)
        else:
            Path(out).write_text(text, encoding="utf-8")


def _spec_string(gen: dict) -> str:
    params = ",".join(f"{k}={v!r}" for k, v in sorted(gen.get("params", {}).items()))
    return gen["name"] + (":" + params if params else "")


def _csv(rows, header) -> str:
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _sum_outputs(r) -> dict:
    out = {
        "value": r.value,
        "abs_mass": r.abs_mass,
        "terms_used": r.terms_used,
    }
    if r.blocks:
        out["blocks"] = [
            {"value": b.value, "abs_mass": b.abs_mass, "terms_used": b.terms_used, "verdict": b.verdict}
            for b in r.blocks
        ]
    return out


def _verdict_code(verdict: str) -> int:
    if verdict in ("converged", "coefficient_equal", "witness"):
        return EXIT_OK
    _diagnose(f"verdict: {verdict}")
    return EXIT_INCONCLUSIVE


# -- ps ---------------------------------------------------------------------------

def cmd_ps(ctx: Context) -> int:
    a = ctx.args
    op = a.op
    tol = ctx.cfg.tol
    if op == "binomial":
        ctx.emit(serialize_series(ps.binomial_series(a.p, ctx.cfg.trunc_order)))
        return EXIT_OK
    f = ctx.series(a.f)
    if op in ("add", "mul", "compose", "distinguish"):
        g = ctx.series(a.g)
    if op == "add":
        result = ps.add(f, g)
    elif op == "scale":
        result = ps.scale(parse_complex(a.factor), f)
    elif op == "mul":
        result = ps.multiply(f, g)
    elif op == "pow":
        result = ps.power(f, a.p)
    elif op == "compose":
        result = ps.compose(f, g, override=ctx.override, tol=tol)
    elif op == "recip":
        result = ps.reciprocal(f, tol)
    elif op == "diff":
        result = ps.differentiate(f)
    elif op == "recenter":
        result = ps.recenter(f, parse_complex(a.at), override=ctx.override, tol=tol)
    elif op == "revert":
        result = ps.revert(f, tol)
    elif op == "eval":
        return _ps_eval(ctx, f)
    else:
        return _ps_report(ctx, op, f, g if op == "distinguish" else None)
    ctx.emit(serialize_series(result))
    return EXIT_OK


def _ps_eval(ctx: Context, f) -> int:
    a = ctx.args
    if a.at is not None:
        points = [parse_complex(a.at)]
    else:
        if a.grid is None:
            raise UsageError("eval needs --at or --grid")
        xs = parse_grid(a.grid)
        ys = parse_grid(a.imag) if a.imag is not None else np.zeros(1)
        points = [complex(x, y) for x in xs.tolist() for y in ys.tolist()]
    rows = []
    for z in points:
        value, tail = ps.evaluate(f, z)
        rows.append([fmt(z.real), fmt(z.imag), fmt(value.real), fmt(value.imag), fmt(tail)])
    ctx.emit(_csv(rows, ["z_re", "z_im", "f_re", "f_im", "tail_hint"]))
    return EXIT_OK


def _ps_report(ctx: Context, op: str, f, g) -> int:
    a = ctx.args
    tol = ctx.cfg.tol
    rep = ctx.report(f"ps {op}")
    code = EXIT_OK
    if op == "radius":
        est = ps.radius(f, tol)
        rep.outputs = {"rho": est.rho, "window": list(est.window), "method": est.method}
    elif op == "zero-order":
        z0 = parse_complex(a.at)
        fac = ps.order_of_zero(f, z0, override=ctx.override, tol=tol)
        rep.outputs = {
            "k": fac.k,
            "z0": fac.z0,
            "cofactor": SeriesDocument.from_series(fac.cofactor).to_json(),
        }
    elif op == "distinguish":
        d = ps.distinguish(f, g, tol)
        rep.outputs = {"witness": d.witness, "gap": d.gap}
        rep.verdicts = {"distinguish": d.verdict}
        code = _verdict_code(d.verdict)
    elif op == "continue":
        chain = ps.continue_along_segment(f, parse_complex(a.target), a.step, tol)
        rep.outputs = {
            "centers": list(chain.centers),
            "orders": [s.order for s in chain.series_at],
            "radii": list(chain.radii),
            "step": chain.step,
            "value": chain.value(),
            "final": SeriesDocument.from_series(chain.final).to_json(),
        }
    ctx.emit(rep.dumps())
    return code


# -- sums ---------------------------------------------------------------------------

def _family_arg(ctx: Context, refs: list[str], enum: str | None) -> Family:
    if len(refs) == 1:
        if enum not in (None, "natural"):
            raise UsageError("--enum applies to pair families (give two generators)")
        return ctx.family(refs[0])
    if len(refs) != 2:
        raise UsageError("give one family, or two generators for a pair family")
    ga, gb = ctx.generator(refs[0]), ctx.generator(refs[1])
    order = pair_order(enum or "diagonal", ctx.seed)
    return Family.product(ga, gb, order)


def _partition(ctx: Context, spec: str) -> Partition:
    kind, _, arg = spec.partition(":")
    if kind == "single":
        return Partition.single()
    if kind == "rows":
        return Partition.rows()
    try:
        n = int(arg)
    except ValueError:
        raise UsageError(f"--by {kind} needs an integer, e.g. {kind}:2") from None
    if kind == "mod":
        return Partition.by_residue(n)
    if kind == "random":
        return Partition.random(n, ctx.seed)
    raise UsageError(f"unknown partition '{spec}'; use single, rows, mod:L or random:L")


def cmd_sums(ctx: Context) -> int:
    a = ctx.args
    op = a.op
    if op == "rearrange":
        return cmd_series(ctx)
    if op == "cauchy":
        ga, gb = ctx.generator(a.a), ctx.generator(a.b)
        c = cauchy_coefficients(ga, gb, a.terms)
        rows = [[p, fmt(z.real), fmt(z.imag)] for p, z in enumerate(c.tolist())]
        ctx.emit(_csv(rows, ["p", "c_re", "c_im"]))
        return EXIT_OK
    rep = ctx.report(f"sums {op}")
    if op == "supfin":
        fam = ctx.family(a.family)
        best = sup_finite_subsets(fam, a.samples, a.max_subset, seed=ctx.seed)
        rep.outputs = {"sup_lower_bound": best, "samples": a.samples, "max_subset": a.max_subset}
        ctx.emit(rep.dumps())
        return EXIT_OK
    if op == "sum":
        r = unordered_sum(_family_arg(ctx, a.families, a.enum), ctx.cfg)
    elif op == "double":
        fam = _family_arg(ctx, [a.a, a.b], None)
        r = double_sum(fam, a.enum, ctx.cfg, seed=ctx.seed)
    else:  # regroup
        fam = _family_arg(ctx, a.families, a.enum)
        r = regrouped_sum(fam, _partition(ctx, a.by), ctx.cfg)
    rep.outputs = _sum_outputs(r)
    rep.verdicts = {"sum": r.verdict}
    ctx.emit(rep.dumps())
    return _verdict_code(r.verdict.value)


# -- series ---------------------------------------------------------------------------

def cmd_series(ctx: Context) -> int:
    a = ctx.args
    gen = ctx.generator(a.gen)
    if a.op == "classify":
        rep = ctx.report("series classify")
        rep.outputs = {"generator": gen.spec(), "radius": gen.radius}
        rep.verdicts = {"classification": classify(gen, ctx.cfg)}
        ctx.emit(rep.dumps())
        return EXIT_OK
    if a.op == "parts":
        terms = np.asarray(gen.terms(a.count), dtype=float)
        rows = []
        P = Q = 0.0
        for n, t in enumerate(terms.tolist()):
            pq = split_parts(t)
            P += pq.p
            Q += pq.q
            rows.append([n, fmt(t), fmt(pq.p), fmt(pq.q), fmt(P), fmt(Q)])
        ctx.emit(_csv(rows, ["n", "term", "p", "q", "p_sum", "q_sum"]))
        return EXIT_OK
    # rearrange
    code = EXIT_OK
    try:
        prefix = divergent_rearrangement(gen, a.crossings, ctx.args.budget)
    except BudgetError as exc:
        prefix = exc.partial
        code = EXIT_INCONCLUSIVE
        _diagnose(str(exc))
    if code == EXIT_OK and prefix.crossings_achieved < a.crossings:
        _diagnose(f"budget exhausted after {prefix.crossings_achieved} of {a.crossings} crossings")
        code = EXIT_INCONCLUSIVE
    terms = gen.terms(int(prefix.indices.max()) + 1 if len(prefix) else 0)
    ends = set(prefix.block_ends)
    rows = [
        [k, idx, fmt(terms[idx]), fmt(s), int(k + 1 in ends)]
        for k, (idx, s) in enumerate(zip(prefix.indices.tolist(), prefix.partial_sums.tolist()))
    ]
    ctx.emit(_csv(rows, ["step", "index", "term", "partial_sum", "block_end"]))
    return code


# -- parser -----------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("-o", "--output", help="output path (default stdout)")
    p.add_argument("--tol", type=float)
    p.add_argument("--budget", type=int, help="term budget")
    p.add_argument("--order", type=int, help="truncation order")
    p.add_argument("--seed", type=int, help=f"u64 seed (fallback ${SEED_ENV}, then 0)")
    p.add_argument("--override-radius", action="store_true", help="skip radius preconditions")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    root = _Parser(prog="series-lab", description=__doc__.splitlines()[0])
    groups = root.add_subparsers(dest="group", required=True, parser_class=_Parser)

    g = groups.add_parser("ps", help="power series operations")
    sub = g.add_subparsers(dest="op", required=True, parser_class=_Parser)
    for name in ("add", "mul", "compose", "distinguish"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("f")
        s.add_argument("g")
    s = sub.add_parser("scale", parents=[common])
    s.add_argument("f")
    s.add_argument("factor", help="'re,im' or a+bj")
    s = sub.add_parser("pow", parents=[common])
    s.add_argument("f")
    s.add_argument("p", type=int)
    for name in ("recip", "diff", "radius", "revert"):
        sub.add_parser(name, parents=[common]).add_argument("f")
    for name in ("recenter", "zero-order"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("f")
        s.add_argument("--at", required=True)
    s = sub.add_parser("eval", parents=[common])
    s.add_argument("f")
    s.add_argument("--at")
    s.add_argument("--grid", help="real axis start:stop:step")
    s.add_argument("--imag", help="imaginary axis start:stop:step")
    s = sub.add_parser("continue", parents=[common])
    s.add_argument("f")
    s.add_argument("--target", required=True)
    s.add_argument("--step", type=float, required=True)
    s = sub.add_parser("binomial", parents=[common])
    s.add_argument("p", type=int)

    g = groups.add_parser("sums", help="unordered sums")
    sub = g.add_subparsers(dest="op", required=True, parser_class=_Parser)
    s = sub.add_parser("sum", parents=[common])
    s.add_argument("families", nargs="+")
    s.add_argument("--enum", choices=PAIR_ORDERS)
    s = sub.add_parser("regroup", parents=[common])
    s.add_argument("families", nargs="+")
    s.add_argument("--by", required=True, help="single | rows | mod:L | random:L")
    s.add_argument("--enum", choices=PAIR_ORDERS)
    s = sub.add_parser("double", parents=[common])
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--enum", choices=PAIR_ORDERS, default="diagonal")
    s = sub.add_parser("cauchy", parents=[common])
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--terms", type=int, default=20, help="highest index P")
    s = sub.add_parser("supfin", parents=[common])
    s.add_argument("family")
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--max-subset", type=int, default=40)
    _rearrange_parser(sub, common)

    g = groups.add_parser("series", help="real series")
    sub = g.add_subparsers(dest="op", required=True, parser_class=_Parser)
    sub.add_parser("classify", parents=[common]).add_argument("gen")
    s = sub.add_parser("parts", parents=[common])
    s.add_argument("gen")
    s.add_argument("--count", type=int, default=20)
    _rearrange_parser(sub, common)
    return root


def _rearrange_parser(sub, common):
    s = sub.add_parser("rearrange", parents=[common])
    s.add_argument("gen")
    s.add_argument("--crossings", type=int, default=1)


def _diagnose(message: str):
    line = " ".join(str(message).split())
    print(f"series-lab: {line}", file=sys.stderr)


HANDLERS = {"ps": cmd_ps, "sums": cmd_sums, "series": cmd_series}


# options whose values may start with '-' (e.g. --grid -1:1:0.1)
VALUE_OPTIONS = ("--grid", "--imag", "--at", "--target")


def _glue_values(argv):
    out = []
    it = iter(argv)
    for tok in it:
        if tok in VALUE_OPTIONS:
            value = next(it, None)
            out.append(tok if value is None else f"{tok}={value}")
        else:
            out.append(tok)
    return out


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_glue_values(argv))
        return HANDLERS[args.group](Context(args))
    except BudgetError as exc:
        _diagnose(f"budget exhausted: {exc}")
        return EXIT_INCONCLUSIVE
    except (SeriesLabError, ParseError) as exc:
        _diagnose(f"error: {exc}")
        return EXIT_ERROR
    except OSError as exc:
        _diagnose(f"error: {exc}")
        return EXIT_ERROR


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
