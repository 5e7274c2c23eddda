"""`gqm` command-line front end.

Machine output is JSON (stdout or ``--out``); a short human summary goes to
stderr.  Exit codes: 0 success, 2 usage/parse, 3 resource limit, 4 falsified
certificate.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import abelian, fixtures
from .chains import (
    Chain1,
    Chain2,
    boundary2,
    fill_norm,
    integral_fill_norm,
    scl_upper_from_fill,
    support_ball,
    verify_dual_certificate,
    witness_commutator_chain,
)
from .commlength import (
    EXACT,
    NOT_FOUND,
    SearchConfig,
    cl_mixed,
    cl_plain,
    compute_section_constants,
    scl_mixed_report,
)
from .errors import (
    FalsifiedCertificate,
    GqmError,
    Infeasible,
    InvalidGroup,
    MissingDefectBound,
    ParseError,
    PreconditionViolated,
)
from .groups import (
    FiniteGroup,
    GroupContext,
    SemidirectByFinite,
    commutator,
    context_from_json,
    enumerate_ball,
    group_from_json,
    parse_element,
    product,
)
from .quasimorphisms import (
    Quasimorphism,
    bavard_lower,
    conjugation_autos,
    default_virtual_section,
    defect_lower,
    conjugation_defect_lower,
    extend_by_averaging,
    extend_by_section,
    nqm_defect_lower,
    qm_from_json,
    symmetrize,
)
from .resources import load_json
from .surfaces import DeltaSurface, build_from_chain, build_from_decomposition, validate

log = logging.getLogger("gqm")


class UsageError(ParseError):
    pass


# -- loading -------------------------------------------------------------------------------------

def load_context(spec: str) -> GroupContext:
    doc = load_json(spec)
    try:
        return context_from_json(doc)
    except (KeyError, TypeError) as exc:
        raise InvalidGroup(f"malformed context spec: {exc}") from exc


def load_qm(ctx: GroupContext, spec: str) -> Quasimorphism:
    return qm_from_json(ctx, load_json(spec))


def small_group(spec: str) -> FiniteGroup:
    """``Z<n>``, ``D<n>``, ``S3``, ``V4`` / ``Z2xZ2``, or a group JSON file."""
    s = spec.strip()
    up = s.upper()
    if up in ("S3",):
        return fixtures.symmetric3()
    if up in ("V4", "Z2XZ2", "K4"):
        return fixtures.klein_four()
    if up.startswith("Z") and up[1:].isdigit():
        return fixtures.cyclic(int(up[1:]))
    if up.startswith("D") and up[1:].isdigit():
        return fixtures.dihedral(int(up[1:]))
    G = group_from_json(load_json(s))
    if not isinstance(G, FiniteGroup):
        raise InvalidGroup("free-product factors must be finite groups")
    return G


def element(ctx: GroupContext, text: str):
    return parse_element(ctx.group, text)


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def _cfg(args) -> SearchConfig:
    return SearchConfig(ball_radius=args.ball_radius, max_factors=args.max_factors, budget_ms=args.budget_ms)


def _support(ctx, radius, max_product_length=None):
    if radius is None and not ctx.group.is_finite:
        raise UsageError("--support-radius is required for infinite groups")
    return support_ball(ctx, radius, max_product_length=max_product_length)


# -- commands ------------------------------------------------------------------------------------

def cmd_cl(args):
    ctx = load_context(args.ctx)
    x = element(ctx, args.element)
    cfg = _cfg(args)
    res = cl_plain(ctx.group, x, cfg) if args.plain else cl_mixed(ctx, x, cfg)
    check_ctx = GroupContext.full(ctx.group) if args.plain else ctx
    ok = res.verify(check_ctx, x)
    out = {"element": str(x), "mode": "plain" if args.plain else "mixed", "result": res.to_json(), "witness_verified": ok}
    summary = f"cl = {res.value} ({res.kind})" if res.kind != NOT_FOUND else "cl: no decomposition found within the search budget"
    return out, summary


def _lower_certificate(ctx: GroupContext, f: Quasimorphism, x, notes: list):
    if not f.homogeneous:
        f = f.homogenization()
        notes.append("quasimorphism replaced by its exact homogenization")
    if not f.g_invariant:
        f = symmetrize(f, conjugation_autos(ctx))
        notes.append("quasimorphism symmetrized over the quotient")
    if f.D_upper is None:
        raise MissingDefectBound("the quasimorphism config carries no defect_upper")
    fx = f(x)
    value = bavard_lower(f, f.D_upper, x, fx)
    return value, {"source": "bavard", "qm": f.to_json(), "f(x)": str(fx), "D_upper": str(f.D_upper),
                   "kind": "lower-bound"}


def _scl_side(ctx, x, args, qm_spec, powers, with_lp):
    notes = []
    lowers = []
    if qm_spec:
        lowers.append(_lower_certificate(ctx, load_qm(ctx, qm_spec), x, notes))
    pw = list(powers)
    if ctx.group.is_finite:
        k = 1
        while not (x ** k).is_identity():
            k += 1
        if k not in pw:
            pw.append(k)
            notes.append(f"x has order {k}; cl(x^{k}) = 0")
    rep = scl_mixed_report(ctx, x, _cfg(args), pw, lowers)
    if with_lp:
        radii = _csv_ints(args.support_radius) if args.support_radius else [None]
        for r in radii:
            sup = _support(ctx, r, args.max_product_length)
            for n in _csv_ints(args.lp_powers):
                try:
                    value, res = scl_upper_from_fill(ctx, x, n, sup)
                except Infeasible:
                    notes.append(f"LP n={n} radius={r}: target not fillable on this support")
                    continue
                cert = {"source": "lp", "n": n, "support_radius": r, "support_pairs": len(sup),
                        "max_product_length": args.max_product_length, "fill_norm": str(res.value),
                        "method": res.method, "witness": res.witness.to_json(), "kind": "upper-bound"}
                if args.emit_dual:
                    cert["dual"] = res.dual_json()
                rep.add_upper(value, cert)
    rep.check()
    out = rep.to_json()
    out["notes"] = notes
    return out, rep


def cmd_scl(args):
    ctx = load_context(args.ctx)
    x = element(ctx, args.element)
    if not ctx.in_normal_subgroup(x):
        raise PreconditionViolated(f"{x} is not in N")
    powers = _csv_ints(args.powers)
    out = {"element": str(x)}
    main, rep = _scl_side(ctx, x, args, args.qm_file, powers, args.with_lp)
    out["scl_GN"] = main
    summary = f"scl_G,N({x}) in [{rep.lower}, {rep.upper if rep.upper is not None else 'inf'}]"
    if args.compare_normal:
        G = ctx.group
        if not (isinstance(G, SemidirectByFinite) and not ctx.is_full):
            raise UsageError("--compare-normal needs a semidirect context whose N is the fiber")
        fiber_ctx = GroupContext.full(G.fiber, name="N")
        n_part, gamma = x.canon
        xn = G.fiber.element(n_part)
        side, rep_n = _scl_side(fiber_ctx, xn, args, args.compare_qm_file or args.qm_file, powers, args.with_lp)
        out["scl_N"] = side
        out["equivalent_on_this_element"] = None if rep.upper is None else rep_n.lower <= rep.upper
        summary += f"; scl_N in [{rep_n.lower}, {rep_n.upper if rep_n.upper is not None else 'inf'}]"
    return out, summary


def cmd_fill(args):
    ctx = load_context(args.ctx)
    x = element(ctx, args.element) ** args.power
    radius = None if args.support_radius is None else int(args.support_radius)
    sup = _support(ctx, radius, args.max_product_length)
    res = fill_norm(ctx, x, sup)
    target = Chain1.of(x) if not x.is_identity() else Chain1()
    feasible, objective = (True, Fraction(0)) if not target else verify_dual_certificate(ctx, res.dual, sup, target)
    out = {"element": str(x), "support_radius": radius, "support_pairs": len(sup), "value": str(res.value),
           "kind": "upper-bound" if radius is not None and not ctx.group.is_finite else EXACT,
           "method": res.method, "witness": res.witness.to_json(),
           "witness_boundary_ok": boundary2(res.witness) == target,
           "dual_feasible": feasible, "dual_objective": str(objective)}
    if args.emit_dual or ctx.group.is_finite:
        out["dual"] = res.dual_json()
    summary = f"||{x}||' = {res.value} on {len(sup)} support pairs"
    if args.integral:
        val, chain = integral_fill_norm(ctx, x, sup, budget_nodes=args.budget_nodes)
        out["integral"] = {"value": val, "witness": chain.to_json()}
        summary += f"; integral {val}"
    return out, summary


def _surface_report(ctx, surf: DeltaSurface, args):
    rep = validate(surf, ctx)
    out = {"surface": surf.to_json(), "report": rep.to_json(), "pruned_components": surf.pruned}
    if args.svg:
        Path(args.svg).write_text(surf.to_svg())
        out["svg"] = args.svg
    return out, f"surface: s={rep.s} e={rep.e} p={rep.p} genus={rep.genus} euler_ok={rep.euler_ok}"


def cmd_surface(args):
    ctx = load_context(args.ctx)
    G = ctx.group
    if args.action == "from-decomp":
        if args.pair:
            pairs = [(element(ctx, g), element(ctx, h)) for g, h in args.pair]
        elif args.m:
            if len(G.generators) < 2 * args.m:
                raise UsageError(f"--m {args.m} needs at least {2 * args.m} generators")
            pairs = [(G.gen(2 * i), G.gen(2 * i + 1)) for i in range(args.m)]
        else:
            raise UsageError("give --pair G H (repeatable) or --m")
        x = element(ctx, args.element) if args.element else product((commutator(g, h) for g, h in pairs), G)
        return _surface_report(ctx, build_from_decomposition(ctx, pairs, x), args)
    if args.action == "from-chain":
        if args.chain_file:
            chain = Chain2.from_json(G, load_json(args.chain_file))
        elif args.g and args.h:
            chain = witness_commutator_chain(ctx, element(ctx, args.g), element(ctx, args.h))
        else:
            raise UsageError("give --chain-file or --g and --h")
        if args.element:
            x = element(ctx, args.element)
        else:
            bd = boundary2(chain)
            if len(bd) != 1 or next(iter(bd.values())) != 1:
                raise UsageError("the chain boundary is not a single element; pass --element")
            x = next(iter(bd))
        return _surface_report(ctx, build_from_chain(ctx, chain, x), args)
    if args.action == "validate":
        if not args.surface_file:
            raise UsageError("validate needs --surface-file")
        surf = DeltaSurface.from_json(G, load_json(args.surface_file))
        return _surface_report(ctx, surf, args)
    raise UsageError(f"unknown surface action {args.action!r}")


def _sample_pairs(ctx, radius, limit, rng, normal_second=False):
    ball = enumerate_ball(ctx.group, radius)
    second = [x for x in ball if ctx.in_normal_subgroup(x)] if normal_second else ball
    pairs = [(g, h) for g in ball for h in second]
    if len(pairs) > limit:
        pairs = rng.sample(pairs, limit)
    return pairs


def cmd_qm(args):
    ctx = load_context(args.ctx)
    f = load_qm(ctx, args.qm_file)
    rng = random.Random(args.seed)
    if args.action == "eval":
        vals = {}
        for text in args.elements:
            x = element(ctx, text)
            vals[str(x)] = str(f(x))
        return {"qm": f.to_json(), "values": vals}, f"evaluated {f.name} at {len(vals)} elements"
    if args.action == "defect":
        dom_n = f.domain == "N"
        pairs = _sample_pairs(ctx, args.radius, args.samples, rng, normal_second=dom_n)
        if dom_n:
            pairs = [(g, h) for g, h in pairs if ctx.in_normal_subgroup(g)]
        D = defect_lower(f, pairs)
        out = {"qm": f.to_json(), "describe": None, "sampled_pairs": len(pairs), "kind": "lower-bound"}
        if not ctx.is_full:
            cpairs = _sample_pairs(ctx, args.radius, args.samples, rng, normal_second=True)
            conjugation_defect_lower(f, ctx, cpairs)
            if f.domain == "G":
                nqm_defect_lower(f, ctx, cpairs)
        out["describe"] = f.describe()
        if f.D_upper is not None and D.value > f.D_upper:
            raise FalsifiedCertificate(f"sampled defect {D.value} exceeds the configured bound {f.D_upper}")
        return out, f"sampled D({f.name}) >= {D.value}"
    if args.action == "extend":
        if args.method == "averaging":
            g = extend_by_averaging(f, ctx, default_virtual_section(ctx))
        else:
            vals = {r: 0 for r in conjugation_autos(ctx)}
            vals[ctx.group.e()] = 0
            g = extend_by_section(f, ctx, vals)
        ball = enumerate_ball(ctx.group, args.radius)
        restrict_ok = all(g(x) == f(x) for x in ball if ctx.in_normal_subgroup(x))
        if args.method == "averaging":
            what, bound = "D", g.D_upper
            D = defect_lower(g, _sample_pairs(ctx, min(args.radius, 3), args.samples, rng))
        else:
            # a section extension is an N-quasimorphism: its bound is on D''
            what, bound = "D''", g.Dpp_upper
            D = nqm_defect_lower(g, ctx, _sample_pairs(ctx, min(args.radius, 3), args.samples, rng, normal_second=True))
        out = {"extension": g.to_json(), "describe": g.describe(), "restricts_to_f_on_ball": restrict_ok,
               "sampled": {what: str(D.value)}, "bound": None if bound is None else str(bound)}
        if bound is not None and D.value > bound:
            raise FalsifiedCertificate(f"sampled {what} {D.value} exceeds the bound {bound}")
        return out, f"{g.name}: restricts={restrict_ok}, sampled {what} >= {D.value}, bound {bound}"
    if args.action == "bavard":
        x = element(ctx, args.elements[0])
        notes = []
        value, cert = _lower_certificate(ctx, f, x, notes)
        return {"element": str(x), "lower": str(value), "certificate": cert, "notes": notes}, \
            f"scl_G,N({x}) >= {value}"
    raise UsageError(f"unknown qm action {args.action!r}")


def cmd_freeproduct(args):
    A, B = small_group(args.a), small_group(args.b)
    same, left, right = abelian.check_freeindex(A, B)
    out = {"A": args.a, "B": args.b, "presentation": left.to_json(), "tensor": right.to_json(), "agree": same,
           "abelianization_A": abelian.abelianization(A).to_json(),
           "abelianization_B": abelian.abelianization(B).to_json()}
    if not same:
        raise FalsifiedCertificate(f"presentation gives {left}, tensor gives {right}")
    return out, f"N/[G,N] = {left} (both routes agree)"


def cmd_section_constants(args):
    ctx = load_context(args.ctx)
    data = compute_section_constants(ctx, budget=args.budget)
    return data.to_json(), f"M(s) = {data.Ms}, C(s) = {data.Cs}, checked {data.checked} elements"


def cmd_verify(args):
    from .verify import run_suite

    def report(c):
        print(c.line(), file=sys.stderr, flush=True)

    checks = run_suite(args.suite, seed=args.seed, report=report)
    out = {"suite": args.suite, "checks": [c.to_json() for c in checks], "ok": all(c.ok for c in checks)}
    failed = [c.name for c in checks if not c.ok]
    if failed:
        exc = FalsifiedCertificate("failed: " + "; ".join(failed))
        exc.report = out
        raise exc
    return out, f"{len(checks)} checks passed"


# -- parser --------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--ctx", default="f2", help="context JSON file or builtin name (d4, s3, f2, f4, swap, z2z3, klein, f4_klein)")
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--budget-ms", type=int, default=None, help="wall-clock budget for searches")
    common.add_argument("--seed", type=int, default=20240611)
    common.add_argument("--threads", type=int, default=1, help="accepted for compatibility; computations are single-threaded")
    common.add_argument("-v", "--verbose", action="store_true")

    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--ball-radius", type=int, default=2)
    search.add_argument("--max-factors", type=int, default=2)

    p = argparse.ArgumentParser(prog="gqm", description="Mixed commutator lengths, filling norms and quasimorphisms.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("cl", parents=[common, search], help="mixed (or plain) commutator length")
    c.add_argument("element")
    mode = c.add_mutually_exclusive_group()
    mode.add_argument("--mixed", action="store_true", default=True)
    mode.add_argument("--plain", action="store_true")
    c.set_defaults(func=cmd_cl)

    s = sub.add_parser("scl", parents=[common, search], help="two-sided bounds on scl_G,N")
    s.add_argument("element")
    s.add_argument("--powers", default="1,2")
    s.add_argument("--qm-file", help="quasimorphism config (file or builtin, e.g. f2_qm)")
    s.add_argument("--with-lp", action="store_true", help="add filling-norm upper bounds")
    s.add_argument("--support-radius", help="comma-separated radii for the LP support")
    s.add_argument("--max-product-length", type=int, default=None)
    s.add_argument("--lp-powers", default="1", help="powers n for (||x^n||' + 1)/(4n)")
    s.add_argument("--emit-dual", action="store_true")
    s.add_argument("--compare-normal", action="store_true", help="also bound scl_N inside the fiber")
    s.add_argument("--compare-qm-file", help="quasimorphism for the scl_N side (defaults to --qm-file)")
    s.set_defaults(func=cmd_scl)

    f = sub.add_parser("fill", parents=[common], help="filling norm ||x^n||' on a finite support")
    f.add_argument("element")
    f.add_argument("--power", type=int, default=1)
    f.add_argument("--support-radius", default=None)
    f.add_argument("--max-product-length", type=int, default=None)
    f.add_argument("--integral", action="store_true", help="also the least integral filling (branch and bound)")
    f.add_argument("--budget-nodes", type=int, default=2000)
    f.add_argument("--emit-dual", action="store_true")
    f.set_defaults(func=cmd_fill)

    sf = sub.add_parser("surface", parents=[common], help="(G,N)-simplicial surfaces")
    sf.add_argument("action", choices=["from-decomp", "from-chain", "validate"])
    sf.add_argument("--pair", nargs=2, action="append", metavar=("G", "H"))
    sf.add_argument("--m", type=int)
    sf.add_argument("--element")
    sf.add_argument("--chain-file")
    sf.add_argument("--g")
    sf.add_argument("--h")
    sf.add_argument("--surface-file")
    sf.add_argument("--svg")
    sf.set_defaults(func=cmd_surface)

    q = sub.add_parser("qm", parents=[common], help="quasimorphism evaluation, defects, extensions, Bavard bounds")
    q.add_argument("action", choices=["eval", "defect", "extend", "bavard"])
    q.add_argument("elements", nargs="*")
    q.add_argument("--qm-file", required=True)
    q.add_argument("--radius", type=int, default=3)
    q.add_argument("--samples", type=int, default=20000)
    q.add_argument("--method", choices=["averaging", "section"], default="averaging")
    q.set_defaults(func=cmd_qm)

    fp = sub.add_parser("freeproduct-quotient", parents=[common], help="N/[G,N] for G = A * B, two ways")
    fp.add_argument("--a", required=True)
    fp.add_argument("--b", required=True)
    fp.set_defaults(func=cmd_freeproduct)

    sc = sub.add_parser("section-constants", parents=[common], help="G(s), M(s), C(s) and the cl comparison")
    sc.add_argument("--budget", type=int, default=2_000_000)
    sc.set_defaults(func=cmd_section_constants)

    v = sub.add_parser("verify", parents=[common], help="run the verification suite")
    v.add_argument("suite", nargs="?", default="quick", choices=["quick", "all"])
    v.set_defaults(func=cmd_verify)
    return p


def _digest(argv) -> str:
    return hashlib.sha256(json.dumps(argv).encode()).hexdigest()[:16]


def _emit(doc, out_path):
    text = json.dumps(doc, indent=2, sort_keys=True, default=str)
    if out_path:
        Path(out_path).write_text(text + "\n")
    else:
        print(text)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        # `qm ACTION --opt ... ELEMENT` leaves trailing elements unparsed
        if extra and hasattr(args, "elements") and not any(e.startswith("-") and len(e) > 1 and not e[1].isdigit() for e in extra):
            args.elements = list(args.elements) + extra
        elif extra:
            parser.error("unrecognized arguments: " + " ".join(extra))
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    report = {"command": argv, "inputs_digest": _digest(argv)}
    t0 = time.perf_counter()
    try:
        results, summary = args.func(args)
    except GqmError as exc:
        # errors without a dedicated code are input problems: usage
        code = exc.exit_code if exc.exit_code != 1 else 2
        report.update({"error": type(exc).__name__, "message": str(exc), "exit_code": code})
        if getattr(exc, "report", None):
            report["results"] = exc.report
        report["timing_ms"] = round(1000 * (time.perf_counter() - t0), 1)
        _emit(report, getattr(args, "out", None))
        print(f"gqm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    report["results"] = results
    report["timing_ms"] = round(1000 * (time.perf_counter() - t0), 1)
    _emit(report, args.out)
    print(summary, file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
