"""The shipped verification suite: one check per acceptance criterion.

Each check returns a :class:`Check`; `gqm verify` and the acceptance test both
run these.  Oracles here are deliberately naive (brute-force products,
symbolic identities) so that they stay independent of the code they judge.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import abelian, fixtures
from .chains import (
    boundary2,
    fill_norm,
    scl_upper_from_fill,
    support_ball,
    verify_dual_certificate,
    witness_commutator_chain,
    Chain1,
)
from .commlength import (
    EXACT,
    NOT_FOUND,
    SearchConfig,
    _cl_table,
    cl_mixed,
    compute_section_constants,
    rewrite_matching_quotients,
    mixed_commutators,
)
from .errors import Infeasible
from .groups import Element, FreeGroup, GroupContext, all_elements, commutator, enumerate_ball, product
from .quasimorphisms import (
    bavard_lower,
    conjugation_autos,
    counting_qm,
    default_virtual_section,
    defect_lower,
    extend_by_averaging,
    extend_by_section,
    nqm_defect_lower,
    qm_from_json,
    symmetrize,
    zero_qm,
)
from .resources import load_json
from .surfaces import build_from_chain, build_from_decomposition, validate

DEFAULT_SEED = 20240611
# N in the free-product fixture has no nontrivial element shorter than 4
SEARCH = SearchConfig(ball_radius=4, max_factors=2)


@dataclass
class Check:
    name: str
    ok: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}  ({self.seconds:.2f}s)"

    def to_json(self):
        return {"name": self.name, "ok": self.ok, "seconds": round(self.seconds, 3), "detail": self.detail}


def _timed(name: str, fn: Callable[[], tuple[bool, dict]], limit: float | None = None) -> Check:
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    if limit is not None:
        detail["time_limit_s"] = limit
        if dt >= limit:
            ok = False
            detail["over_time"] = True
    return Check(name, ok, detail, dt)


# -- helpers -------------------------------------------------------------------------------------

def random_word(G, length: int, rng: random.Random) -> Element:
    gens = [G.gen(i) for i in range(len(G.generators))]
    x = G.e()
    for _ in range(length):
        g = rng.choice(gens)
        x = x * (g if rng.random() < 0.5 else g.inverse())
    return x


def quotient_representatives(ctx: GroupContext, radius: int = 3) -> dict:
    """One short preimage per quotient value seen in a small ball."""
    reps = {}
    for g in enumerate_ball(ctx.group, radius):
        reps.setdefault(ctx.q(g), g)
    return reps


def random_normal(ctx: GroupContext, rng: random.Random, length: int = 4, reps: dict | None = None) -> Element:
    G = ctx.group
    if ctx.is_full:
        return random_word(G, length, rng)
    if G.is_finite:
        return rng.choice(ctx.normal_elements())
    reps = reps if reps is not None else quotient_representatives(ctx)
    w = random_word(G, length, rng)
    return w * reps[ctx.q(w)].inverse()


def brute_force_cl(ctx: GroupContext, depth: int = 3) -> dict:
    """x -> least k <= depth with x a product of k mixed commutators (plain set products)."""
    comms = set(mixed_commutators(ctx))
    e = ctx.group.e()
    best = {e: 0}
    level = {e}
    for k in range(1, depth + 1):
        level = {y * c for y in level for c in comms}
        for y in level:
            best.setdefault(y, k)
    return best


def finite_contexts() -> dict:
    return {"D4/<r>": fixtures.dihedral_context(4), "S3/A3": fixtures.s3_context(), "V4/<u>": fixtures.klein_context()}


def shipped_f2_qm(ctx: GroupContext):
    return qm_from_json(ctx, load_json("f2_qm"))


def shipped_swap_qm(ctx: GroupContext):
    return qm_from_json(ctx, load_json("swap_qm"))


# -- the criteria --------------------------------------------------------------------------------

def check_cl_oracle() -> Check:
    def run():
        detail = {}
        ok = True
        for name, ctx in (("D4/<r>", fixtures.dihedral_context(4)), ("S3/A3", fixtures.s3_context())):
            oracle = brute_force_cl(ctx, 3)
            table = _cl_table(ctx)
            gn = [ctx.group.element(c) for c in table.dist]
            agree = all(oracle.get(x) == table.dist[x.canon] for x in gn) and set(oracle) == set(gn)
            ok = ok and agree
            detail[name] = {"[G,N]": len(gn), "agree": agree,
                            "values": {str(x): table.dist[x.canon] for x in sorted(gn)}}
        return ok, detail
    return _timed("1 finite cl BFS = brute-force oracle", run, limit=5.0)


def check_commutator_chains(samples: int = 200, seed: int = DEFAULT_SEED) -> Check:
    def run():
        rng = random.Random(seed)
        ctxs = [fixtures.free_context(2), fixtures.dihedral_context(4), fixtures.free_product_context()]
        reps = {id(c): quotient_representatives(c) for c in ctxs}
        bad = []
        degenerate = 0
        for i in range(samples):
            ctx = ctxs[i % len(ctxs)]
            G = ctx.group
            g = random_word(G, rng.randint(0, 5), rng)
            h = random_normal(ctx, rng, rng.randint(0, 5), reps[id(ctx)])
            c = witness_commutator_chain(ctx, g, h)
            target = Chain1.of(commutator(g, h))  # the identity stays a basis element here
            if boundary2(c) != target:
                bad.append((str(g), str(h), "boundary"))
            # g = e or g = h collapse two of the three simplices
            if g.is_identity() or g == h:
                degenerate += 1
                if c.l1() > 3:
                    bad.append((str(g), str(h), "l1"))
            elif c.l1() != 3:
                bad.append((str(g), str(h), "l1"))
        return not bad, {"samples": samples, "degenerate_pairs": degenerate, "failures": bad[:5]}
    return _timed("2 commutator chain boundary and l1 = 3", run)


def _fill_fixtures():
    F2 = fixtures.free_context(2)
    sw = fixtures.swap_context()
    zz = fixtures.free_product_context()
    out = []
    for name, ctx in finite_contexts().items():
        gn = [ctx.group.element(c) for c in _cl_table(ctx).dist]
        out.append((name, ctx, [x for x in sorted(gn) if not x.is_identity()]))
    out.append(("F2", F2, [F2.group("[a,b]"), F2.group("[a,b b]")]))
    out.append(("F2xZ2/F2", sw, [sw.group("[t,a]"), sw.group("[a,b]")]))
    out.append(("Z2*Z3/ker", zz, [zz.group("[z,c]")]))
    return out


def check_fill_sandwich(radii=(2, 3, 4)) -> Check:
    def run():
        ok = True
        detail = {}
        for name, ctx, xs in _fill_fixtures():
            rows = {}
            for x in xs:
                cl = cl_mixed(ctx, x, SEARCH)
                if cl.kind == NOT_FOUND:
                    ok = False
                    rows[str(x)] = {"cl": None}
                    continue
                supports = [(r, support_ball(ctx, r)) for r in radii]
                if ctx.group.is_finite:
                    supports.append(("all", support_ball(ctx, None)))
                vals = []
                for r, sup in supports:
                    try:
                        res = fill_norm(ctx, x, sup)
                    except Infeasible:
                        vals.append((r, None))
                        continue
                    feasible, obj = verify_dual_certificate(ctx, res.dual, sup, Chain1.of(x))
                    good = feasible and obj == res.value and res.value <= 4 * cl.value - 1
                    ok = ok and good
                    vals.append((r, res.value))
                # monotone in the support: infeasible counts as +infinity
                seq = [v for _, v in vals]
                for a, b in zip(seq, seq[1:]):
                    if a is not None and (b is None or b > a):
                        ok = False
                rows[str(x)] = {"cl_upper": cl.value, "fill": {str(r): None if v is None else str(v) for r, v in vals}}
            detail[name] = rows
        return ok, detail
    return _timed("3 fill <= 4 cl - 1, dual = primal, monotone support", run)


def check_f2_scl(radius: int = 4, outer_radius: int | None = 5, outer_product_length: int = 8) -> Check:
    def run():
        ctx = fixtures.free_context(2)
        G = ctx.group
        x = G("[a,b]")
        f = shipped_f2_qm(ctx)
        fx = f(x)
        lower = bavard_lower(f, f.D_upper, x)
        upper, res = scl_upper_from_fill(ctx, x, 2, support_ball(ctx, radius))
        detail = {"f(x)": str(fx), "D_upper": str(f.D_upper), "lower": str(lower),
                  f"upper_radius_{radius}": str(upper), "fill_norm_x2": str(res.value), "lp_method": res.method}
        ok = lower == Fraction(1, 2) and Fraction(1, 2) <= upper <= 1
        if outer_radius is not None:
            sup = support_ball(ctx, outer_radius, max_product_length=outer_product_length)
            up2, res2 = scl_upper_from_fill(ctx, x, 2, sup)
            detail[f"upper_radius_{outer_radius}_product_{outer_product_length}"] = str(up2)
            detail["outer_support_pairs"] = len(sup)
            ok = ok and Fraction(1, 2) <= up2 <= upper
        return ok, detail
    return _timed("4 scl([a,b]) in F2: lower 1/2, LP upper in [1/2, 1], nonincreasing", run, limit=60.0)


def check_separation(n_max: int = 4) -> Check:
    def run():
        ctx = fixtures.swap_context()
        G = ctx.group
        z, h = G("t"), G("a")
        x = h * (z * h * z) * h.inverse() * (z * h.inverse() * z)
        ok = ctx.in_normal_subgroup(x)
        rows = {}
        for n in range(1, n_max + 1):
            xn = x ** n
            lhs = x ** (2 * n)
            mid = (z * xn.inverse() * z) * xn
            rhs = commutator(z, xn.inverse())
            good = lhs == mid == rhs and ctx.in_normal_subgroup(xn.inverse()) and not lhs.is_identity()
            ok = ok and good
            rows[n] = {"identity": good, "cl": 1, "scl_upper": str(Fraction(1, 2 * n))}
        # symmetrized homogeneous candidates all vanish on x
        autos = conjugation_autos(ctx)
        cands = {}
        for pat in ("ab", "aB", "bA", "aab", "abAB", "abb"):
            f = symmetrize(counting_qm(ctx, pat, homogeneous=True), autos)
            cands[pat] = str(bavard_lower(f, 1, x))
            ok = ok and f(x) == 0
        f = shipped_f2_qm(ctx)
        cands["shipped F2 config, symmetrized"] = str(bavard_lower(symmetrize(f, autos), 1, x))
        ok = ok and symmetrize(f, autos)(x) == 0
        return ok, {"x": str(x), "powers": rows, "bavard_lower": cands}
    return _timed("5 separation example in F2 x| Z/2", run)


def check_surfaces() -> Check:
    def run():
        ok = True
        detail = {}
        for m in (1, 2, 3):
            ctx = fixtures.free_context(2 * m)
            G = ctx.group
            pairs = [(G.gen(2 * i), G.gen(2 * i + 1)) for i in range(m)]
            x = product((commutator(g, h) for g, h in pairs), G)
            rep = validate(build_from_decomposition(ctx, pairs, x), ctx)
            good = (rep.s, rep.e, rep.p, rep.genus) == (4 * m - 1, 6 * m - 1, 1, m)
            good = good and rep.s - rep.e + rep.p == 1 - 2 * m and 1 + 2 * (rep.e - 1) == 3 * rep.s
            good = good and rep.connected and rep.orientable and rep.gn_labelled
            ok = ok and good
            detail[f"m={m}"] = rep.to_json()
        ctx = fixtures.free_context(2)
        G = ctx.group
        g, h = G("a"), G("b")
        x = commutator(g, h)
        surf = build_from_chain(ctx, witness_commutator_chain(ctx, g, h), x)
        rep = validate(surf, ctx)
        good = rep.connected and rep.genus == 1 and rep.p == 1 and [surf.edges[i] for i in surf.boundary] == [x]
        detail["from_chain"] = rep.to_json()
        return ok and good, detail
    return _timed("6 surfaces: counts, Euler identities, chain surface", run)


def _rewrite_instance(ctx, rng, reps, k):
    quads = []
    for _ in range(k):
        alpha = random_word(ctx.group, rng.randint(0, 4), rng)
        beta = random_word(ctx.group, rng.randint(0, 4), rng)
        f = alpha * random_normal(ctx, rng, rng.randint(0, 4), reps)
        g = beta * random_normal(ctx, rng, rng.randint(0, 4), reps)
        quads.append((f, g, alpha, beta))
    return quads


def check_rewrite(samples: int = 100, seed: int = DEFAULT_SEED) -> Check:
    def run():
        rng = random.Random(seed)
        bad = []
        per = {}
        for name, ctx in (("F4/V4", fixtures.f4_klein_context()), ("D4/<r>", fixtures.dihedral_context(4))):
            reps = quotient_representatives(ctx)
            for _ in range(samples):
                k = rng.randint(1, 3)
                quads = _rewrite_instance(ctx, rng, reps, k)
                y, bound, wit = rewrite_matching_quotients(ctx, quads)
                G = ctx.group
                expect = product((commutator(f, g) for f, g, _, _ in quads), G) * \
                    product((commutator(a, b) for _, _, a, b in quads), G).inverse()
                good = (y == expect and len(wit) <= 3 * k == bound and ctx.in_normal_subgroup(y)
                        and all(ctx.in_normal_subgroup(hh) for _, hh in wit)
                        and product((commutator(gg, hh) for gg, hh in wit), G) == y)
                if not good:
                    bad.append(name)
            per[name] = samples
        return not bad, {"instances": per, "failures": len(bad)}
    return _timed("7 rewrite into <= 3k mixed commutators", run)


def check_freeindex() -> Check:
    def run():
        gs = {"Z2": fixtures.cyclic(2), "Z3": fixtures.cyclic(3), "Z4": fixtures.cyclic(4), "Z6": fixtures.cyclic(6),
              "S3": fixtures.symmetric3(), "V4": fixtures.klein_four()}
        ok = True
        table = {}
        for ka, A in gs.items():
            for kb, B in gs.items():
                same, left, right = abelian.check_freeindex(A, B)
                ok = ok and same
                table[f"{ka}*{kb}"] = list(left.invariants)
        ok = ok and table["Z4*Z6"] == [2] and table["Z2*Z3"] == []
        return ok, table
    return _timed("8 N/[G,N] presentation = tensor of abelianizations", run, limit=30.0)


def check_extensions(radius: int = 5, pair_radius: int = 3) -> Check:
    def run():
        ctx = fixtures.swap_context()
        G = ctx.group
        f = shipped_swap_qm(ctx)
        ball = enumerate_ball(G, radius)
        in_n = [x for x in ball if ctx.in_normal_subgroup(x)]
        small = enumerate_ball(G, pair_radius)
        small_n = [x for x in small if ctx.in_normal_subgroup(x)]
        avg = extend_by_averaging(f, ctx, default_virtual_section(ctx))
        sec = extend_by_section(f, ctx, {G.e(): 0, G("t"): 0})
        restrict = all(avg(x) == f(x) and sec(x) == f(x) for x in in_n)
        d_avg = defect_lower(avg, [(g1, g2) for g1 in small for g2 in small])
        d_sec = nqm_defect_lower(sec, ctx, [(g, x) for g in small for x in small_n])
        ok = (restrict and avg.D_upper is not None and d_avg.value <= avg.D_upper
              and sec.Dpp_upper is not None and d_sec.value <= sec.Dpp_upper)
        return ok, {"restricts_on_ball": restrict, "ball_N_elements": len(in_n),
                    "averaging": {"sampled_D": str(d_avg.value), "bound": str(avg.D_upper)},
                    "section": {"sampled_D''": str(d_sec.value), "bound": str(sec.Dpp_upper)}}
    return _timed("9 extensions restrict to f and respect defect bounds", run)


def check_section_constants() -> Check:
    def run():
        detail = {}
        for name, ctx in (("D4/<r>", fixtures.dihedral_context(4)), ("S3/A3", fixtures.s3_context())):
            data = compute_section_constants(ctx)  # raises on a violation
            detail[name] = data.to_json()
        return True, detail
    return _timed("10 cl_G,N <= (C(s)+3) cl_G on finite fixtures", run)


def check_duality(lp_radius: int = 3) -> Check:
    def run():
        rows = []
        ok = True

        def record(name, x, lowers, uppers):
            nonlocal ok
            lo = max(lowers)
            up = min(uppers)
            good = lo <= up
            ok = ok and good
            rows.append({"context": name, "x": str(x), "max_lower": str(lo), "min_upper": str(up), "ok": good})

        F2 = fixtures.free_context(2)
        f = shipped_f2_qm(F2)
        sup = support_ball(F2, lp_radius)
        for text in ("[a,b]", "[a,b][a,B]", "[a,b b]", "a b A B a B A b"):
            x = F2.group(text)
            lowers = [bavard_lower(f, f.D_upper, x)]
            uppers = []
            for n in (1, 2):
                r = cl_mixed(F2, x ** n, SEARCH)
                if r.kind != NOT_FOUND:
                    uppers.append(Fraction(r.value, n))
            try:
                uppers.append(scl_upper_from_fill(F2, x, 1, sup)[0])
            except Infeasible:
                pass
            record("F2", x, lowers, uppers)

        sw = fixtures.swap_context()
        fs = shipped_swap_qm(sw)
        fsym = symmetrize(shipped_f2_qm(sw), conjugation_autos(sw))
        for text in ("[a,b]", "[t,a]", "a b a B A A b"):
            x = sw.group(text)
            lowers = [bavard_lower(fs, fs.D_upper, x), bavard_lower(fsym, 1, x)]
            uppers = []
            r = cl_mixed(sw, x, SEARCH)
            if r.kind != NOT_FOUND:
                uppers.append(Fraction(r.value))
            try:
                uppers.append(scl_upper_from_fill(sw, x, 1, support_ball(sw, 2))[0])
            except Infeasible:
                pass
            if uppers:
                record("F2xZ2/F2", x, lowers, uppers)

        for name, ctx in list(finite_contexts().items()) + [("Z2*Z3/ker", fixtures.free_product_context())]:
            z = zero_qm(ctx)
            G = ctx.group
            xs = ([G.element(c) for c in _cl_table(ctx).dist] if G.is_finite else [G("[z,c]"), G("[z,c c]")])
            for x in xs:
                r = cl_mixed(ctx, x, SEARCH)
                uppers = [Fraction(r.value)] if r.kind != NOT_FOUND else []
                if G.is_finite:
                    uppers.append(Fraction(0))  # x has finite order and cl(e) = 0
                if uppers:
                    record(name, x, [bavard_lower(z, 1, x)], uppers)
        return ok, {"comparisons": len(rows), "rows": rows}
    return _timed("11 Bavard lower bounds never exceed scl upper bounds", run)


SUITES = {
    "all": [
        lambda seed: check_cl_oracle(),
        lambda seed: check_commutator_chains(200, seed),
        lambda seed: check_fill_sandwich((2, 3, 4)),
        lambda seed: check_f2_scl(),
        lambda seed: check_separation(),
        lambda seed: check_surfaces(),
        lambda seed: check_rewrite(100, seed),
        lambda seed: check_freeindex(),
        lambda seed: check_extensions(),
        lambda seed: check_section_constants(),
        lambda seed: check_duality(),
    ],
    "quick": [
        lambda seed: check_cl_oracle(),
        lambda seed: check_commutator_chains(50, seed),
        lambda seed: check_fill_sandwich((2, 3)),
        lambda seed: check_f2_scl(outer_radius=None),
        lambda seed: check_separation(),
        lambda seed: check_surfaces(),
        lambda seed: check_rewrite(20, seed),
        lambda seed: check_freeindex(),
        lambda seed: check_extensions(4, 2),
        lambda seed: check_section_constants(),
        lambda seed: check_duality(2),
    ],
}


def run_suite(name: str = "quick", seed: int = DEFAULT_SEED, report: Callable | None = None) -> list[Check]:
    if name not in SUITES:
        raise KeyError(name)
    out = []
    for fn in SUITES[name]:
        c = fn(seed)
        if report is not None:
            report(c)
        out.append(c)
    return out
