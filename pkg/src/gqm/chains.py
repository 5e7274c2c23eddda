"""Chains on the bar complex restricted to pairs with a coordinate in N.

A 2-chain is a sparse map ``(g1, g2) -> coefficient`` with
``∂(g1, g2) = g2 - g1·g2 + g1``.  The filling norm of a 1-chain is the
least ℓ¹ norm of a 2-chain bounding it; on a finite support this is a
linear program whose dual variables form an N-quasimorphism with
``|f(g2) - f(g1 g2) + f(g1)| <= 1`` on the support.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import lp
from .errors import BoundaryMismatch, Infeasible, MissingValue, PreconditionViolated, ResourceLimit
from .groups import Element, GroupContext, all_elements, commutator, enumerate_ball, parse_element

log = logging.getLogger(__name__)

Pair2 = tuple  # (Element, Element)


class Chain1(dict):
    """Sparse 1-chain ``Element -> Fraction``; zero coefficients are dropped."""

    def add(self, g: Element, coeff) -> None:
        v = self.get(g, 0) + coeff
        if v:
            self[g] = Fraction(v)
        else:
            self.pop(g, None)

    @classmethod
    def of(cls, x: Element, coeff=1) -> "Chain1":
        out = cls()
        out.add(x, coeff)
        return out

    def l1(self) -> Fraction:
        return sum((abs(v) for v in self.values()), Fraction(0))

    def to_json(self):
        items = sorted(self.items(), key=lambda kv: kv[0].group.sort_key(kv[0].canon))
        return [{"element": str(g), "coeff": str(v)} for g, v in items]


class Chain2(dict):
    """Sparse 2-chain ``(g1, g2) -> Fraction``."""

    def add(self, pair: Pair2, coeff) -> None:
        v = self.get(pair, 0) + coeff
        if v:
            self[pair] = Fraction(v)
        else:
            self.pop(pair, None)

    def l1(self) -> Fraction:
        return sum((abs(v) for v in self.values()), Fraction(0))

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.values())

    def sorted_items(self):
        def key(kv):
            (g1, g2), _ = kv
            G = g1.group
            return (G.sort_key(g1.canon), G.sort_key(g2.canon))
        return sorted(self.items(), key=key)

    def to_json(self):
        return [{"pair": [str(g1), str(g2)], "coeff": str(v)} for (g1, g2), v in self.sorted_items()]

    @classmethod
    def from_json(cls, group, doc) -> "Chain2":
        out = cls()
        for item in doc:
            g1, g2 = (parse_element(group, w) for w in item["pair"])
            out.add((g1, g2), Fraction(item["coeff"]))
        return out


def is_admissible(ctx: GroupContext, pair: Pair2) -> bool:
    g1, g2 = pair
    return ctx.in_normal_subgroup(g1) or ctx.in_normal_subgroup(g2)


def check_admissible(ctx: GroupContext, c: Chain2) -> None:
    for pair in c:
        if not is_admissible(ctx, pair):
            raise PreconditionViolated(f"pair ({pair[0]}, {pair[1]}) has no coordinate in N")


def pair_boundary(pair: Pair2) -> list[tuple[Element, int]]:
    g1, g2 = pair
    return [(g2, 1), (g1 * g2, -1), (g1, 1)]


def boundary2(c: Chain2) -> Chain1:
    out = Chain1()
    for pair, coeff in c.items():
        for g, s in pair_boundary(pair):
            out.add(g, s * coeff)
    return out


def witness_commutator_chain(ctx: GroupContext, g: Element, h: Element) -> Chain2:
    """``([g,h], hg) - (g, h) + (h, g)``, whose boundary is ``[g, h]``."""
    if not ctx.in_normal_subgroup(h):
        raise PreconditionViolated("second argument of a mixed commutator must lie in N")
    c = Chain2()
    c.add((commutator(g, h), h * g), 1)
    c.add((g, h), -1)
    c.add((h, g), 1)
    return c


def support_ball(ctx: GroupContext, radius: int | None = None, cap: int = 2_000_000,
                 max_product_length: int | None = None) -> list[Pair2]:
    """All admissible pairs with both coordinates in the radius ball.

    ``radius=None`` takes the whole group (finite groups only).  With
    ``max_product_length`` only pairs whose product also lies in that ball are kept.
    """
    if radius is None:
        elems = all_elements(ctx.group)
    else:
        elems = enumerate_ball(ctx.group, radius, cap=cap)
    in_n = [ctx.in_normal_subgroup(x) for x in elems]
    out = [(g1, g2) for i, g1 in enumerate(elems) for j, g2 in enumerate(elems) if in_n[i] or in_n[j]]
    if max_product_length is not None:
        inner = set(enumerate_ball(ctx.group, max_product_length, cap=cap))
        out = [(g1, g2) for g1, g2 in out if g1 * g2 in inner]
    return out


@dataclass
class FillResult:
    value: Fraction
    witness: Chain2
    dual: dict  # Element -> Fraction
    support: list
    method: str = "exact-simplex"
    notes: list = field(default_factory=list)

    def dual_json(self):
        items = sorted(self.dual.items(), key=lambda kv: kv[0].group.sort_key(kv[0].canon))
        return [{"element": str(g), "value": str(v)} for g, v in items if v]


def _build_lp(target: Chain1, support: Sequence[Pair2]):
    rows: dict[Element, int] = {}
    cols = []
    for pair in support:
        col: dict[int, int] = {}
        for g, s in pair_boundary(pair):
            i = rows.setdefault(g, len(rows))
            col[i] = col.get(i, 0) + s
        col = {i: v for i, v in col.items() if v}
        cols.append(col)
    missing = [g for g in target if g not in rows]
    if missing:
        raise Infeasible(f"target element {missing[0]} does not occur in any support boundary")
    b = [Fraction(0)] * len(rows)
    for g, v in target.items():
        b[rows[g]] = v
    # split c = c⁺ - c⁻
    split = cols + [{i: -a for i, a in col.items()} for col in cols]
    cost = [1] * len(split)
    return rows, split, cost, b


def fill_norm_lp(ctx: GroupContext, target: Chain1, support: Iterable[Pair2], method: str = "auto") -> FillResult:
    """Least ℓ¹ filling of ``target`` by chains on ``support`` (exact optimum)."""
    support = list(dict.fromkeys(support))
    for pair in support:
        if not is_admissible(ctx, pair):
            raise PreconditionViolated(f"support pair ({pair[0]}, {pair[1]}) is not admissible")
    target = Chain1({g: Fraction(v) for g, v in target.items() if v})
    if not target:
        return FillResult(Fraction(0), Chain2(), {}, support, method="trivial")
    rows, split, cost, b = _build_lp(target, support)
    sol = lp.solve(cost, split, b, method=method)
    k = len(support)
    witness = Chain2()
    for j, pair in enumerate(support):
        v = sol.x[j] - sol.x[j + k]
        if v:
            witness.add(pair, v)
    dual = {g: sol.y[i] for g, i in rows.items()}
    res = FillResult(sol.value, witness, dual, support, method=sol.method, notes=list(sol.notes))
    # exact post-conditions; any failure is a solver defect
    if boundary2(witness) != target or witness.l1() != res.value:
        raise BoundaryMismatch("LP witness does not bound the target")
    feasible, objective = verify_dual_certificate(ctx, dual, support, target)
    if not feasible or objective != res.value:
        raise BoundaryMismatch("LP dual certificate does not match the primal value")
    return res


def verify_dual_certificate(ctx: GroupContext, dual: dict, support: Iterable[Pair2],
                            target: Chain1) -> tuple[bool, Fraction]:
    """Check ``|f(g2) - f(g1 g2) + f(g1)| <= 1`` on the support and evaluate ``<f, target>``."""
    keys = list(dual)
    L, scaled = lp._common_scale([Fraction(dual[g]) for g in keys])
    val = dict(zip(keys, scaled))
    feasible = True
    for pair in support:
        total = 0
        for g, s in pair_boundary(pair):
            if g not in val:
                raise MissingValue(f"dual has no value at {g}")
            total += s * val[g]
        if abs(total) > L:
            feasible = False
            break
    objective = Fraction(0)
    for g, v in target.items():
        if g not in dual:
            raise MissingValue(f"dual has no value at {g}")
        objective += v * dual[g]
    return feasible, objective


def fill_norm(ctx: GroupContext, x: Element, support: Iterable[Pair2], method: str = "auto") -> FillResult:
    """``‖x‖'`` restricted to ``support``; the identity is treated as the zero chain."""
    if x.is_identity():
        return FillResult(Fraction(0), Chain2(), {}, list(support), method="trivial")
    return fill_norm_lp(ctx, Chain1.of(x), support, method=method)


def scl_upper_from_fill(ctx: GroupContext, x: Element, n: int, support: Iterable[Pair2],
                        method: str = "auto") -> tuple[Fraction, FillResult]:
    """``(‖xⁿ‖' + 1) / (4n)``, an upper bound for scl_{G,N}(x)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    res = fill_norm(ctx, x ** n, support, method=method)
    return (res.value + 1) / (4 * n), res


# -- integral filling by branch and bound ------------------------------------------------------

@dataclass
class _Node:
    lower: dict
    upper: dict


def integral_fill_norm(ctx: GroupContext, x: Element, support: Iterable[Pair2],
                       budget_nodes: int = 2000, incumbent: Chain2 | None = None,
                       method: str = "auto") -> tuple[int, Chain2]:
    """Least ℓ¹ over integral chains on ``support`` bounding ``x`` (branch and bound)."""
    support = list(dict.fromkeys(support))
    if x.is_identity():
        return 0, Chain2()
    target = Chain1.of(x)
    rows, split, cost, b = _build_lp(target, support)
    k = len(support)
    nvar = len(split)
    best_val = math.inf
    best: Chain2 | None = None
    if incumbent is not None and boundary2(incumbent) == target and incumbent.is_integral():
        best_val, best = int(incumbent.l1()), incumbent

    def relax(node: _Node):
        cols = [dict(c) for c in split]
        cst = list(cost)
        bb = list(b)
        # bounds become rows with slack columns: x_j + s = u  /  x_j - s = l
        for j, u in node.upper.items():
            r = len(bb)
            bb.append(Fraction(u))
            cols[j][r] = Fraction(1)
            cols.append({r: Fraction(1)})
            cst.append(Fraction(0))
        for j, lo in node.lower.items():
            r = len(bb)
            bb.append(Fraction(lo))
            cols[j][r] = Fraction(1)
            cols.append({r: Fraction(-1)})
            cst.append(Fraction(0))
        return lp.solve(cst, cols, bb, method=method)

    stack = [_Node({}, {})]
    nodes = 0
    while stack:
        node = stack.pop()
        nodes += 1
        if nodes > budget_nodes:
            raise ResourceLimit(f"branch and bound exceeded {budget_nodes} nodes")
        try:
            sol = relax(node)
        except Infeasible:
            continue
        bound = math.ceil(sol.value)
        if bound >= best_val:
            continue
        frac_j = next((j for j in range(nvar) if sol.x[j].denominator != 1), None)
        if frac_j is None:
            chain = Chain2()
            for j, pair in enumerate(support):
                v = sol.x[j] - sol.x[j + k]
                if v:
                    chain.add(pair, v)
            val = int(chain.l1())
            if val < best_val:
                best_val, best = val, chain
            continue
        v = sol.x[frac_j]
        down = _Node(dict(node.lower), dict(node.upper))
        down.upper[frac_j] = math.floor(v)
        up = _Node(dict(node.lower), dict(node.upper))
        up.lower[frac_j] = math.floor(v) + 1
        stack.append(up)
        stack.append(down)
    if best is None:
        raise Infeasible("no integral chain on the support bounds the target")
    if boundary2(best) != target:
        raise BoundaryMismatch("integral witness does not bound the target")
    return best_val, best
