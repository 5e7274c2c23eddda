"""Mixed commutator length cl_{G,N}: exact on finite groups, bounded search elsewhere.

Also carries the rewriting identity for products of commutators with
matching quotients (3 mixed commutators per factor), the prefix-collision
window, the central-section reduction and the section constant C(s).
"""
from __future__ import annotations

import logging
import time
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import (
    CentralityViolated,
    FalsifiedCertificate,
    GroupMismatch,
    NonpositiveDefect,
    PreconditionViolated,
    ResourceLimit,
)
from .groups import (
    DEFAULT_ELEMENT_CAP,
    Element,
    Group,
    GroupContext,
    all_elements,
    commutator,
    conjugate,
    enumerate_ball,
    product,
)

log = logging.getLogger(__name__)

EXACT = "exact"
UPPER = "upper-bound"
NOT_FOUND = "not-found"


@dataclass
class SearchConfig:
    ball_radius: int = 2
    max_factors: int = 2
    element_cap: int = DEFAULT_ELEMENT_CAP
    meet_in_middle: bool = True
    budget_ms: int | None = None

    def __post_init__(self):
        if self.ball_radius < 1 or self.max_factors < 1:
            raise ValueError("ball_radius and max_factors must be >= 1")


class _Clock:
    def __init__(self, budget_ms):
        self.deadline = None if budget_ms is None else time.monotonic() + budget_ms / 1000

    def check(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise ResourceLimit("time budget exhausted")


@dataclass
class ClResult:
    kind: str
    value: int | None = None
    witness: list = field(default_factory=list)  # [(g, h)] with x = ∏[g, h]

    def verify(self, ctx: GroupContext, x: Element) -> bool:
        if self.kind == NOT_FOUND:
            return True
        if len(self.witness) != self.value:
            return False
        if any(not ctx.in_normal_subgroup(h) for _, h in self.witness):
            return False
        return product((commutator(g, h) for g, h in self.witness), x.group) == x

    def to_json(self):
        return {
            "kind": self.kind,
            "value": self.value,
            "witness": [[str(g), str(h)] for g, h in self.witness],
        }


# -- finite groups ------------------------------------------------------------------------------

@dataclass
class _ClTable:
    commutators: dict  # value -> (g, h), first in element order
    dist: dict  # canon -> cl
    parent: dict  # canon -> (previous canon, commutator value)


def mixed_commutators(ctx: GroupContext) -> dict:
    """All distinct [g, h] (g ∈ G, h ∈ N) of a finite group with a witness pair each."""
    elems = all_elements(ctx.group)
    normal = [h for h in elems if ctx.in_normal_subgroup(h)]
    out: dict[Element, tuple] = {}
    for g in elems:
        for h in normal:
            c = commutator(g, h)
            if c not in out:
                out[c] = (g, h)
    return out


def _cl_table(ctx: GroupContext) -> _ClTable:
    cached = getattr(ctx, "_cl_table", None)
    if cached is not None:
        return cached
    comms = mixed_commutators(ctx)
    steps = [c for c in comms if not c.is_identity()]
    G = ctx.group
    e = G.identity
    dist = {e: 0}
    parent = {}
    queue = deque([e])
    while queue:
        y = queue.popleft()
        for c in steps:
            z = G.mul(y, c.canon)
            if z not in dist:
                dist[z] = dist[y] + 1
                parent[z] = (y, c)
                queue.append(z)
    table = _ClTable(comms, dist, parent)
    ctx._cl_table = table
    return table


def mixed_commutator_subgroup(ctx: GroupContext) -> list[Element]:
    """[G, N] for finite G, in BFS order from e."""
    G = ctx.group
    return [G.element(c) for c in _cl_table(ctx).dist]


def _cl_finite(ctx: GroupContext, x: Element) -> ClResult:
    table = _cl_table(ctx)
    if x.canon not in table.dist:
        return ClResult(NOT_FOUND)
    steps = []
    z = x.canon
    while z in table.parent:
        z, c = table.parent[z]
        steps.append(c)
    steps.reverse()
    return ClResult(EXACT, len(steps), [table.commutators[c] for c in steps])


# -- bounded search -----------------------------------------------------------------------------

def ball_commutators(ctx: GroupContext, radius: int, cap: int = DEFAULT_ELEMENT_CAP) -> dict:
    """Distinct nontrivial [g, h] with g, h in the radius ball and h ∈ N, each with its first witness."""
    ball = enumerate_ball(ctx.group, radius, cap=cap)
    normal = [h for h in ball if ctx.in_normal_subgroup(h)]
    out: dict[Element, tuple] = {}
    for g in ball:
        for h in normal:
            c = commutator(g, h)
            if not c.is_identity() and c not in out:
                out[c] = (g, h)
    return out


def _grow(levels: list[dict], comms: dict, cap: int, clock: _Clock, target=None):
    """Append the set of elements first reached with one more commutator.

    Stops early (returning the path) once ``target`` is reached.
    """
    seen = set()
    for lv in levels:
        seen.update(lv)
    nxt: dict[Element, tuple] = {}
    for y, path in levels[-1].items():
        clock.check()
        for c in comms:
            z = y * c
            if z not in seen and z not in nxt:
                nxt[z] = path + (c,)
                if z == target:
                    levels.append(nxt)
                    return nxt[z]
                if len(seen) + len(nxt) > cap:
                    raise ResourceLimit(f"commutator products exceeded {cap} elements")
    levels.append(nxt)
    return None


def _cl_search(ctx: GroupContext, x: Element, cfg: SearchConfig) -> ClResult:
    clock = _Clock(cfg.budget_ms)
    comms = ball_commutators(ctx, cfg.ball_radius, cap=cfg.element_cap)
    e = x.group.e()
    levels: list[dict] = [{e: ()}]

    def found(path):
        return ClResult(UPPER, len(path), [comms[c] for c in path])

    def lookup(z, upto):
        for k in range(min(upto, len(levels) - 1) + 1):
            if z in levels[k]:
                return levels[k][z]
        return None

    for k in range(1, cfg.max_factors + 1):
        clock.check()
        if not cfg.meet_in_middle:
            path = _grow(levels, comms, cfg.element_cap, clock, target=x)
            if path is not None:
                return found(path)
            continue
        k1, k2 = (k + 1) // 2, k // 2
        while len(levels) <= k1:
            _grow(levels, comms, cfg.element_cap, clock)
        # any product of k factors splits as (first k1)(last k2); levels hold
        # shortest paths, so both halves are looked up among all shorter levels
        for j in range(k2 + 1):
            for z, zpath in levels[j].items():
                ypath = lookup(x * z.inverse(), k1)
                if ypath is not None:
                    return found(ypath + zpath)
    return ClResult(NOT_FOUND)


def cl_mixed(ctx: GroupContext, x: Element, cfg: SearchConfig | None = None) -> ClResult:
    """cl_{G,N}(x): exact on finite groups, a witnessed upper bound otherwise."""
    cfg = cfg or SearchConfig()
    if x.group is not ctx.group:
        raise GroupMismatch("element is not in the context group")
    if x.is_identity():
        return ClResult(EXACT, 0, [])
    if ctx.group.is_finite:
        return _cl_finite(ctx, x)
    return _cl_search(ctx, x, cfg)


def cl_plain(group: Group, x: Element, cfg: SearchConfig | None = None) -> ClResult:
    return cl_mixed(_full_context(group), x, cfg)


def _full_context(group: Group) -> GroupContext:
    cached = getattr(group, "_full_ctx", None)
    if cached is None:
        cached = GroupContext.full(group)
        group._full_ctx = cached
    return cached


def cl_lower_from_qm(defect_upper, x: Element | None, f_at_x) -> int:
    """⌈(|f(x)|/D + 1)/2⌉ from |f(x)| <= (2m - 1)·D; 0 for the identity."""
    D = Fraction(defect_upper)
    if D <= 0:
        raise NonpositiveDefect("defect bound must be positive")
    if x is not None and x.is_identity():
        return 0
    t = (abs(Fraction(f_at_x)) / D + 1) / 2
    return -((-t.numerator) // t.denominator)


# -- scl report ---------------------------------------------------------------------------------

@dataclass
class SclReport:
    lower: Fraction = Fraction(0)
    upper: Fraction | None = None
    lower_certificates: list = field(default_factory=list)
    upper_certificates: list = field(default_factory=list)

    def add_upper(self, value, cert: dict):
        value = Fraction(value)
        self.upper_certificates.append({**cert, "value": str(value)})
        if self.upper is None or value < self.upper:
            self.upper = value

    def add_lower(self, value, cert: dict):
        value = Fraction(value)
        self.lower_certificates.append({**cert, "value": str(value)})
        if value > self.lower:
            self.lower = value

    def check(self):
        if self.upper is not None and self.lower > self.upper:
            raise FalsifiedCertificate(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    def to_json(self):
        return {
            "lower": str(self.lower),
            "upper": None if self.upper is None else str(self.upper),
            "lower_certificates": self.lower_certificates,
            "upper_certificates": self.upper_certificates,
        }


def scl_mixed_report(ctx: GroupContext, x: Element, cfg: SearchConfig | None = None,
                     powers: Iterable[int] = (1, 2), lower_certificates: Iterable = ()) -> SclReport:
    """Bracket scl_{G,N}(x) by cl(xⁿ)/n from search and supplied quasimorphism bounds.

    ``lower_certificates`` holds ``(value, certificate-dict)`` pairs, e.g. Bavard bounds.
    """
    cfg = cfg or SearchConfig()
    rep = SclReport()
    for n in powers:
        if n < 1:
            raise ValueError("powers must be positive")
        res = cl_mixed(ctx, x ** n, cfg)
        if res.kind != NOT_FOUND:
            rep.add_upper(Fraction(res.value, n), {"source": "cl-search", "n": n, "cl": res.to_json()})
        if res.kind == NOT_FOUND or res.value > 1:
            seed = power_commutator_search(ctx, x, n)
            if seed is not None:
                rep.add_upper(Fraction(1, n), {"source": "power-commutator", "n": n, "cl": seed.to_json()})
    for value, cert in lower_certificates:
        rep.add_lower(value, cert)
    rep.check()
    return rep


def power_commutator_search(ctx: GroupContext, x: Element, n: int, radius: int = 1) -> ClResult | None:
    """A single commutator [g, xʲ] = xⁿ with g in a small ball and |j| <= n, if one exists.

    Catches identities like x²ᵐ = [z, x⁻ᵐ] whose second entry is far outside any search ball.
    """
    target = x ** n
    if target.is_identity():
        return None
    powers = [(j, x ** j) for j in range(-n, n + 1) if j]
    powers = [(j, p) for j, p in powers if ctx.in_normal_subgroup(p)]
    for g in enumerate_ball(ctx.group, radius):
        for _, p in powers:
            if commutator(g, p) == target:
                return ClResult(UPPER, 1, [(g, p)])
    return None


# -- rewriting with matching quotients ----------------------------------------------------------

def rewrite_matching_quotients(ctx: GroupContext, quads: Sequence[tuple]) -> tuple[Element, int, list]:
    """Write ∏[fᵢ,gᵢ]·(∏[αᵢ,βᵢ])⁻¹ as at most 3k mixed commutators.

    Needs q(fᵢ) = q(αᵢ) and q(gᵢ) = q(βᵢ).  With h₁ = α⁻¹f, h₂ = β⁻¹g in N,
    [f,g][α,β]⁻¹ = (αβ)·[β⁻¹,h₁][h₁,h₂][α, α⁻¹h₂α]·(αβ)⁻¹, and the k-th factor
    is further conjugated by ∏_{i<k}[αᵢ,βᵢ].
    """
    G = ctx.group
    e = G.e()
    if not quads:
        return e, 0, []
    witness = []
    gamma = e
    lhs_p, lhs_q = e, e
    for f, g, a, b in quads:
        if ctx.q(f) != ctx.q(a) or ctx.q(g) != ctx.q(b):
            raise PreconditionViolated("quotient images of (f, g) and (alpha, beta) differ")
        h1 = a.inverse() * f
        h2 = b.inverse() * g
        conj = gamma * a * b
        for u, v in ((b.inverse(), h1), (h1, h2), (a, conjugate(a.inverse(), h2))):
            witness.append((conjugate(conj, u), conjugate(conj, v)))
        gamma = gamma * commutator(a, b)
        lhs_p = lhs_p * commutator(f, g)
        lhs_q = lhs_q * commutator(a, b)
    y = lhs_p * lhs_q.inverse()
    if not ctx.in_normal_subgroup(y):
        raise FalsifiedCertificate("rewritten product is not in N")
    if product((commutator(u, v) for u, v in witness), G) != y:
        raise FalsifiedCertificate("rewrite witness does not multiply back to the product")
    if any(not ctx.in_normal_subgroup(v) for _, v in witness):
        raise FalsifiedCertificate("rewrite witness has a second argument outside N")
    return y, 3 * len(quads), witness


def pigeonhole_window(W: Group | Callable, ws: Sequence, identity=None) -> tuple[int, int]:
    """1-based (i, j), i <= j, with wᵢ⋯wⱼ trivial, found by a prefix-product collision.

    ``W`` is a group (``ws`` are its elements) or a binary multiplication with
    ``identity`` given explicitly.
    """
    if isinstance(W, Group):
        mul = lambda a, b: a * b
        identity = W.e()
    else:
        mul = W
    seen = {identity: 0}
    p = identity
    for j, w in enumerate(ws, start=1):
        p = mul(p, w)
        if p in seen:
            return seen[p] + 1, j
        seen[p] = j
    raise PreconditionViolated("no window found; the list is shorter than the group order")


def central_section_reduce(ctx: GroupContext, alpha: Element, beta: Element,
                           t: Callable[[Element], Element] | dict) -> Element:
    """b = t(β)⁻¹β with t(β) central, so that [α, β] = [α, b]."""
    tb = t[beta] if isinstance(t, dict) else t(beta)
    G = ctx.group
    probes = all_elements(G) if G.is_finite else [G.gen(i) for i in range(len(G.generators))]
    for p in probes:
        if p * tb != tb * p:
            raise CentralityViolated(f"t(beta) = {tb} does not commute with {p}")
    b = tb.inverse() * beta
    if commutator(alpha, beta) != commutator(alpha, b):
        raise FalsifiedCertificate("[alpha, beta] != [alpha, b] after the central reduction")
    return b


# -- section constants --------------------------------------------------------------------------

def _closure(G: Group, seeds: Iterable[Element]) -> set:
    seeds = list(seeds)
    out = {G.e()}
    frontier = [G.e()]
    while frontier:
        nxt = []
        for y in frontier:
            for s in seeds:
                z = y * s
                if z not in out:
                    out.add(z)
                    nxt.append(z)
        frontier = nxt
    return out


@dataclass
class SectionData:
    section: dict  # Q element -> G element
    generated: list  # G(s)
    Ms: int
    Cs: Fraction
    commutator_subgroup_size: int = 0
    intersection_size: int = 0
    checked: int = 0
    worst_ratio: Fraction = Fraction(0)
    cs_witness: tuple | None = None

    def to_json(self):
        return {
            "section": {str(k): str(v) for k, v in self.section.items()},
            "G(s)_order": len(self.generated),
            "M(s)": self.Ms,
            "C(s)": str(self.Cs),
            "[G(s),G(s)]_order": self.commutator_subgroup_size,
            "intersection_order": self.intersection_size,
            "checked_elements": self.checked,
            "max_cl_ratio": str(self.worst_ratio),
        }


def default_section(ctx: GroupContext) -> dict:
    """The section choosing, for each quotient element, the first preimage in element order."""
    s = {}
    for g in all_elements(ctx.group):
        s.setdefault(ctx.q(g), g)
    return s


def compute_section_constants(ctx: GroupContext, s: dict | None = None, budget: int = 2_000_000) -> SectionData:
    """G(s), M(s) = #W(s) and C(s) for finite G; checks cl_{G,N} <= (C(s)+3)·cl_G on [G,N]."""
    G = ctx.group
    if not G.is_finite:
        raise PreconditionViolated("section constants are computed for finite groups only")
    s = dict(s) if s is not None else default_section(ctx)
    image = {ctx.q(g) for g in all_elements(G)}
    for qv in image:
        if qv not in s:
            raise PreconditionViolated(f"section undefined at {qv}")
    for qv, g in s.items():
        if ctx.q(g) != qv:
            raise PreconditionViolated(f"q(s({qv})) != {qv}")
        if qv.is_identity() and not g.is_identity():
            raise PreconditionViolated("section must send e to e")
    sq = sorted(set(s.values()))
    gen = _closure(G, sq)
    comm_gs = _closure(G, {commutator(a, b) for a in gen for b in gen})
    gn = set(mixed_commutator_subgroup(ctx))
    inter = comm_gs & gn
    Ms = len(comm_gs) // len(inter)

    # products of k values [α, β] (α, β ∈ s(Q)); track the reachable set per k
    steps = sorted({commutator(a, b) for a in sq for b in sq})
    table = _cl_table(ctx)
    best = Fraction(0)
    best_at = None
    level = {G.e()}
    work = 0
    for k in range(1, Ms + 1):
        nxt = set()
        for y in level:
            for c in steps:
                nxt.add(y * c)
                work += 1
                if work > budget:
                    raise ResourceLimit("section constant enumeration exceeded its budget")
        level = nxt
        for y in level:
            if y in gn:
                r = Fraction(table.dist[y.canon], k)
                if r > best:
                    best, best_at = r, (k, y)
    data = SectionData(s, sorted(gen), Ms, best, len(comm_gs), len(inter), cs_witness=best_at)

    plain = _cl_table(_full_context(G))
    bound = best + 3
    for y in sorted(gn):
        mixed = table.dist[y.canon]
        full = plain.dist[y.canon]
        data.checked += 1
        if full:
            data.worst_ratio = max(data.worst_ratio, Fraction(mixed, full))
        if mixed > bound * full:
            raise FalsifiedCertificate(f"cl_G,N({y}) = {mixed} exceeds (C(s)+3)·cl_G = {bound * full}")
    return data
