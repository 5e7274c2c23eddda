"""Labelled triangulated surfaces.

Triangle σ with vertices v0, v1, v2 has faces ∂0σ = (v1, v2), ∂1σ = (v0, v2),
∂2σ = (v0, v1).  A pair (x, y) in a 2-chain becomes a triangle labelled
∂2 = x, ∂0 = y, ∂1 = xy, so labels satisfy f(∂1σ) = f(∂2σ)·f(∂0σ), and the
(G,N) condition asks f(∂0σ) ∈ N or f(∂2σ) ∈ N.  A face carries the induced
sign ε·(-1)^i; interior edges join faces of opposite induced sign.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .chains import Chain1, Chain2, boundary2, check_admissible, integral_fill_norm, support_ball, witness_commutator_chain
from .commlength import EXACT, SearchConfig, cl_mixed
from .errors import BoundaryMismatch, MalformedComplex, NonIntegral, NonNormalArgument, ProductMismatch
from .groups import Element, GroupContext, commutator, parse_element, product

log = logging.getLogger(__name__)

# vertex pair (start, end) of face i
FACE_VERTICES = ((1, 2), (0, 2), (0, 1))


@dataclass
class Triangle:
    sign: int
    faces: list  # edge id of ∂0, ∂1, ∂2


@dataclass
class DeltaSurface:
    triangles: list
    edges: list  # Element labels
    boundary: list  # edge ids
    pruned: int = 0

    def to_json(self):
        return {
            "triangles": [{"sign": t.sign, "faces": list(t.faces)} for t in self.triangles],
            "edges": [{"label": str(z)} for z in self.edges],
            "boundary": list(self.boundary),
        }

    @classmethod
    def from_json(cls, group, doc) -> "DeltaSurface":
        try:
            tris = [Triangle(int(t["sign"]), [int(f) for f in t["faces"]]) for t in doc["triangles"]]
            edges = [parse_element(group, e["label"]) for e in doc["edges"]]
            boundary = [int(b) for b in doc.get("boundary", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedComplex(f"bad surface document: {exc}") from exc
        return cls(tris, edges, boundary)

    def slots(self) -> dict:
        """edge id -> list of (triangle, face) occurrences."""
        out: dict[int, list] = {i: [] for i in range(len(self.edges))}
        for k, t in enumerate(self.triangles):
            for i, eid in enumerate(t.faces):
                out.setdefault(eid, []).append((k, i))
        return out

    def to_chain(self) -> Chain2:
        c = Chain2()
        for t in self.triangles:
            c.add((self.edges[t.faces[2]], self.edges[t.faces[0]]), t.sign)
        return c

    def to_svg(self, size: int = 360) -> str:
        """Boundary polygon of the triangles with edge labels (decorative)."""
        import math
        n = max(len(self.triangles), 3)
        r = size * 0.4
        cx = cy = size / 2
        pts = [(cx + r * math.cos(2 * math.pi * k / n), cy + r * math.sin(2 * math.pi * k / n)) for k in range(n)]
        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">']
        poly = " ".join(f"{x:.1f},{y:.1f}" for x, y in pts)
        out.append(f'<polygon points="{poly}" fill="#eef" stroke="#334"/>')
        for k, t in enumerate(self.triangles):
            x, y = pts[k % n]
            lab = ",".join(str(self.edges[f]) for f in t.faces)
            out.append(f'<text x="{x:.1f}" y="{y:.1f}" font-size="9">{"+" if t.sign > 0 else "-"}({lab})</text>')
        out.append("</svg>")
        return "\n".join(out)


@dataclass
class SurfaceReport:
    connected: bool
    orientable: bool
    boundary_edge_count: int
    p: int
    e: int
    s: int
    genus: int | None
    gn_labelled: bool
    euler_ok: bool | None = None
    notes: list = field(default_factory=list)

    def to_json(self):
        return {k: getattr(self, k) for k in
                ("connected", "orientable", "boundary_edge_count", "p", "e", "s", "genus", "gn_labelled", "euler_ok")}


class _DSU:
    def __init__(self):
        self.parent = {}

    def find(self, a):
        self.parent.setdefault(a, a)
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _components(n: int, adjacency) -> list[int]:
    dsu = _DSU()
    for k in range(n):
        dsu.find(k)
    for a, b in adjacency:
        dsu.union(a, b)
    return [dsu.find(k) for k in range(n)]


def validate(surface: DeltaSurface, ctx: GroupContext) -> SurfaceReport:
    """Check labelling, the (G,N) condition, face pairings and orientation; count p, e, s."""
    tris, edges = surface.triangles, surface.edges
    ne = len(edges)
    for k, t in enumerate(tris):
        if t.sign not in (1, -1):
            raise MalformedComplex(f"triangle {k} has sign {t.sign}")
        if len(t.faces) != 3 or any(not (0 <= f < ne) for f in t.faces):
            raise MalformedComplex(f"triangle {k} refers to a missing edge")
        f0, f1, f2 = (edges[f] for f in t.faces)
        if f1 != f2 * f0:
            raise MalformedComplex(f"triangle {k}: label of face 1 is not label(face 2)·label(face 0)")
    gn = True
    for k, t in enumerate(tris):
        if not (ctx.in_normal_subgroup(edges[t.faces[0]]) or ctx.in_normal_subgroup(edges[t.faces[2]])):
            raise MalformedComplex(f"triangle {k}: neither face 0 nor face 2 is labelled in N")
    bset = set(surface.boundary)
    if len(bset) != len(surface.boundary) or any(not (0 <= b < ne) for b in bset):
        raise MalformedComplex("boundary list is invalid")
    slots = surface.slots()
    orientable = True
    for eid in range(ne):
        occ = slots.get(eid, [])
        want = 1 if eid in bset else 2
        if len(occ) != want:
            raise MalformedComplex(f"edge {eid} is a face of {len(occ)} triangle slots, expected {want}")
        if want == 2:
            (k1, i1), (k2, i2) = occ
            s1 = tris[k1].sign * (-1) ** i1
            s2 = tris[k2].sign * (-1) ** i2
            if s1 + s2 != 0:
                orientable = False
    # vertices: corners glued through edge endpoints
    dsu = _DSU()
    for k, t in enumerate(tris):
        for i, eid in enumerate(t.faces):
            a, b = FACE_VERTICES[i]
            dsu.union(("c", k, a), ("e", eid, 0))
            dsu.union(("c", k, b), ("e", eid, 1))
    for k in range(len(tris)):
        for j in range(3):
            dsu.find(("c", k, j))
    p = len({dsu.find(x) for x in list(dsu.parent)})
    adj = []
    for occ in slots.values():
        if len(occ) == 2:
            adj.append((occ[0][0], occ[1][0]))
    comps = _components(len(tris), adj)
    connected = len(set(comps)) <= 1
    s, e = len(tris), ne
    genus = None
    euler_ok = None
    if connected and len(bset) == 1:
        chi = p - e + s
        if (1 - chi) % 2 == 0:
            genus = (1 - chi) // 2
        euler_ok = (s - e + p == 1 - 2 * genus if genus is not None else False) and (1 + 2 * (e - 1) == 3 * s)
    return SurfaceReport(connected, orientable, len(bset), p, e, s, genus, gn, euler_ok)


def build_from_chain(ctx: GroupContext, c: Chain2, x: Element) -> DeltaSurface:
    """Glue |coefficient| triangles per pair, matching faces label by label.

    Negative face occurrences of a label are matched to positive ones in
    (triangle, face) order; one positive x-face is left over as the
    boundary.  Components without the boundary are closed and are dropped.
    """
    if not c.is_integral():
        raise NonIntegral("chain has non-integral coefficients")
    check_admissible(ctx, c)
    if boundary2(c) != Chain1.of(x):
        raise BoundaryMismatch("the chain does not bound the given element")
    tris: list[Triangle] = []
    pos: dict[Element, list] = {}
    neg: dict[Element, list] = {}
    for (g1, g2), coeff in c.sorted_items():
        sign = 1 if coeff > 0 else -1
        for _ in range(abs(int(coeff))):
            k = len(tris)
            tris.append(Triangle(sign, [None, None, None]))
            for i, z in enumerate((g2, g1 * g2, g1)):
                (pos if sign * (-1) ** i > 0 else neg).setdefault(z, []).append((k, i))
    edges: list[Element] = []
    boundary: list[int] = []
    for z in sorted(set(pos) | set(neg)):
        A, B = pos.get(z, []), neg.get(z, [])
        for a, b in zip(A, B):
            eid = len(edges)
            edges.append(z)
            tris[a[0]].faces[a[1]] = eid
            tris[b[0]].faces[b[1]] = eid
        for a in A[len(B):]:
            eid = len(edges)
            edges.append(z)
            tris[a[0]].faces[a[1]] = eid
            boundary.append(eid)
    if len(boundary) != 1:
        raise BoundaryMismatch(f"gluing left {len(boundary)} unmatched faces")
    surf = DeltaSurface(tris, edges, boundary)
    return _prune(surf)


def _prune(surf: DeltaSurface) -> DeltaSurface:
    slots = surf.slots()
    adj = [(occ[0][0], occ[1][0]) for occ in slots.values() if len(occ) == 2]
    comps = _components(len(surf.triangles), adj)
    keep_comp = comps[slots[surf.boundary[0]][0][0]]
    keep = [k for k in range(len(surf.triangles)) if comps[k] == keep_comp]
    dropped = len(surf.triangles) - len(keep)
    if not dropped:
        return surf
    log.warning("pruned %d triangles in closed components", dropped)
    used = sorted({f for k in keep for f in surf.triangles[k].faces})
    remap = {old: new for new, old in enumerate(used)}
    tris = [Triangle(surf.triangles[k].sign, [remap[f] for f in surf.triangles[k].faces]) for k in keep]
    out = DeltaSurface(tris, [surf.edges[f] for f in used], [remap[surf.boundary[0]]], pruned=dropped)
    return out


def build_from_decomposition(ctx: GroupContext, pairs: Sequence[tuple], x: Element) -> DeltaSurface:
    """Genus-m surface with boundary x = ∏[gᵢ,hᵢ]: three triangles per handle plus an (m-1)-triangle fan."""
    if not pairs:
        raise ProductMismatch("at least one commutator is needed")
    G = ctx.group
    for g, h in pairs:
        if not ctx.in_normal_subgroup(h):
            raise NonNormalArgument(f"{h} is not in N")
    comms = [commutator(g, h) for g, h in pairs]
    if product(comms, G) != x:
        raise ProductMismatch("the commutators do not multiply to x")
    tris: list[Triangle] = []
    edges: list[Element] = []

    def edge(z):
        edges.append(z)
        return len(edges) - 1

    c_edges = []
    for (g, h), c in zip(pairs, comms):
        eg, eh, egh, ehg, ec = edge(g), edge(h), edge(g * h), edge(h * g), edge(c)
        # +([g,h], hg) - (g, h) + (h, g)
        tris.append(Triangle(1, [ehg, egh, ec]))
        tris.append(Triangle(-1, [eh, egh, eg]))
        tris.append(Triangle(1, [eg, ehg, eh]))
        c_edges.append(ec)
    prev_edge = c_edges[0]
    partial = comms[0]
    for j in range(1, len(pairs)):
        partial = partial * comms[j]
        nxt = edge(partial)
        # -(P_{j-1}, c_j)
        tris.append(Triangle(-1, [c_edges[j], nxt, prev_edge]))
        prev_edge = nxt
    return DeltaSurface(tris, edges, [prev_edge])


def surface_genus_from_counts(s: int, p: int) -> Fraction:
    """Genus from s = 4g + 2p - 3."""
    return Fraction(s + 3 - 2 * p, 4)


def genus_vs_cl_check(ctx: GroupContext, x: Element, cfg: SearchConfig | None = None,
                      qm_lower: int = 0, support_radius: int = 2, budget_nodes: int = 500) -> dict:
    """Genus of the decomposition surface vs cl, and of a minimal integral chain surface vs lower bounds."""
    cfg = cfg or SearchConfig()
    if x.is_identity():
        return {"genus_decomposition": 0, "cl": 0, "bracket": [0, 0], "ok": True}
    res = cl_mixed(ctx, x, cfg)
    if res.value is None:
        from .errors import ResourceLimit
        raise ResourceLimit("no commutator decomposition found within the search budget")
    surf = build_from_decomposition(ctx, res.witness, x)
    rep = validate(surf, ctx)
    ok = rep.genus == res.value
    lower = qm_lower
    if res.kind == EXACT:
        lower = max(lower, res.value)
    support = support_ball(ctx, None if ctx.group.is_finite else support_radius)
    incumbent = Chain2()
    for g, h in res.witness[:1] if res.value == 1 else []:
        incumbent = witness_commutator_chain(ctx, g, h)
    value, chain = integral_fill_norm(ctx, x, support, budget_nodes=budget_nodes,
                                      incumbent=incumbent or None)
    chain_surf = build_from_chain(ctx, chain, x)
    crep = validate(chain_surf, ctx)
    if crep.genus is not None and crep.genus < lower:
        ok = False
    return {
        "cl": res.to_json(),
        "genus_decomposition": rep.genus,
        "integral_norm": value,
        "genus_chain_surface": crep.genus,
        "bracket": [lower, res.value],
        "ok": ok,
    }
