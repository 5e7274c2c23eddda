import pytest

from gqm import fixtures
from gqm.chains import witness_commutator_chain
from gqm.errors import MalformedComplex, NonNormalArgument, ProductMismatch
from gqm.groups import commutator, product
from gqm.surfaces import (
    DeltaSurface,
    Triangle,
    build_from_chain,
    build_from_decomposition,
    genus_vs_cl_check,
    surface_genus_from_counts,
    validate,
)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_decomposition_counts(m):
    ctx = fixtures.free_context(2 * m)
    G = ctx.group
    pairs = [(G.gen(2 * i), G.gen(2 * i + 1)) for i in range(m)]
    x = product((commutator(g, h) for g, h in pairs), G)
    surf = build_from_decomposition(ctx, pairs, x)
    rep = validate(surf, ctx)
    assert (rep.s, rep.e, rep.p, rep.genus) == (4 * m - 1, 6 * m - 1, 1, m)
    assert rep.s - rep.e + rep.p == 1 - 2 * m
    assert 1 + 2 * (rep.e - 1) == 3 * rep.s
    assert surface_genus_from_counts(rep.s, rep.p) == m
    assert surf.to_chain() and rep.euler_ok


def test_decomposition_in_mixed_context():
    ctx = fixtures.dihedral_context(4)
    G = ctx.group
    x = G("r r")
    rep = validate(build_from_decomposition(ctx, [(G("s"), G("r"))], x), ctx)
    assert rep.genus == 1 and rep.gn_labelled


def test_decomposition_errors():
    ctx = fixtures.dihedral_context(4)
    G = ctx.group
    with pytest.raises(NonNormalArgument):
        build_from_decomposition(ctx, [(G("r"), G("s"))], commutator(G("r"), G("s")))
    with pytest.raises(ProductMismatch):
        build_from_decomposition(ctx, [(G("s"), G("r"))], G("r"))
    with pytest.raises(ProductMismatch):
        build_from_decomposition(ctx, [], G.e())


def test_chain_surface_of_commutator_witness():
    ctx = fixtures.free_context(2)
    G = ctx.group
    g, h = G("a"), G("b")
    x = commutator(g, h)
    surf = build_from_chain(ctx, witness_commutator_chain(ctx, g, h), x)
    rep = validate(surf, ctx)
    assert rep.connected and rep.genus == 1 and rep.p == 1
    assert [surf.edges[i] for i in surf.boundary] == [x]


def test_surface_json_round_trip():
    ctx = fixtures.free_context(4)
    G = ctx.group
    pairs = [(G("a"), G("b")), (G("c"), G("d"))]
    x = G("[a,b][c,d]")
    surf = build_from_decomposition(ctx, pairs, x)
    back = DeltaSurface.from_json(G, surf.to_json())
    assert back.to_json() == surf.to_json()
    assert validate(back, ctx).genus == 2
    assert surf.to_svg().startswith("<svg")


def test_validate_rejects_incoherent_labels():
    ctx = fixtures.free_context(2)
    G = ctx.group
    surf = build_from_decomposition(ctx, [(G("a"), G("b"))], G("[a,b]"))
    doc = surf.to_json()
    doc["edges"][0]["label"] = "a a"
    with pytest.raises(MalformedComplex):
        validate(DeltaSurface.from_json(G, doc), ctx)


def test_validate_rejects_bad_references_and_signs():
    ctx = fixtures.free_context(2)
    G = ctx.group
    with pytest.raises(MalformedComplex):
        validate(DeltaSurface([Triangle(2, [0, 0, 0])], [G.e()], []), ctx)
    with pytest.raises(MalformedComplex):
        validate(DeltaSurface([Triangle(1, [0, 1, 7])], [G.e(), G.e()], []), ctx)
    with pytest.raises(MalformedComplex):
        DeltaSurface.from_json(G, {"triangles": [{"sign": 1}], "edges": []})


def test_validate_requires_an_n_face():
    ctx = fixtures.dihedral_context(4)
    G = ctx.group
    s = G("s")
    # (s, s): coherent labels but neither ∂0 nor ∂2 in N
    with pytest.raises(MalformedComplex):
        validate(DeltaSurface([Triangle(1, [0, 1, 0])], [s, G.e()], []), ctx)


@pytest.mark.parametrize("make,text", [(fixtures.dihedral_context, "r r"), (lambda: fixtures.free_context(2), "[a,b]")])
def test_genus_matches_cl(make, text):
    ctx = make()
    out = genus_vs_cl_check(ctx, ctx.group(text))
    assert out["ok"] and out["genus_decomposition"] == 1
