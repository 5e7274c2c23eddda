from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gqm import fixtures
from gqm.commlength import (
    EXACT,
    NOT_FOUND,
    UPPER,
    SclReport,
    SearchConfig,
    central_section_reduce,
    cl_lower_from_qm,
    cl_mixed,
    cl_plain,
    compute_section_constants,
    rewrite_matching_quotients,
    mixed_commutator_subgroup,
    pigeonhole_window,
    power_commutator_search,
    scl_mixed_report,
)
from gqm.errors import (
    CentralityViolated,
    FalsifiedCertificate,
    GroupMismatch,
    NonpositiveDefect,
    PreconditionViolated,
    ResourceLimit,
)
from gqm.groups import commutator, product
from gqm.verify import brute_force_cl
from strategies import finite_elements, normal_elements, words


def test_dihedral_rotation_square():
    ctx = fixtures.dihedral_context(4)
    res = cl_mixed(ctx, ctx.group("r r"))
    assert (res.kind, res.value) == (EXACT, 1)
    assert res.verify(ctx, ctx.group("r r"))
    assert sorted(str(x) for x in mixed_commutator_subgroup(ctx)) == ["e", "r r"]


def test_identity_has_length_zero():
    for ctx in (fixtures.dihedral_context(4), fixtures.free_context(2)):
        res = cl_mixed(ctx, ctx.group.e())
        assert (res.kind, res.value, res.witness) == (EXACT, 0, [])


def test_free_group_commutator_upper_bounds():
    F = fixtures.free_context(2).group
    assert cl_plain(F, F("[a,b]")).value == 1
    res = cl_plain(F, F("[a,b]^2"))
    assert res.kind == UPPER and res.value == 2


def test_not_found_with_tiny_budget():
    F = fixtures.free_context(2).group
    res = cl_plain(F, F("[a,b]^3"), SearchConfig(ball_radius=1, max_factors=1))
    assert res.kind == NOT_FOUND


def test_time_budget():
    F = fixtures.free_context(2).group
    with pytest.raises(ResourceLimit):
        cl_plain(F, F("[a,b]^3"), SearchConfig(ball_radius=3, max_factors=3, budget_ms=0))


def test_group_mismatch():
    ctx = fixtures.dihedral_context(4)
    with pytest.raises(GroupMismatch):
        cl_mixed(ctx, fixtures.free_context(2).group("a"))


@pytest.mark.parametrize("make", [fixtures.dihedral_context, fixtures.s3_context, fixtures.klein_context])
def test_finite_table_matches_brute_force(make):
    ctx = make()
    oracle = brute_force_cl(ctx, 4)
    for x in mixed_commutator_subgroup(ctx):
        assert cl_mixed(ctx, x).value == oracle[x]


@given(words(fixtures.free_context(2).group, 3), words(fixtures.free_context(2).group, 3))
def test_search_never_beats_the_witness(g, h):
    ctx = fixtures.free_context(2)
    G = ctx.group
    g, h = G.word(g.canon), G.word(h.canon)
    x = commutator(g, h)
    res = cl_mixed(ctx, x, SearchConfig(ball_radius=3, max_factors=1))
    if x.is_identity():
        assert res.value == 0
    else:
        assert res.value == 1 and res.verify(ctx, x)


def test_cl_lower_from_qm():
    F = fixtures.free_context(2).group
    assert cl_lower_from_qm(1, F("[a,b]"), 1) == 1
    assert cl_lower_from_qm(1, F("[a,b]^3"), 3) == 2
    assert cl_lower_from_qm(1, F.e(), 0) == 0
    with pytest.raises(NonpositiveDefect):
        cl_lower_from_qm(0, F("a"), 1)


def test_scl_report_falsification():
    rep = SclReport()
    rep.add_upper(Fraction(1, 4), {"source": "test"})
    rep.add_lower(Fraction(1, 2), {"source": "test"})
    with pytest.raises(FalsifiedCertificate):
        rep.check()


def test_scl_report_finite_order():
    ctx = fixtures.dihedral_context(4)
    rep = scl_mixed_report(ctx, ctx.group("r r"), powers=(1, 2))
    assert rep.upper == 0


def test_power_commutator_search_separation():
    ctx = fixtures.swap_context()
    x = ctx.group("[a,b]")
    for n in (2, 4, 6):
        res = power_commutator_search(ctx, x, n)
        assert res is not None and res.verify(ctx, x ** n)


# -- rewriting ------------------------------------------------------------------------------

def test_rewrite_empty_and_trivial():
    ctx = fixtures.dihedral_context(4)
    G = ctx.group
    assert rewrite_matching_quotients(ctx, []) == (G.e(), 0, [])
    a, b = G("s"), G("r")
    y, bound, wit = rewrite_matching_quotients(ctx, [(a, b, a, b)])
    assert y.is_identity() and bound == 3
    assert all(commutator(g, h).is_identity() for g, h in wit)


def test_rewrite_semidirect_example():
    ctx = fixtures.swap_context()
    G = ctx.group
    alpha = beta = G("t")
    f = G("a") * alpha
    y, bound, wit = rewrite_matching_quotients(ctx, [(f, beta, alpha, beta)])
    assert ctx.in_normal_subgroup(y)
    assert product((commutator(g, h) for g, h in wit), G) == y


def test_rewrite_precondition():
    ctx = fixtures.dihedral_context(4)
    G = ctx.group
    with pytest.raises(PreconditionViolated):
        rewrite_matching_quotients(ctx, [(G("s"), G("r"), G("r"), G("r"))])


D4 = fixtures.dihedral_context(4)


@given(finite_elements(D4.group), finite_elements(D4.group), finite_elements(D4.group), finite_elements(D4.group))
def test_rewrite_property_d4(alpha, beta, n1, n2):
    ctx = D4
    h1 = n1 if ctx.in_normal_subgroup(n1) else n1 * ctx.group("s")
    h2 = n2 if ctx.in_normal_subgroup(n2) else n2 * ctx.group("s")
    quads = [(alpha * h1, beta * h2, alpha, beta)]
    y, bound, wit = rewrite_matching_quotients(ctx, quads)
    assert len(wit) <= 3 == bound
    assert y == commutator(alpha * h1, beta * h2) * commutator(alpha, beta).inverse()


# -- windows and central sections -----------------------------------------------------------

def test_pigeonhole_examples():
    Z2, Z3 = fixtures.cyclic(2), fixtures.cyclic(3)
    assert pigeonhole_window(Z2, [Z2.e(), Z2.e()]) == (1, 1)
    one = Z2("r")
    assert pigeonhole_window(Z2, [one, one]) == (1, 2)
    g = Z3("r")
    assert pigeonhole_window(Z3, [g, g, g]) == (1, 3)


S3 = fixtures.symmetric3()


@given(st.lists(finite_elements(S3), min_size=6, max_size=6))
def test_pigeonhole_window_product_is_trivial(ws):
    i, j = pigeonhole_window(S3, ws)
    assert 1 <= i <= j <= 6
    assert product(ws[i - 1:j], S3).is_identity()


def test_central_section_reduce():
    ctx = fixtures.free_context(2)
    G = ctx.group
    alpha, beta = G("a"), G("b")
    assert central_section_reduce(ctx, alpha, beta, {beta: G.e()}) == beta
    with pytest.raises(CentralityViolated):
        central_section_reduce(ctx, alpha, beta, {beta: beta})
    Z = fixtures.cyclic(4)
    zctx = fixtures.GroupContext.full(Z)
    r = Z("r")
    assert central_section_reduce(zctx, r, r, lambda x: x).is_identity()


@pytest.mark.parametrize("make", [fixtures.dihedral_context, fixtures.s3_context, fixtures.klein_context])
def test_section_constants_default(make):
    data = compute_section_constants(make())
    assert data.Cs >= 0 and data.worst_ratio <= data.Cs + 3


def test_section_constants_nontrivial_section():
    # D4 → Z/2 with the section sending the generator to the reflection s r
    ctx = fixtures.dihedral_context(4)
    G = ctx.group
    Q = ctx.qgroup
    s = {Q.e(): G.e(), Q("q"): G("s r")}
    data = compute_section_constants(ctx, s)
    assert data.Ms >= 1
    assert data.to_json()["C(s)"] == str(data.Cs)


def test_section_constants_reject_bad_sections():
    ctx = fixtures.dihedral_context(4)
    G, Q = ctx.group, ctx.qgroup
    with pytest.raises(PreconditionViolated):
        compute_section_constants(ctx, {Q.e(): G.e(), Q("q"): G("r")})
    with pytest.raises(PreconditionViolated):
        compute_section_constants(fixtures.free_context(2))
