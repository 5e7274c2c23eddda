"""Hypothesis strategies for group elements."""
from hypothesis import strategies as st

from gqm.groups import Element


def words(group, max_len=6):
    n = len(group.generators)
    letters = st.integers(1, n).flatmap(lambda i: st.sampled_from([i, -i]))
    return st.lists(letters, max_size=max_len).map(lambda w: group.word(w))


def finite_elements(group):
    return st.sampled_from(group.elements())


def normal_elements(ctx, max_len=6):
    """Elements of N: finite N listed directly, otherwise w·rep(q(w))⁻¹."""
    G = ctx.group
    if ctx.is_full:
        return words(G, max_len)
    if G.is_finite:
        return st.sampled_from(ctx.normal_elements())
    from gqm.verify import quotient_representatives
    reps = quotient_representatives(ctx)
    return words(G, max_len).map(lambda w: w * reps[ctx.q(w)].inverse())
