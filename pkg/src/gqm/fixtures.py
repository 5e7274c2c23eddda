"""Standard small groups and (G, N) contexts used by the tests, the CLI and `gqm verify`."""
from __future__ import annotations

from .groups import (
    DirectProduct,
    FiniteGroup,
    FreeGroup,
    FreeProduct,
    GroupContext,
    Homomorphism,
    SemidirectByFinite,
)


def cyclic(n: int, gen: str = "r") -> FiniteGroup:
    names = ["e"] + [gen if k == 1 else f"{gen}{k}" for k in range(1, n)]
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    return FiniteGroup(names, table, generators=[gen] if n > 1 else [])


def dihedral(n: int, rot: str = "r", ref: str = "s") -> FiniteGroup:
    """Order-2n dihedral group; element ``(k, f)`` is ``s^f r^k`` with ``s r s⁻¹ = r⁻¹``."""
    elems = [(k, f) for f in (0, 1) for k in range(n)]
    idx = {x: i for i, x in enumerate(elems)}

    def mul(x, y):
        (k1, f1), (k2, f2) = x, y
        # s^f1 r^k1 s^f2 r^k2 = s^(f1+f2) r^((-1)^f2 k1 + k2)
        return ((k1 * (-1 if f2 else 1) + k2) % n, (f1 + f2) % 2)

    def name(x):
        k, f = x
        r = "" if k == 0 else (rot if k == 1 else f"{rot}{k}")
        s = ref if f else ""
        return (s + r) or "e"

    table = [[idx[mul(x, y)] for y in elems] for x in elems]
    return FiniteGroup([name(x) for x in elems], table, generators=[rot, ref])


def symmetric3() -> FiniteGroup:
    """S₃ generated by a 3-cycle ``c`` and a transposition ``t``."""
    G = FiniteGroup.from_permutations({"c": (1, 2, 0), "t": (1, 0, 2)}, check=True)
    return FiniteGroup(list(G.names), G.table, generators=["c", "t"])


def klein_four(a: str = "u", b: str = "v") -> FiniteGroup:
    names = ["e", a, b, a + b]
    table = [[i ^ j for j in range(4)] for i in range(4)]
    return FiniteGroup(names, table, generators=[a, b])


def dihedral_context(n: int = 4) -> GroupContext:
    """D_n with N = ⟨r⟩, quotient Z/2 recording the reflection parity."""
    G = dihedral(n)
    Q = cyclic(2, "q")
    return GroupContext(G, Homomorphism(G, Q, [Q.identity, Q.gen_canon(0)]), name=f"D{n}/<r>")


def s3_context() -> GroupContext:
    """S₃ with N = A₃ (sign map to Z/2)."""
    G = symmetric3()
    Q = cyclic(2, "q")
    return GroupContext(G, Homomorphism(G, Q, [Q.identity, Q.gen_canon(0)]), name="S3/A3")


def free_context(rank: int = 2) -> GroupContext:
    return GroupContext.full(FreeGroup(rank), name=f"F{rank}")


def swap_semidirect() -> SemidirectByFinite:
    """F₂ ⋊ Z/2 with the involution ``t`` exchanging ``a`` and ``b``."""
    F = FreeGroup(["a", "b"])
    Z2 = cyclic(2, "t")
    return SemidirectByFinite(F, Z2, {Z2.gen_canon(0): (F.gen_canon(1), F.gen_canon(0))})


def swap_context() -> GroupContext:
    """G = F₂ ⋊ Z/2, N = F₂ (the fiber)."""
    G = swap_semidirect()
    Q = cyclic(2, "q")
    return GroupContext(G, Homomorphism(G, Q, [Q.identity, Q.identity, Q.gen_canon(0)]),
                        name="F2xZ2/F2")


def free_product_context(A: FiniteGroup | None = None, B: FiniteGroup | None = None) -> GroupContext:
    """G = A ∗ B with N = ker(A ∗ B → A × B); defaults to Z/2 ∗ Z/3."""
    A = A or cyclic(2, "z")
    B = B or cyclic(3, "c")
    G = FreeProduct([A, B])
    Q = DirectProduct([A, B])
    images = [Q.gen_canon(i) for i in range(len(Q.generators))]
    return GroupContext(G, Homomorphism(G, Q, images), name="A*B/ker")


def klein_context() -> GroupContext:
    """Z/2 × Z/2 with N the first factor."""
    G = klein_four()
    Q = cyclic(2, "q")
    return GroupContext(G, Homomorphism(G, Q, [Q.identity, Q.gen_canon(0)]), name="V4/<u>")


def f4_klein_context() -> GroupContext:
    """F₄ → Z/2 × Z/2 with a ↦ u, b ↦ v, c ↦ uv, d ↦ e; N is the (finite-index) kernel."""
    F = FreeGroup(4)
    V = klein_four()
    imgs = [V.element(1), V.element(2), V.element(3), V.e()]
    return GroupContext(F, Homomorphism(F, V, imgs), name="F4/V4")
