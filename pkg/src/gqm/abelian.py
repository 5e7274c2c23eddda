"""Finitely generated abelian groups via Smith normal form.

Two independent routes to N/[G,N] for G = A ∗ B and N = ker(A ∗ B → A × B):
the tensor product of abelianizations, and the presentation on generators
s_{a,b} ((a, b) ∈ A × B) with the bilinearity relations
s_{ca,b} = s_{c,b} + s_{a,b} and s_{a,db} = s_{a,d} + s_{a,b}.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Sequence

from .errors import ResourceLimit
from .groups import FiniteGroup, Group, all_elements, commutator

Matrix = list  # list of rows of ints


def identity_matrix(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(A: Matrix, B: Matrix) -> Matrix:
    if not A:
        return []
    cols = len(B[0]) if B else 0
    Bt = list(zip(*B)) if B else []
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] if Bt else [0] * cols for row in A]


def determinant(M: Matrix) -> int:
    """Integer determinant by fraction-free (Bareiss) elimination."""
    n = len(M)
    if n == 0:
        return 1
    A = [list(r) for r in M]
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def smith_normal_form(M: Matrix) -> tuple[Matrix, Matrix, Matrix]:
    """(D, U, V) with U·M·V = D diagonal, d1 | d2 | …, U and V unimodular."""
    m = len(M)
    n = len(M[0]) if m else 0
    D = [list(map(int, r)) for r in M]
    U = identity_matrix(m)
    V = identity_matrix(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in D:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, k):  # row_dst += k·row_src
        if k:
            D[dst] = [a + k * b for a, b in zip(D[dst], D[src])]
            U[dst] = [a + k * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, k):  # col_dst += k·col_src
        if k:
            for r in D:
                r[dst] += k * r[src]
            for r in V:
                r[dst] += k * r[src]

    def negate_row(i):
        D[i] = [-a for a in D[i]]
        U[i] = [-a for a in U[i]]

    for t in range(min(m, n)):
        while True:
            piv = None
            for i in range(t, m):
                for j in range(t, n):
                    if D[i][j] and (piv is None or abs(D[i][j]) < abs(D[piv[0]][piv[1]])):
                        piv = (i, j)
            if piv is None:
                return D, U, V
            swap_rows(t, piv[0])
            swap_cols(t, piv[1])
            p = D[t][t]
            dirty = False
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(i, t, -(D[i][t] // p))
                    dirty = dirty or D[i][t] != 0
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(j, t, -(D[t][j] // p))
                    dirty = dirty or D[t][j] != 0
            if dirty:
                continue
            # divisibility: fold an offending row into row t and go again
            bad = next((i for i in range(t + 1, m) for j in range(t + 1, n) if D[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad, 1)
        if D[t][t] < 0:
            negate_row(t)
    return D, U, V


def diagonal(D: Matrix) -> list[int]:
    return [D[i][i] for i in range(min(len(D), len(D[0]) if D else 0))]


@dataclass(frozen=True)
class FinAbGroup:
    """⊕ Z/dᵢ with d1 | d2 | …; dᵢ = 0 is an infinite cyclic factor.  Trivial factors are dropped."""

    invariants: tuple

    @classmethod
    def from_diagonal(cls, ds: Sequence[int]) -> "FinAbGroup":
        ds = [abs(int(d)) for d in ds]
        if not ds:
            return cls(())
        D, _, _ = smith_normal_form([[d if i == j else 0 for j in range(len(ds))] for i, d in enumerate(ds)])
        return cls(tuple(d for d in diagonal(D) if d != 1))

    @classmethod
    def from_relations(cls, rows: Matrix, ngens: int) -> "FinAbGroup":
        """Z^ngens modulo the row span."""
        if not rows:
            return cls(tuple([0] * ngens))
        D, _, _ = smith_normal_form(rows)
        diag = diagonal(D)
        diag += [0] * (ngens - len(diag))
        return cls(tuple(d for d in diag if d != 1))

    @property
    def order(self) -> int | None:
        out = 1
        for d in self.invariants:
            if d == 0:
                return None
            out *= d
        return out

    def __str__(self):
        if not self.invariants:
            return "0"
        return " + ".join("Z" if d == 0 else f"Z/{d}" for d in self.invariants)

    def to_json(self):
        return {"invariant_factors": list(self.invariants), "order": self.order, "text": str(self)}


def _subgroup_closure(G: Group, seeds) -> set:
    out = {G.e()}
    frontier = list(out)
    seeds = list(seeds)
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


def derived_subgroup(G: Group) -> set:
    elems = all_elements(G)
    return _subgroup_closure(G, {commutator(a, b) for a in elems for b in elems})


def abelianization(G: FiniteGroup, check: bool = True) -> FinAbGroup:
    """G/[G,G] from the table relations e_g + e_h = e_{gh}, checked against the commutator closure."""
    elems = all_elements(G)
    idx = {g: i for i, g in enumerate(elems)}
    n = len(elems)
    rows = []
    for g in elems:
        for h in elems:
            r = [0] * n
            r[idx[g]] += 1
            r[idx[h]] += 1
            r[idx[g * h]] -= 1
            rows.append(r)
    out = FinAbGroup.from_relations(rows, n)
    if check:
        expected = n // len(derived_subgroup(G))
        if out.order != expected:
            raise ArithmeticError(f"abelianization order {out.order} != |G|/|[G,G]| = {expected}")
    return out


def tensor(A: FinAbGroup, B: FinAbGroup) -> FinAbGroup:
    """⊕ Z/gcd(dᵢ, d′ⱼ), normalized."""
    return FinAbGroup.from_diagonal([gcd(a, b) for a in A.invariants for b in B.invariants])


def mixed_quotient_presentation(A: FiniteGroup, B: FiniteGroup, budget: int = 5000) -> FinAbGroup:
    """N/[G,N] for G = A ∗ B from generators s_{a,b} and the two bilinearity families."""
    ea, eb = all_elements(A), all_elements(B)
    na, nb = len(ea), len(eb)
    if na * nb > budget:
        raise ResourceLimit(f"|A|·|B| = {na * nb} exceeds the budget {budget}")
    ia = {a: i for i, a in enumerate(ea)}
    ib = {b: i for i, b in enumerate(eb)}

    def col(a, b):
        return ia[a] * nb + ib[b]

    rows = []
    for c in ea:
        for a in ea:
            for b in eb:
                r = [0] * (na * nb)
                r[col(c * a, b)] += 1
                r[col(c, b)] -= 1
                r[col(a, b)] -= 1
                rows.append(r)
    for a in ea:
        for d in eb:
            for b in eb:
                r = [0] * (na * nb)
                r[col(a, d * b)] += 1
                r[col(a, d)] -= 1
                r[col(a, b)] -= 1
                rows.append(r)
    return FinAbGroup.from_relations(rows, na * nb)


def check_freeindex(A: FiniteGroup, B: FiniteGroup) -> tuple[bool, FinAbGroup, FinAbGroup]:
    """Compare the presentation side with abelianization(A) ⊗ abelianization(B)."""
    left = mixed_quotient_presentation(A, B)
    right = tensor(abelianization(A), abelianization(B))
    return left == right, left, right
