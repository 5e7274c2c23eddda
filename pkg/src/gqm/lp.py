"""Linear programs ``min c·x  s.t.  A x = b, x >= 0`` with exact rational answers.

Two routes produce the same certified output:

* ``solve_exact``: dense two-phase simplex over ``Fraction`` with Bland's rule.
* ``solve_highs``: HiGHS (dual simplex, or interior point on large
  instances) in floating point, then rational
  reconstruction of primal and dual followed by an exact optimality check
  (primal feasibility, dual feasibility, equal objectives).  If the check
  fails the caller gets ``None`` and falls back to the exact route.

``A`` is given sparsely as a list of columns, each a dict ``row -> coeff``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import Infeasible, ResourceLimit

log = logging.getLogger(__name__)

Column = dict  # row index -> Fraction

# beyond this many tableau entries the exact route is refused in "auto" mode
EXACT_SIZE_LIMIT = 60_000
# column count above which HiGHS is run as interior point + crossover
IPM_THRESHOLD = 50_000


@dataclass
class LPSolution:
    value: Fraction
    x: list[Fraction]
    y: list[Fraction]
    method: str
    pivots: int = 0
    notes: list[str] = field(default_factory=list)


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def _common_scale(values: Sequence[Fraction]) -> tuple[int, list[int]]:
    L = 1
    for v in values:
        d = v.denominator
        if L % d:
            L = L * d // math.gcd(L, d)
    return L, [v.numerator * (L // v.denominator) for v in values]


def dual_feasible(c: Sequence[Fraction], cols: Sequence[Column], y: Sequence[Fraction]) -> bool:
    """``c_j - y·A_j >= 0`` for every column, in scaled integer arithmetic when possible."""
    L, Y = _common_scale([_frac(v) for v in y])
    for j, col in enumerate(cols):
        acc = 0
        for i, a in col.items():
            acc += Y[i] * a
        if c[j] * L - acc < 0:
            return False
    return True


def check_optimal(c: Sequence[Fraction], cols: Sequence[Column], b: Sequence[Fraction],
                  x: Sequence[Fraction], y: Sequence[Fraction]) -> bool:
    """Exact KKT check: Ax = b, x >= 0, c_j - y·A_j >= 0, c·x = b·y."""
    m = len(b)
    if any(v < 0 for v in x):
        return False
    ax = [Fraction(0)] * m
    for j, col in enumerate(cols):
        xj = x[j]
        if xj:
            for i, a in col.items():
                ax[i] += a * xj
    if any(ax[i] != b[i] for i in range(m)):
        return False
    primal = sum(cj * xj for cj, xj in zip(c, x) if xj)
    dual = sum(bi * yi for bi, yi in zip(b, y) if bi)
    if primal != dual:
        return False
    return dual_feasible(c, cols, y)


def solve_exact(c: Sequence, cols: Sequence[Column], b: Sequence, max_pivots: int | None = None) -> LPSolution:
    """Two-phase tableau simplex in exact arithmetic (Bland's rule)."""
    c = [_frac(v) for v in c]
    b = [_frac(v) for v in b]
    m, n = len(b), len(c)
    width = n + m
    sign = [(-1 if bi < 0 else 1) for bi in b]
    T: list[list[Fraction]] = [[Fraction(0)] * (width + 1) for _ in range(m)]
    for j, col in enumerate(cols):
        for i, a in col.items():
            T[i][j] = _frac(a) * sign[i]
    for i in range(m):
        T[i][n + i] = Fraction(1)
        T[i][width] = b[i] * sign[i]
    basis = [n + i for i in range(m)]
    pivots = 0
    zero = Fraction(0)

    def pivot(r: int, s: int, z: list[Fraction]):
        nonlocal pivots
        pivots += 1
        if max_pivots is not None and pivots > max_pivots:
            raise ResourceLimit(f"simplex exceeded {max_pivots} pivots")
        prow = T[r]
        p = prow[s]
        if p != 1:
            prow = [v / p if v else zero for v in prow]
            T[r] = prow
        nz = [k for k, v in enumerate(prow) if v]
        for i in range(m):
            if i == r:
                continue
            row = T[i]
            f = row[s]
            if f:
                for k in nz:
                    row[k] -= f * prow[k]
        f = z[s]
        if f:
            for k in nz:
                z[k] -= f * prow[k]
        basis[r] = s

    def reduced_costs(cost):
        z = list(cost) + [zero]
        for i in range(m):
            cb = cost[basis[i]]
            if cb:
                row = T[i]
                for k in range(width + 1):
                    if row[k]:
                        z[k] -= cb * row[k]
        return z

    def run(cost, allowed: int):
        z = reduced_costs(cost)
        while True:
            s = next((j for j in range(allowed) if z[j] < 0), None)
            if s is None:
                return z
            best = None
            for i in range(m):
                a = T[i][s]
                if a > 0:
                    ratio = T[i][width] / a
                    key = (ratio, basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                raise Infeasible("linear program is unbounded")
            pivot(best[1], s, z)

    phase1 = [zero] * n + [Fraction(1)] * m
    run(phase1, width)
    infeas = sum(T[i][width] for i in range(m) if basis[i] >= n)
    if infeas > 0:
        raise Infeasible("target is not in the span of the support boundaries")
    # drive zero-level artificials out of the basis where possible
    dummy = [zero] * (width + 1)
    for i in range(m):
        if basis[i] >= n:
            s = next((j for j in range(n) if T[i][j] != 0), None)
            if s is not None:
                pivot(i, s, dummy)
    phase2 = c + [zero] * m
    run(phase2, n)
    x = [zero] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i][width]
    # y_i = c_B B⁻¹ e_i; B⁻¹ sits in the artificial block of the tableau
    y = []
    for i in range(m):
        acc = zero
        for r in range(m):
            cb = phase2[basis[r]]
            if cb:
                acc += cb * T[r][n + i]
        y.append(acc * sign[i])
    value = sum(cj * xj for cj, xj in zip(c, x) if xj)
    return LPSolution(value=value, x=x, y=y, method="exact-simplex", pivots=pivots)


def _rationalize(values, max_den: int) -> list[Fraction]:
    out = [Fraction(0)] * len(values)
    for j, v in enumerate(values):
        v = float(v)
        if abs(v) >= 1e-9:
            out[j] = Fraction(v).limit_denominator(max_den)
    return out


def _highs_run(c, cols, b, algo):
    import numpy as np
    from scipy.optimize import linprog
    from scipy.sparse import csc_matrix

    m, n = len(b), len(c)
    data, rows, indptr = [], [], [0]
    for col in cols:
        for i, a in col.items():
            rows.append(i)
            data.append(float(a))
        indptr.append(len(rows))
    A = csc_matrix((np.array(data, dtype=float), np.array(rows, dtype=int), np.array(indptr)), shape=(m, n))
    # presolve costs more than it saves on these boundary matrices under IPM
    options = {"presolve": False} if algo == "highs-ipm" else {}
    return linprog(np.array([float(v) for v in c]), A_eq=A, b_eq=np.array([float(v) for v in b]),
                   bounds=(0, None), method=algo, options=options)


def _certify(c, cols, b, xf, yf, note):
    for max_den in (64, 4096, 10 ** 6):
        x = _rationalize(xf, max_den)
        y = _rationalize(yf, max_den)
        if check_optimal(c, cols, b, x, y):
            return x, y, f"{note}rational reconstruction with denominators <= {max_den}"
    return None


def solve_on_support(cols: Sequence[Column], b: Sequence[Fraction], keep: Sequence[int]) -> list[Fraction] | None:
    """Exact solution of ``A_S x_S = b`` by sparse elimination (free variables set to 0).

    Returns ``None`` when the system is inconsistent.
    """
    eqs: dict[int, dict[int, Fraction]] = {}
    for j in keep:
        for i, a in cols[j].items():
            eqs.setdefault(i, {})[j] = _frac(a)
    rhs = {i: _frac(v) for i, v in enumerate(b)}
    for i, v in rhs.items():
        if v:
            eqs.setdefault(i, {})
    pivots: list[tuple[int, int, dict, Fraction]] = []
    by_col: dict[int, set] = {}
    for i, row in eqs.items():
        for j in row:
            by_col.setdefault(j, set()).add(i)
    live = set(eqs)
    while live:
        # sparsest row first keeps fill-in down
        i = min(live, key=lambda r: (len(eqs[r]), r))
        live.discard(i)
        row = eqs[i]
        if not row:
            if rhs[i]:
                return None
            continue
        j = min(row, key=lambda k: (len(by_col[k]), k))
        p = row[j]
        for r in list(by_col[j]):
            if r == i or r not in live:
                continue
            other = eqs[r]
            f = other[j] / p
            for k, a in row.items():
                v = other.get(k, 0) - f * a
                if v:
                    if k not in other:
                        by_col[k].add(r)
                    other[k] = v
                else:
                    other.pop(k, None)
                    by_col[k].discard(r)
            rhs[r] -= f * rhs[i]
        for k in row:
            by_col[k].discard(i)
        pivots.append((i, j, row, p))
    x: dict[int, Fraction] = {}
    for i, j, row, p in reversed(pivots):
        acc = rhs[i] - sum(a * x.get(k, 0) for k, a in row.items() if k != j)
        x[j] = acc / p
    out = [Fraction(0)] * len(cols)
    for j, v in x.items():
        out[j] = v
    return out


def _certify_support(c, cols, b, keep, yf):
    x = solve_on_support(cols, b, keep)
    if x is None or any(v < 0 for v in x):
        return None
    for max_den in (64, 4096, 10 ** 6):
        y = _rationalize(yf, max_den)
        if check_optimal(c, cols, b, x, y):
            return x, y, f"exact solve on the HiGHS primal support; duals with denominators <= {max_den}"
    return None


def solve_highs(c: Sequence, cols: Sequence[Column], b: Sequence) -> LPSolution | None:
    """Floating-point HiGHS solve, returned only if it certifies exactly."""
    c = [_frac(v) for v in c]
    b = [_frac(v) for v in b]
    n = len(c)
    # interior point with crossover is much faster on the big ℓ¹ instances
    algo = "highs-ipm" if n > IPM_THRESHOLD else "highs-ds"
    res = _highs_run(c, cols, b, algo)
    if res.status == 2:
        raise Infeasible("target is not in the span of the support boundaries")
    if res.status != 0:
        log.warning("HiGHS returned status %s: %s", res.status, res.message)
        return None
    got = _certify(c, cols, b, res.x, res.eqlin.marginals, "")
    if got is None:
        # the primal may sit inside the optimal face; find a vertex on its support
        keep = [j for j in range(n) if res.x[j] > 1e-9]
        got = _certify_support(c, cols, b, keep, res.eqlin.marginals)
        if got is None:
            sub = _highs_run([c[j] for j in keep], [cols[j] for j in keep], b, "highs-ds")
            if sub.status == 0:
                keep = [j for j, v in zip(keep, sub.x) if v > 1e-9]
                got = _certify_support(c, cols, b, keep, res.eqlin.marginals)
    if got is None:
        log.info("HiGHS solution did not certify after rational reconstruction")
        return None
    x, y, note = got
    value = sum(cj * xj for cj, xj in zip(c, x) if xj)
    return LPSolution(value=value, x=x, y=y, method=f"{algo}+exact-certificate", notes=[note])


def solve(c: Sequence, cols: Sequence[Column], b: Sequence, method: str = "auto") -> LPSolution:
    """Dispatch between the exact and the HiGHS-certified routes.

    ``method`` is ``"exact"``, ``"highs"`` or ``"auto"`` (exact for small
    tableaux, HiGHS first otherwise).  Every returned solution is exactly
    optimal: either computed in rationals or verified in rationals.
    """
    m, n = len(b), len(c)
    if method == "exact":
        return solve_exact(c, cols, b)
    if method == "highs" or (method == "auto" and m * (n + m) > EXACT_SIZE_LIMIT):
        sol = solve_highs(c, cols, b)
        if sol is not None:
            return sol
        if m * (n + m) > 50 * EXACT_SIZE_LIMIT:
            raise ResourceLimit("HiGHS solution did not certify and the exact tableau is too large")
        return solve_exact(c, cols, b)
    return solve_exact(c, cols, b)
