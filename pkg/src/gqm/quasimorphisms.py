"""Quasimorphisms: counting functions on free groups and what is built from them.

Every evaluator returns an exact ``Fraction``.  Defect *upper* bounds are
inputs supplied by the caller; everything computed here from samples is a
lower bound carrying the pair that realises it.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import (
    EmptyPattern,
    InfiniteCosetSpace,
    MissingDefectBound,
    NonNormalSample,
    NonpositiveDefect,
    NotClosed,
    NotTransversal,
    ParseError,
    PreconditionViolated,
)
from .groups import (
    Element,
    FreeGroup,
    GroupContext,
    Homomorphism,
    SemidirectByFinite,
    all_elements,
    commutator,
    conjugate,
    free_reduce,
    invert_word,
    parse_element,
    parse_word,
)

log = logging.getLogger(__name__)


def _opt_frac(v):
    return None if v is None else Fraction(v)


@dataclass
class Bound:
    value: Fraction = Fraction(0)
    witness: tuple | None = None

    def to_json(self):
        return {"value": str(self.value), "witness": None if self.witness is None else [str(w) for w in self.witness]}


class Quasimorphism:
    """A function to Q with defect data.

    ``domain`` is ``"N"`` (only elements of the normal subgroup are
    accepted) or ``"G"``.
    """

    def __init__(self, ctx: GroupContext, evaluator: Callable[[Element], Fraction], name: str,
                 domain: str = "G", homogeneous: bool = False, g_invariant: bool = False,
                 D_upper=None, Dp_upper=None, Dpp_upper=None, spec: dict | None = None,
                 homogenizer: Callable[[], "Quasimorphism"] | None = None):
        self.ctx = ctx
        self._eval = evaluator
        self.name = name
        self.domain = domain
        self.homogeneous = homogeneous
        self.g_invariant = g_invariant
        self.D_upper = _opt_frac(D_upper)
        self.Dp_upper = _opt_frac(Dp_upper)
        self.Dpp_upper = _opt_frac(Dpp_upper)
        self.D_lower = Bound()
        self.Dp_lower = Bound()
        self.Dpp_lower = Bound()
        self.spec = spec or {"kind": "custom", "name": name}
        self._homogenizer = homogenizer
        self.notes: list[str] = []

    def __call__(self, x: Element) -> Fraction:
        if self.domain == "N" and not self.ctx.in_normal_subgroup(x):
            raise PreconditionViolated(f"{self.name} is defined on N only; {x} is not in N")
        return Fraction(self._eval(x))

    def homogenization(self) -> "Quasimorphism":
        """The exact homogenization when a closed form is known."""
        if self.homogeneous:
            return self
        if self._homogenizer is None:
            raise PreconditionViolated(f"no exact homogenization known for {self.name}")
        return self._homogenizer()

    def to_json(self):
        out = dict(self.spec)
        if self.D_upper is not None:
            out["defect_upper"] = str(self.D_upper)
        return out

    def describe(self):
        return {
            "name": self.name,
            "domain": self.domain,
            "homogeneous": self.homogeneous,
            "g_invariant": self.g_invariant,
            "D_upper": None if self.D_upper is None else str(self.D_upper),
            "Dprime_upper": None if self.Dp_upper is None else str(self.Dp_upper),
            "Dprimeprime_upper": None if self.Dpp_upper is None else str(self.Dpp_upper),
            "D_lower": self.D_lower.to_json(),
            "Dprime_lower": self.Dp_lower.to_json(),
            "Dprimeprime_lower": self.Dpp_lower.to_json(),
            "notes": self.notes,
        }


# -- counting quasimorphisms ---------------------------------------------------------------------

def _free_part(ctx: GroupContext):
    """(free group, element -> reduced word) for the free group carrying the counts."""
    G = ctx.group
    if isinstance(G, FreeGroup):
        return G, lambda x: x.canon
    if isinstance(G, SemidirectByFinite) and isinstance(G.fiber, FreeGroup):
        ident = G.acting.identity

        def word(x):
            n, gamma = x.canon
            if gamma != ident:
                raise PreconditionViolated(f"{x} is not in the free fiber")
            return n
        return G.fiber, word
    raise PreconditionViolated("counting quasimorphisms need a free group or a free fiber")


def count_occurrences(word: Sequence[int], pattern: Sequence[int]) -> int:
    """Overlapping occurrences of ``pattern`` as a subword."""
    k = len(pattern)
    return sum(1 for i in range(len(word) - k + 1) if tuple(word[i:i + k]) == tuple(pattern))


def cyclic_occurrences(word: Sequence[int], pattern: Sequence[int]) -> int:
    """Occurrences of ``pattern`` starting at each position of the bi-infinite power of ``word``."""
    n, k = len(word), len(pattern)
    if n == 0:
        return 0
    return sum(1 for i in range(n) if all(word[(i + j) % n] == pattern[j] for j in range(k)))


def cyclic_reduce(word: Sequence[int]) -> tuple:
    w = list(free_reduce(word))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def counting_qm(ctx: GroupContext, pattern: str | Sequence[int], homogeneous: bool = False,
                D_upper=None) -> Quasimorphism:
    """x ↦ #pattern − #pattern⁻¹ in the reduced word of x (overlaps counted).

    With ``homogeneous`` the exact limit f(xⁿ)/n is used instead: cyclic
    counts in the cyclic reduction of x.
    """
    F, word_of = _free_part(ctx)
    if isinstance(pattern, str):
        text = pattern
        try:
            w = parse_word(F, pattern)
        except ParseError:
            raise
    else:
        w = tuple(pattern)
        text = "".join(F.format(w).split()) if w else ""
    if not w:
        raise EmptyPattern("pattern must be a nonempty word")
    if free_reduce(w) != tuple(w):
        raise EmptyPattern("pattern must be freely reduced")
    w = tuple(w)
    wi = invert_word(w)
    domain = "G" if isinstance(ctx.group, FreeGroup) and ctx.is_full else "N"
    spec = {"kind": "counting", "pattern": text, "homogeneous": homogeneous}

    def raw(x):
        u = word_of(x)
        return Fraction(count_occurrences(u, w) - count_occurrences(u, wi))

    def hom(x):
        u = cyclic_reduce(word_of(x))
        return Fraction(cyclic_occurrences(u, w) - cyclic_occurrences(u, wi))

    name = f"count[{text}]"
    if homogeneous:
        # homogeneous quasimorphisms are class functions, so with N = G they are invariant
        qm = Quasimorphism(ctx, hom, "homogenized " + name, domain=domain, homogeneous=True,
                           g_invariant=ctx.is_full, D_upper=D_upper, Dp_upper=0 if ctx.is_full else None,
                           spec=spec)
    else:
        qm = Quasimorphism(ctx, raw, name, domain=domain, D_upper=D_upper, spec=spec,
                           homogenizer=lambda: counting_qm(ctx, pattern, homogeneous=True))
    qm.notes.append("occurrences counted with overlaps")
    if len(w) == 1:
        qm.notes.append("pattern of length 1: a homomorphism")
    return qm


def homomorphism_qm(ctx: GroupContext, weights: dict) -> Quasimorphism:
    """Exponent-sum homomorphism on a free group (or free fiber) with the given generator weights."""
    F, word_of = _free_part(ctx)
    wts = {F.generators.index(k) if isinstance(k, str) else int(k): Fraction(v) for k, v in weights.items()}

    def ev(x):
        total = Fraction(0)
        for letter in word_of(x):
            i = abs(letter) - 1
            total += wts.get(i, 0) * (1 if letter > 0 else -1)
        return total

    domain = "G" if isinstance(ctx.group, FreeGroup) and ctx.is_full else "N"
    return Quasimorphism(ctx, ev, "homomorphism", domain=domain, homogeneous=True, D_upper=0, Dpp_upper=0,
                         spec={"kind": "homomorphism", "weights": {str(k): str(v) for k, v in weights.items()}})


def linear_combination(ctx: GroupContext, terms: Sequence[tuple], D_upper=None) -> Quasimorphism:
    """Σ cᵢ·fᵢ; homogeneous / invariant when every term is."""
    terms = [(Fraction(c), f) for c, f in terms]
    if not terms:
        return zero_qm(ctx)

    def ev(x):
        return sum((c * f(x) for c, f in terms), Fraction(0))

    homog = all(f.homogeneous for _, f in terms)
    inv = all(f.g_invariant for _, f in terms)
    domain = "N" if any(f.domain == "N" for _, f in terms) else "G"
    spec = {"kind": "combination", "terms": [{"coeff": str(c), "qm": f.to_json()} for c, f in terms]}

    def homogenizer():
        return linear_combination(ctx, [(c, f.homogenization()) for c, f in terms], D_upper)

    name = " + ".join(f"{c}·{f.name}" for c, f in terms)
    return Quasimorphism(ctx, ev, name, domain=domain, homogeneous=homog, g_invariant=inv,
                         D_upper=D_upper, Dp_upper=0 if inv else None, spec=spec,
                         homogenizer=None if homog else homogenizer)


def zero_qm(ctx: GroupContext, domain: str = "G") -> Quasimorphism:
    return Quasimorphism(ctx, lambda x: Fraction(0), "zero", domain=domain, homogeneous=True,
                         g_invariant=True, D_upper=0, Dp_upper=0, Dpp_upper=0, spec={"kind": "zero"})


# -- estimates and sampled lower bounds ----------------------------------------------------------

def homogenize_estimate(f: Quasimorphism, x: Element, n_max: int, want_error: bool = True):
    """f(x^n)/n with |estimate − f̄(x)| <= D/n."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    est = f(x ** n_max) / n_max
    if not want_error:
        return est, None
    if f.D_upper is None:
        raise MissingDefectBound("an error bound needs a defect upper bound")
    return est, f.D_upper / n_max


def defect_lower(f: Quasimorphism, sample: Iterable[tuple]) -> Bound:
    """max |f(g1 g2) − f(g1) − f(g2)| over the sample (lower bound on D(f))."""
    best = Bound()
    for g1, g2 in sample:
        v = abs(f(g1 * g2) - f(g1) - f(g2))
        if v > best.value:
            best = Bound(v, (g1, g2))
    if best.value > f.D_lower.value:
        f.D_lower = best
    return best


def _check_normal(ctx, x):
    if not ctx.in_normal_subgroup(x):
        raise NonNormalSample(f"{x} is not in N")


def conjugation_defect_lower(f: Quasimorphism, ctx: GroupContext, sample: Iterable[tuple]) -> Bound:
    """max |f(g x g⁻¹) − f(x)| over (g, x) with x ∈ N (lower bound on D′(f))."""
    best = Bound()
    for g, x in sample:
        _check_normal(ctx, x)
        v = abs(f(conjugate(g, x)) - f(x))
        if v > best.value:
            best = Bound(v, (g, x))
    if best.value > f.Dp_lower.value:
        f.Dp_lower = best
    return best


def nqm_defect_lower(f: Quasimorphism, ctx: GroupContext, sample: Iterable[tuple]) -> Bound:
    """max of |f(gx) − f(g) − f(x)| and |f(xg) − f(x) − f(g)| over (g, x ∈ N) (lower bound on D″)."""
    best = Bound()
    for g, x in sample:
        _check_normal(ctx, x)
        fg, fx = f(g), f(x)
        for v in (abs(f(g * x) - fg - fx), abs(f(x * g) - fx - fg)):
            if v > best.value:
                best = Bound(v, (g, x))
    if best.value > f.Dpp_lower.value:
        f.Dpp_lower = best
    return best


# -- symmetrization ------------------------------------------------------------------------------

def conjugation_autos(ctx: GroupContext) -> list[Element]:
    """Conjugators r, one per element of a finite quotient.

    For a semidirect product the acting elements themselves (a subgroup) are
    used; otherwise the first preimage of each quotient element.
    """
    G = ctx.group
    if isinstance(G, SemidirectByFinite):
        e_n = G.fiber.identity
        return [G.element((e_n, c)) for c in G.acting.all_canon()]
    if not G.is_finite:
        raise InfiniteCosetSpace("conjugators are enumerated for finite quotients only")
    reps = {}
    for g in all_elements(G):
        reps.setdefault(ctx.q(g), g)
    return list(reps.values())


def _closed_under_products(ctx: GroupContext, autos: Sequence[Element]) -> bool:
    """True if the set is exactly closed; raises NotClosed if not even closed modulo N."""
    aset = set(autos)
    exact = True
    qs = {ctx.q(r) for r in autos}
    for r1 in autos:
        for r2 in autos:
            if r1 * r2 not in aset:
                exact = False
                if ctx.q(r1 * r2) not in qs:
                    raise NotClosed(f"{r1}·{r2} lies outside the listed cosets")
    return exact


def symmetrize(f: Quasimorphism, autos: Sequence[Element]) -> Quasimorphism:
    """x ↦ (1/#autos)·Σ f(r x r⁻¹), averaged over the listed conjugators."""
    ctx = f.ctx
    autos = list(autos)
    if not autos:
        raise NotClosed("empty automorphism list")
    exact = _closed_under_products(ctx, autos)
    k = len(autos)

    def ev(x):
        return sum((f(conjugate(r, x)) for r in autos), Fraction(0)) / k

    spec = {"kind": "symmetrized", "base": f.to_json(), "autos": [str(r) for r in autos]}

    def homogenizer():
        return symmetrize(f.homogenization(), autos)

    # exact closure permutes the summands; otherwise invariance needs a class function on N
    invariant = exact or f.homogeneous
    out = Quasimorphism(ctx, ev, f"sym({f.name})", domain=f.domain, homogeneous=f.homogeneous,
                        g_invariant=invariant, D_upper=f.D_upper, Dp_upper=0 if invariant else None,
                        spec=spec, homogenizer=None if f.homogeneous else homogenizer)
    if not exact:
        out.notes.append("conjugators closed only modulo N")
    return out


# -- extensions ----------------------------------------------------------------------------------

def quotient_image(ctx: GroupContext) -> set | None:
    """q(G) as a set when the codomain is finite (closure of the generator images), else None."""
    Q = ctx.quotient.codomain
    if not Q.is_finite:
        return None
    G = ctx.group
    gens = [ctx.q(G.gen(i)) for i in range(len(G.generators))]
    out = {Q.e()}
    frontier = [Q.e()]
    while frontier:
        nxt = []
        for y in frontier:
            for s in gens:
                z = y * s
                if z not in out:
                    out.add(z)
                    nxt.append(z)
        frontier = nxt
    return out


def extend_by_section(f: Quasimorphism, ctx: GroupContext, section_values: dict) -> Quasimorphism:
    """f′(s·h) = f′(s) + f(h) for s in a transversal S of N and h ∈ N.

    ``section_values`` maps each transversal element (the identity included,
    with value 0) to a rational.
    """
    reps: dict[Element, tuple] = {}
    for s, val in section_values.items():
        qs = ctx.q(s)
        if qs in reps:
            raise NotTransversal(f"two representatives for the coset of {s}")
        reps[qs] = (s, Fraction(val))
    Qe = ctx.quotient.codomain.e()
    if Qe not in reps or not reps[Qe][0].is_identity() or reps[Qe][1] != 0:
        raise NotTransversal("the identity coset must be represented by e with value 0")
    G = ctx.group
    image = quotient_image(ctx)
    if image is not None:
        missing = image - set(reps)
        if missing:
            raise NotTransversal(f"no representative for {sorted(map(str, missing))[0]}")

    def ev(g):
        qg = ctx.q(g)
        if qg not in reps:
            raise NotTransversal(f"no representative for the coset of {g}")
        s, val = reps[qg]
        return val + f(s.inverse() * g)

    Dpp = None
    if f.D_upper is not None:
        if f.homogeneous or f.g_invariant:
            Dpp = f.D_upper
        elif f.Dp_upper is not None:
            Dpp = f.D_upper + f.Dp_upper
    spec = {"kind": "extended", "method": "section", "base": f.to_json(),
            "section": {str(s): str(v) for s, v in section_values.items()}}
    out = Quasimorphism(ctx, ev, f"ext_section({f.name})", domain="G", Dpp_upper=Dpp, spec=spec)
    out.notes.append("restriction to N is the base function")
    return out


@dataclass
class VirtualSection:
    """(s, Λ) with coset representatives B and lifts s′; t(λb) = s(λ)s′(b)."""

    ctx: GroupContext
    s: dict | Homomorphism  # Λ -> G
    B: list  # quotient elements
    s_prime: dict  # B -> G
    Lambda: list | None = None  # quotient elements (finite case); None means Λ = Q via a homomorphism
    _t: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        ctx = self.ctx
        for b in self.B:
            if ctx.q(self.s_prime[b]) != b:
                raise NotTransversal(f"q(s'({b})) != {b}")
        if isinstance(self.s, Homomorphism):
            if self.Lambda is not None or len(self.B) != 1 or not self.B[0].is_identity():
                raise InfiniteCosetSpace("a homomorphic section on infinite Q needs Λ = Q and B = {e}")
            for i in range(len(ctx.quotient.codomain.generators)):
                lam = ctx.quotient.codomain.gen(i)
                if ctx.q(self.s(lam)) != lam:
                    raise NotTransversal("q∘s is not the identity on generators of Λ")
            return
        Q = ctx.quotient.codomain
        if not ctx.group.is_finite and not Q.is_finite:
            raise InfiniteCosetSpace("coset enumeration needs a finite quotient")
        lam = list(self.Lambda if self.Lambda is not None else self.s.keys())
        for a in lam:
            if ctx.q(self.s[a]) != a:
                raise NotTransversal(f"q(s({a})) != {a}")
            for b in lam:
                if self.s[a] * self.s[b] != self.s[a * b]:
                    raise NotTransversal("s is not a homomorphism on Λ")
        if Q.is_finite:
            image = set(Q.elements()) if hasattr(Q, "elements") else {Q.element(c) for c in Q.all_canon()}
        else:
            image = {ctx.q(g) for g in all_elements(ctx.group)}
        for a in lam:
            for b in self.B:
                x = a * b
                if x in self._t:
                    raise NotTransversal(f"{x} = λb in two ways")
                self._t[x] = self.s[a] * self.s_prime[b]
        if set(self._t) != image:
            raise NotTransversal("Λ·B does not cover the quotient")

    def t(self, x: Element) -> Element:
        if isinstance(self.s, Homomorphism):
            return self.s(x) * self.s_prime[self.B[0]]
        return self._t[x]


def extend_by_averaging(f: Quasimorphism, ctx: GroupContext, vs: VirtualSection) -> Quasimorphism:
    """f′(g) = (1/#B)·Σ_b f(g · t(b·q(g))⁻¹ · t(b))."""
    B = list(vs.B)
    k = len(B)

    def ev(g):
        qg = ctx.q(g)
        return sum((f(g * vs.t(b * qg).inverse() * vs.t(b)) for b in B), Fraction(0)) / k

    bound = None
    if f.D_upper is not None:
        if f.g_invariant:
            bound = f.D_upper
        elif f.Dp_upper is not None:
            bound = f.D_upper + 3 * f.Dp_upper
    spec = {"kind": "extended", "method": "averaging", "base": f.to_json(), "B": [str(b) for b in B]}
    out = Quasimorphism(ctx, ev, f"ext_avg({f.name})", domain="G", D_upper=bound, spec=spec)
    out.notes.append("defect bound D(f) + 3 D'(f)")
    return out


# -- Bavard bounds -------------------------------------------------------------------------------

def bavard_lower(f: Quasimorphism, D_upper, x: Element, f_at_x=None) -> Fraction:
    """|f̄(x)| / (2D): a lower bound for scl_{G,N}(x) from a homogeneous G-invariant f."""
    D = Fraction(D_upper)
    if D <= 0:
        raise NonpositiveDefect("defect bound must be positive")
    if not (f.homogeneous and f.g_invariant):
        raise PreconditionViolated("Bavard bounds need a homogeneous G-invariant quasimorphism")
    v = Fraction(f(x) if f_at_x is None else f_at_x)
    return abs(v) / (2 * D)


def commutator_value_check(f: Quasimorphism, D_upper, samples: Iterable[tuple]) -> tuple[bool, list]:
    """|f([g, h])| <= D on every sample; violations come back with their pairs."""
    D = Fraction(D_upper)
    bad = []
    for g, h in samples:
        v = f(commutator(g, h))
        if abs(v) > D:
            bad.append((g, h, v))
    return not bad, bad


# -- specs ---------------------------------------------------------------------------------------

def qm_from_json(ctx: GroupContext, doc: dict) -> Quasimorphism:
    kind = doc.get("kind")
    D = doc.get("defect_upper")
    if kind == "counting":
        return counting_qm(ctx, doc["pattern"], homogeneous=bool(doc.get("homogeneous", False)), D_upper=D)
    if kind == "homomorphism":
        return homomorphism_qm(ctx, doc["weights"])
    if kind == "zero":
        return zero_qm(ctx)
    if kind == "combination":
        terms = [(Fraction(t["coeff"]), qm_from_json(ctx, t["qm"])) for t in doc["terms"]]
        return linear_combination(ctx, terms, D_upper=D)
    if kind == "symmetrized":
        base = qm_from_json(ctx, doc["base"])
        autos = doc.get("autos")
        autos = conjugation_autos(ctx) if autos in (None, "all") else [parse_element(ctx.group, a) for a in autos]
        out = symmetrize(base, autos)
        if D is not None:
            out.D_upper = Fraction(D)
        return out
    if kind == "extended":
        base = qm_from_json(ctx, doc["base"])
        if doc.get("method") == "section":
            vals = doc.get("section")
            if vals is None:
                vals = {r: 0 for r in conjugation_autos(ctx)}
            else:
                vals = {parse_element(ctx.group, k): Fraction(v) for k, v in vals.items()}
            return extend_by_section(base, ctx, vals)
        if doc.get("method") == "averaging":
            vs = default_virtual_section(ctx)
            return extend_by_averaging(base, ctx, vs)
        raise ParseError(f"unknown extension method {doc.get('method')!r}")
    raise ParseError(f"unknown quasimorphism kind {kind!r}")


def default_virtual_section(ctx: GroupContext) -> VirtualSection:
    """Λ trivial, B = the whole finite quotient, s′ = the first preimages (the acting elements for a semidirect product)."""
    reps = conjugation_autos(ctx)
    s_prime = {ctx.q(r): r for r in reps}
    Qe = ctx.quotient.codomain.e()
    s_prime[Qe] = ctx.group.e()
    B = sorted(s_prime)
    return VirtualSection(ctx, {Qe: ctx.group.e()}, B, s_prime, Lambda=[Qe])
