"""Group elements, canonical normal forms, homomorphisms and normal-subgroup contexts.

Words are tuples of signed letters: ``k > 0`` stands for generator ``k - 1``
and ``-k`` for its inverse.  Every group kind supplies a terminating
canonical form, so element equality is equality of canonical forms.

Supported kinds: free groups, finite groups given by a multiplication
table, free products, direct products, and semidirect products of a group
by a finite group acting through automorphisms.
"""
from __future__ import annotations

import itertools
import re
from collections import deque
from typing import Any, Callable, Iterable, Sequence

from .errors import GroupMismatch, InvalidGenerator, InvalidGroup, ParseError, ResourceLimit

Word = tuple  # tuple[int, ...] of signed letters

DEFAULT_ELEMENT_CAP = 2_000_000


def letter(index: int, sign: int = 1) -> int:
    return (index + 1) if sign > 0 else -(index + 1)


def letter_parts(k: int) -> tuple[int, int]:
    """Split a signed letter into (generator index, exponent sign)."""
    return (abs(k) - 1, 1 if k > 0 else -1)


def invert_word(w: Word) -> Word:
    return tuple(-k for k in reversed(w))


def free_reduce(w: Iterable[int]) -> Word:
    out: list[int] = []
    for k in w:
        if out and out[-1] == -k:
            out.pop()
        else:
            out.append(k)
    return tuple(out)


class Group:
    """Abstract group with canonical forms.

    Subclasses implement ``identity``, ``mul``, ``inv``, ``gen_canon`` and
    ``to_word`` on canonical forms; ``Element`` wraps a canonical form.
    """

    kind = "abstract"
    generators: tuple[str, ...] = ()

    # -- raw canonical-form operations -------------------------------------------------
    @property
    def identity(self):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def gen_canon(self, i: int):
        raise NotImplementedError

    def to_word(self, c) -> Word:
        raise NotImplementedError

    @property
    def is_finite(self) -> bool:
        return False

    def order(self) -> int | None:
        return None

    def canonical(self, word: Sequence[int]):
        c = self.identity
        gens = len(self.generators)
        for k in word:
            i = abs(k) - 1
            if k == 0 or i >= gens:
                raise InvalidGenerator(f"letter {k} out of range for {gens} generators")
            g = self.gen_canon(i)
            c = self.mul(c, g if k > 0 else self.inv(g))
        return c

    def power(self, a, n: int):
        if n < 0:
            a, n = self.inv(a), -n
        result = self.identity
        base = a
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result

    # -- element-level helpers ---------------------------------------------------------
    def element(self, canon) -> "Element":
        return Element(self, canon)

    def e(self) -> "Element":
        return Element(self, self.identity)

    def gen(self, name_or_index) -> "Element":
        if isinstance(name_or_index, str):
            try:
                i = self.generators.index(name_or_index)
            except ValueError:
                raise InvalidGenerator(f"unknown generator {name_or_index!r}") from None
        else:
            i = name_or_index
        return Element(self, self.gen_canon(i))

    def word(self, w: Sequence[int]) -> "Element":
        return Element(self, self.canonical(w))

    def __call__(self, text: str) -> "Element":
        return parse_element(self, text)

    def sort_key(self, c):
        w = self.to_word(c)
        return (len(w), tuple((abs(k), k < 0) for k in w))

    def format(self, c) -> str:
        return format_word(self, self.to_word(c))

    def describe(self) -> str:
        return self.kind


class FreeGroup(Group):
    kind = "free"

    def __init__(self, generators: Sequence[str] | int):
        if isinstance(generators, int):
            generators = [chr(ord("a") + i) for i in range(generators)]
        self.generators = tuple(generators)
        _check_names(self.generators)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def identity(self):
        return ()

    def mul(self, a, b):
        i = 0
        n = min(len(a), len(b))
        la = len(a)
        while i < n and a[la - 1 - i] == -b[i]:
            i += 1
        if i == 0:
            return a + b
        return a[: la - i] + b[i:]

    def inv(self, a):
        return tuple(-k for k in reversed(a))

    def gen_canon(self, i):
        return (i + 1,)

    def canonical(self, word):
        gens = len(self.generators)
        for k in word:
            if k == 0 or abs(k) > gens:
                raise InvalidGenerator(f"letter {k} out of range for {gens} generators")
        return free_reduce(word)

    def to_word(self, c):
        return c

    def describe(self):
        return f"F{self.rank}"


class FiniteGroup(Group):
    """Finite group from a multiplication table (row-major, ``table[i][j] = i*j``)."""

    kind = "finite"

    def __init__(self, elements: Sequence[str], table: Sequence[Sequence[int]],
                 generators: Sequence[str] | None = None, check: bool = True):
        self.names = tuple(elements)
        self.table = tuple(tuple(int(x) for x in row) for row in table)
        n = len(self.names)
        if n == 0 or len(self.table) != n or any(len(r) != n for r in self.table):
            raise InvalidGroup("multiplication table must be square and match the element list")
        if len(set(self.names)) != n:
            raise InvalidGroup("element names must be distinct")
        ident = [i for i in range(n) if list(self.table[i]) == list(range(n))
                 and all(self.table[j][i] == j for j in range(n))]
        if not ident:
            raise InvalidGroup("table has no two-sided identity")
        self._identity = ident[0]
        if check:
            self._verify()
        self._inverse = tuple(next(j for j in range(n) if self.table[i][j] == self._identity)
                              for i in range(n))
        if generators is None:
            generators = [self.names[i] for i in range(n) if i != self._identity]
        self.generators = tuple(generators)
        try:
            self._gen_idx = tuple(self.names.index(g) for g in self.generators)
        except ValueError as exc:
            raise InvalidGroup(f"generator not among elements: {exc}") from None
        if any(g == self._identity for g in self._gen_idx):
            raise InvalidGroup("the identity cannot be a generator")
        self._words = self._shortest_words()
        if len(self._words) != n:
            raise InvalidGroup("declared generators do not generate the group")

    def _verify(self):
        n = len(self.names)
        rng = set(range(n))
        for row in self.table:
            if set(row) != rng:
                raise InvalidGroup("table is not a Latin square")
        for j in range(n):
            if {self.table[i][j] for i in range(n)} != rng:
                raise InvalidGroup("table is not a Latin square")
        t = self.table
        for a in range(n):
            ta = t[a]
            for b in range(n):
                tab = t[ta[b]]
                tb = t[b]
                for c in range(n):
                    if tab[c] != ta[tb[c]]:
                        raise InvalidGroup(f"multiplication is not associative at {a},{b},{c}")

    def _shortest_words(self):
        words = {self._identity: ()}
        queue = deque([self._identity])
        steps = []
        for i, g in enumerate(self._gen_idx):
            steps.append((i + 1, g))
            steps.append((-(i + 1), None))
        while queue:
            x = queue.popleft()
            for k, g in steps:
                gi = g if g is not None else self._inverse[self._gen_idx[-k - 1]]
                y = self.table[x][gi]
                if y not in words:
                    words[y] = words[x] + (k,)
                    queue.append(y)
        return words

    @property
    def is_finite(self):
        return True

    def order(self):
        return len(self.names)

    @property
    def identity(self):
        return self._identity

    def mul(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self._inverse[a]

    def gen_canon(self, i):
        return self._gen_idx[i]

    def to_word(self, c):
        return self._words[c]

    def sort_key(self, c):
        return (len(self._words[c]), c)

    def all_canon(self) -> range:
        return range(len(self.names))

    def elements(self) -> list["Element"]:
        return [Element(self, i) for i in range(len(self.names))]

    def element_named(self, name: str) -> "Element":
        return Element(self, self.names.index(name))

    def describe(self):
        return f"finite group of order {len(self.names)}"

    @classmethod
    def from_permutations(cls, gens: dict[str, Sequence[int]], check: bool = False) -> "FiniteGroup":
        """Closure of permutation generators; element names are shortest words."""
        names = list(gens)
        perms = [tuple(p) for p in gens.values()]
        deg = len(perms[0])
        ident = tuple(range(deg))

        def compose(p, q):  # p*q acts as q then p? use left-to-right: (p*q)(i) = q[p[i]]
            return tuple(q[p[i]] for i in range(deg))

        found = {ident: ""}
        order = [ident]
        queue = deque([ident])
        while queue:
            x = queue.popleft()
            for name, p in zip(names, perms):
                y = compose(x, p)
                if y not in found:
                    found[y] = (found[x] + " " + name).strip()
                    order.append(y)
                    queue.append(y)
        idx = {p: i for i, p in enumerate(order)}
        table = [[idx[compose(p, q)] for q in order] for p in order]
        elem_names = [found[p] or "e" for p in order]
        return cls(elem_names, table, generators=[found[p] for p in perms], check=check)


class FreeProduct(Group):
    kind = "free_product"

    def __init__(self, factors: Sequence[Group]):
        self.factors = tuple(factors)
        self.generators = tuple(itertools.chain.from_iterable(f.generators for f in self.factors))
        _check_names(self.generators)
        self._offsets = list(itertools.accumulate([0] + [len(f.generators) for f in self.factors]))

    @property
    def identity(self):
        return ()

    def mul(self, a, b):
        if not a:
            return b
        if not b:
            return a
        res = list(a)
        i = 0
        while i < len(b) and res and res[-1][0] == b[i][0]:
            fi, c = b[i]
            merged = self.factors[fi].mul(res.pop()[1], c)
            i += 1
            if merged != self.factors[fi].identity:
                res.append((fi, merged))
                break
        res.extend(b[i:])
        return tuple(res)

    def inv(self, a):
        return tuple((fi, self.factors[fi].inv(c)) for fi, c in reversed(a))

    def _locate(self, i):
        for fi in range(len(self.factors)):
            if self._offsets[fi] <= i < self._offsets[fi + 1]:
                return fi, i - self._offsets[fi]
        raise InvalidGenerator(f"generator index {i} out of range")

    def gen_canon(self, i):
        fi, j = self._locate(i)
        c = self.factors[fi].gen_canon(j)
        if c == self.factors[fi].identity:
            return ()
        return ((fi, c),)

    def to_word(self, c):
        out = []
        for fi, x in c:
            off = self._offsets[fi]
            out.extend(k + off if k > 0 else k - off for k in self.factors[fi].to_word(x))
        return tuple(out)

    def embed(self, fi: int, c):
        if c == self.factors[fi].identity:
            return ()
        return ((fi, c),)

    def describe(self):
        return " * ".join(f.describe() for f in self.factors)


class DirectProduct(Group):
    kind = "direct"

    def __init__(self, factors: Sequence[Group]):
        self.factors = tuple(factors)
        self.generators = tuple(itertools.chain.from_iterable(f.generators for f in self.factors))
        _check_names(self.generators)
        self._offsets = list(itertools.accumulate([0] + [len(f.generators) for f in self.factors]))

    @property
    def is_finite(self):
        return all(f.is_finite for f in self.factors)

    def order(self):
        if not self.is_finite:
            return None
        out = 1
        for f in self.factors:
            out *= f.order()
        return out

    @property
    def identity(self):
        return tuple(f.identity for f in self.factors)

    def mul(self, a, b):
        return tuple(f.mul(x, y) for f, x, y in zip(self.factors, a, b))

    def inv(self, a):
        return tuple(f.inv(x) for f, x in zip(self.factors, a))

    def gen_canon(self, i):
        for fi in range(len(self.factors)):
            if self._offsets[fi] <= i < self._offsets[fi + 1]:
                c = list(self.identity)
                c[fi] = self.factors[fi].gen_canon(i - self._offsets[fi])
                return tuple(c)
        raise InvalidGenerator(f"generator index {i} out of range")

    def to_word(self, c):
        out = []
        for fi, x in enumerate(c):
            off = self._offsets[fi]
            out.extend(k + off if k > 0 else k - off for k in self.factors[fi].to_word(x))
        return tuple(out)

    def all_canon(self):
        return itertools.product(*(f.all_canon() for f in self.factors))

    def describe(self):
        return " x ".join(f.describe() for f in self.factors)


class SemidirectByFinite(Group):
    """``fiber ⋊ acting``: canonical form ``(n, γ)`` meaning ``n·γ``.

    ``action`` maps an acting-group element index to the images of the fiber
    generators (fiber canonical forms); conjugation by ``γ`` acts on the
    fiber as that automorphism.  Images given only for generators of the
    acting group are extended by composition.
    """

    kind = "semidirect"

    def __init__(self, fiber: Group, acting: FiniteGroup, action: dict[int, Sequence]):
        self.fiber = fiber
        self.acting = acting
        self.generators = fiber.generators + acting.generators
        _check_names(self.generators)
        nf = len(fiber.generators)
        self._nf = nf
        images: dict[int, tuple] = {acting.identity: tuple(fiber.gen_canon(i) for i in range(nf))}
        for g, imgs in action.items():
            imgs = tuple(imgs)
            if len(imgs) != nf:
                raise InvalidGroup("action must give one image per fiber generator")
            images[g] = imgs
        # extend to every acting element: φ_{γg} = φ_γ ∘ φ_g
        given = dict(images)
        gen_maps = []
        for j in range(len(acting.generators)):
            g = acting.gen_canon(j)
            if g not in given:
                raise InvalidGroup("action must be given on the acting generators")
            gen_maps.append((g, given[g]))
        images = {acting.identity: given[acting.identity]}
        queue = deque([acting.identity])
        while queue:
            gamma = queue.popleft()
            phi = images[gamma]
            for g, phi_g in gen_maps:
                nxt = acting.mul(gamma, g)
                if nxt not in images:
                    images[nxt] = tuple(self._apply(phi, x) for x in phi_g)
                    queue.append(nxt)
        for gamma, imgs in given.items():
            if images[gamma] != imgs:
                raise InvalidGroup("action images are inconsistent with the acting group")
        self._images = images
        self._verify_action()

    def _apply(self, imgs, n):
        f = self.fiber
        c = f.identity
        for k in f.to_word(n):
            x = imgs[abs(k) - 1]
            c = f.mul(c, x if k > 0 else f.inv(x))
        return c

    def act(self, gamma, n):
        if gamma == self.acting.identity:
            return n
        return self._apply(self._images[gamma], n)

    def _verify_action(self):
        A = self.acting
        gens = [self.fiber.gen_canon(i) for i in range(self._nf)]
        for g1 in A.all_canon():
            for g2 in A.all_canon():
                g12 = A.mul(g1, g2)
                for x in gens:
                    if self.act(g12, x) != self.act(g1, self.act(g2, x)):
                        raise InvalidGroup("action is not a homomorphism into Aut(fiber)")
        # φ_γ ∘ φ_{γ⁻¹} = id on generators, so every φ_γ is an automorphism
        for g in A.all_canon():
            for x in gens:
                if self.act(g, self.act(A.inv(g), x)) != x:
                    raise InvalidGroup("action image is not an automorphism")

    @property
    def is_finite(self):
        return self.fiber.is_finite

    @property
    def identity(self):
        return (self.fiber.identity, self.acting.identity)

    def mul(self, a, b):
        n1, g1 = a
        n2, g2 = b
        return (self.fiber.mul(n1, self.act(g1, n2)), self.acting.mul(g1, g2))

    def inv(self, a):
        n, g = a
        gi = self.acting.inv(g)
        return (self.act(gi, self.fiber.inv(n)), gi)

    def gen_canon(self, i):
        if i < self._nf:
            return (self.fiber.gen_canon(i), self.acting.identity)
        return (self.fiber.identity, self.acting.gen_canon(i - self._nf))

    def to_word(self, c):
        n, g = c
        off = self._nf
        return tuple(self.fiber.to_word(n)) + tuple(
            k + off if k > 0 else k - off for k in self.acting.to_word(g))

    def describe(self):
        return f"({self.fiber.describe()}) ⋊ ({self.acting.describe()})"


def _check_names(names):
    if len(set(names)) != len(names):
        raise InvalidGroup(f"generator names must be distinct: {names}")
    for n in names:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", n):
            raise InvalidGroup(f"bad generator name {n!r}")


class Element:
    """An element of a group, held in canonical form."""

    __slots__ = ("group", "canon")

    def __init__(self, group: Group, canon):
        self.group = group
        self.canon = canon

    def _check(self, other):
        if not isinstance(other, Element) or other.group is not self.group:
            raise GroupMismatch("elements belong to different groups")

    def __mul__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.group, self.group.mul(self.canon, other.canon))

    def inverse(self) -> "Element":
        return Element(self.group, self.group.inv(self.canon))

    def __invert__(self):
        return self.inverse()

    def __pow__(self, n: int) -> "Element":
        return Element(self.group, self.group.power(self.canon, n))

    def __eq__(self, other):
        return isinstance(other, Element) and other.group is self.group and other.canon == self.canon

    def __hash__(self):
        return hash(self.canon)

    def __lt__(self, other):
        return self.group.sort_key(self.canon) < self.group.sort_key(other.canon)

    def is_identity(self) -> bool:
        return self.canon == self.group.identity

    def word(self) -> Word:
        return self.group.to_word(self.canon)

    def __len__(self):
        return len(self.word())

    def __str__(self):
        return self.group.format(self.canon)

    def __repr__(self):
        return f"Element({self})"


def mul(a: Element, b: Element) -> Element:
    return a * b


def inv(a: Element) -> Element:
    return a.inverse()


def canonicalize(group: Group, w: Sequence[int]) -> Element:
    return Element(group, group.canonical(w))


def commutator(g: Element, h: Element) -> Element:
    """``[g, h] = g h g⁻¹ h⁻¹``."""
    g._check(h)
    G = g.group
    a, b = g.canon, h.canon
    return Element(G, G.mul(G.mul(a, b), G.mul(G.inv(a), G.inv(b))))


def conjugate(a: Element, x: Element) -> Element:
    """``a x a⁻¹``."""
    return a * x * a.inverse()


def product(elements: Iterable[Element], group: Group | None = None) -> Element:
    it = iter(elements)
    acc = None
    for x in it:
        acc = x if acc is None else acc * x
    if acc is None:
        if group is None:
            raise ValueError("empty product needs a group")
        return group.e()
    return acc


class Homomorphism:
    """Homomorphism determined by images of the domain generators."""

    def __init__(self, domain: Group, codomain: Group, images: Sequence, check: bool = True):
        self.domain = domain
        self.codomain = codomain
        imgs = []
        for x in images:
            if isinstance(x, Element):
                if x.group is not codomain:
                    raise GroupMismatch("image not in codomain")
                x = x.canon
            imgs.append(x)
        if len(imgs) != len(domain.generators):
            raise InvalidGroup("need one image per domain generator")
        self.images = tuple(imgs)
        self._table = None
        if isinstance(domain, FiniteGroup):
            self._table = tuple(self._eval_word(domain.to_word(c)) for c in domain.all_canon())
        if check:
            self._verify()

    def _eval_word(self, w):
        C = self.codomain
        c = C.identity
        for k in w:
            x = self.images[abs(k) - 1]
            c = C.mul(c, x if k > 0 else C.inv(x))
        return c

    def eval_canon(self, c):
        if self._table is not None:
            return self._table[c]
        return self._eval_word(self.domain.to_word(c))

    def __call__(self, g: Element) -> Element:
        if g.group is not self.domain:
            raise GroupMismatch("element not in the homomorphism's domain")
        return Element(self.codomain, self.eval_canon(g.canon))

    def _restriction(self, factor: Group, start: int):
        n = len(factor.generators)
        return Homomorphism(factor, self.codomain, self.images[start:start + n], check=True)

    def _verify(self):
        D, C = self.domain, self.codomain
        if isinstance(D, FiniteGroup):
            t = self._table
            for a in D.all_canon():
                for b in D.all_canon():
                    if t[D.mul(a, b)] != C.mul(t[a], t[b]):
                        raise InvalidGroup("generator images do not respect the multiplication table")
        elif isinstance(D, FreeProduct):
            for fi, f in enumerate(D.factors):
                self._restriction(f, D._offsets[fi])
        elif isinstance(D, DirectProduct):
            for fi, f in enumerate(D.factors):
                self._restriction(f, D._offsets[fi])
            for i, j in itertools.combinations(range(len(D.factors)), 2):
                for x in self.images[D._offsets[i]:D._offsets[i + 1]]:
                    for y in self.images[D._offsets[j]:D._offsets[j + 1]]:
                        if C.mul(x, y) != C.mul(y, x):
                            raise InvalidGroup("images of distinct direct factors must commute")
        elif isinstance(D, SemidirectByFinite):
            nf = D._nf
            Homomorphism(D.fiber, C, self.images[:nf], check=True)
            Homomorphism(D.acting, C, self.images[nf:], check=True)
            for j in range(len(D.acting.generators)):
                t = self.images[nf + j]
                gamma = D.acting.gen_canon(j)
                for i in range(nf):
                    lhs = C.mul(C.mul(t, self.images[i]), C.inv(t))
                    img = D.act(gamma, D.fiber.gen_canon(i))
                    sub = Homomorphism(D.fiber, C, self.images[:nf], check=False)
                    if lhs != sub.eval_canon(img):
                        raise InvalidGroup("images do not respect the semidirect action")


def eval_hom(phi: Homomorphism, g: Element) -> Element:
    return phi(g)


def trivial_group() -> FiniteGroup:
    return FiniteGroup(["e"], [[0]], generators=[])


class GroupContext:
    """A group ``G`` with a quotient map ``q: G -> Q``; ``N = ker q``."""

    def __init__(self, group: Group, quotient: Homomorphism, name: str = ""):
        if quotient.domain is not group:
            raise GroupMismatch("quotient map must be defined on the group")
        self.group = group
        self.quotient = quotient
        self.qgroup = quotient.codomain
        self.name = name

    @classmethod
    def full(cls, group: Group, name: str = "") -> "GroupContext":
        """The case ``N = G``."""
        T = trivial_group()
        return cls(group, Homomorphism(group, T, [T.identity] * len(group.generators)), name=name)

    @property
    def is_full(self) -> bool:
        return self.qgroup.is_finite and self.qgroup.order() == 1

    def q(self, g: Element) -> Element:
        return self.quotient(g)

    def in_n_canon(self, c) -> bool:
        return self.quotient.eval_canon(c) == self.qgroup.identity

    def in_normal_subgroup(self, g: Element) -> bool:
        if g.group is not self.group:
            raise GroupMismatch("element not in the context's group")
        return self.in_n_canon(g.canon)

    def normal_elements(self) -> list[Element]:
        """All of N (finite groups only)."""
        if not self.group.is_finite:
            raise ResourceLimit("N is enumerable only for finite groups")
        return [x for x in all_elements(self.group) if self.in_normal_subgroup(x)]


def in_normal_subgroup(ctx: GroupContext, g: Element) -> bool:
    return ctx.in_normal_subgroup(g)


def all_elements(group: Group) -> list[Element]:
    if isinstance(group, FiniteGroup):
        return group.elements()
    if not group.is_finite:
        raise ResourceLimit("cannot enumerate an infinite group")
    # generated finite group: the ball of radius |G| covers it
    return enumerate_ball(group, group.order() or 0)


def enumerate_ball(group: Group, radius: int, cap: int = DEFAULT_ELEMENT_CAP) -> list[Element]:
    """Elements of word length ``<= radius``, in breadth-first (shortlex) order."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    steps = []
    for i in range(len(group.generators)):
        g = group.gen_canon(i)
        steps.append(g)
        steps.append(group.inv(g))
    seen = {group.identity: None}
    frontier = [group.identity]
    for _ in range(radius):
        nxt = []
        for x in frontier:
            for s in steps:
                y = group.mul(x, s)
                if y not in seen:
                    seen[y] = None
                    nxt.append(y)
                    if len(seen) > cap:
                        raise ResourceLimit(f"ball exceeds element cap {cap}")
        if not nxt:
            break
        frontier = nxt
    return [Element(group, c) for c in seen]


# -- literals ------------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\^-?\d+|\^)|(.))")


def _gen_lookup(group: Group):
    table = {}
    for i, name in enumerate(group.generators):
        table[name] = letter(i, 1)
    for i, name in enumerate(group.generators):
        inv_name = name.swapcase() if name.swapcase() != name else None
        if inv_name and inv_name not in table:
            table[inv_name] = letter(i, -1)
    return table


def parse_word(group: Group, text: str) -> Word:
    """Parse an element literal into a (not necessarily reduced) word.

    Grammar: whitespace-separated generator names, uppercase (case-swapped)
    for inverses, ``x^n`` powers, ``[x, y]`` commutators and parentheses.
    ``e`` and ``1`` denote the identity.  A token that is not a generator
    name is split into single-character generators when possible.
    """
    lookup = _gen_lookup(group)
    tokens = []
    pos = 0
    text = text.replace("⁻¹", "^-1")
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        pos = m.end()
        num, name, pw, other = m.groups()
        if num is not None:
            if num == "1":
                tokens.append(("id", None))
            else:
                raise ParseError(f"unexpected number {num!r} in {text!r}")
        elif name is not None:
            tokens.append(("name", name))
        elif pw is not None:
            if pw == "^":
                raise ParseError("power needs an integer exponent")
            tokens.append(("pow", int(pw[1:])))
        elif other is not None and other.strip():
            tokens.append(("sym", other))

    idx = 0

    def peek():
        return tokens[idx] if idx < len(tokens) else (None, None)

    def expr(stop):
        nonlocal idx
        out: list[int] = []
        while True:
            kind, val = peek()
            if kind is None or (kind == "sym" and val in stop):
                return out
            w = atom()
            kind, val = peek()
            if kind == "pow":
                idx += 1
                w = _word_power(w, val)
            out.extend(w)

    def atom():
        nonlocal idx
        kind, val = peek()
        if kind == "id":
            idx += 1
            return []
        if kind == "name":
            idx += 1
            if val in lookup:
                return [lookup[val]]
            if val == "e":
                return []
            if all(ch in lookup for ch in val):
                return [lookup[ch] for ch in val]
            raise InvalidGenerator(f"unknown generator {val!r}")
        if kind == "sym" and val == "(":
            idx += 1
            w = expr({")"})
            _expect(")")
            return w
        if kind == "sym" and val == "[":
            idx += 1
            a = expr({","})
            _expect(",")
            b = expr({"]"})
            _expect("]")
            return a + b + [-k for k in reversed(a)] + [-k for k in reversed(b)]
        raise ParseError(f"unexpected token {val!r} in {text!r}")

    def _expect(sym):
        nonlocal idx
        kind, val = peek()
        if kind != "sym" or val != sym:
            raise ParseError(f"expected {sym!r} in {text!r}")
        idx += 1

    w = expr(set())
    if idx != len(tokens):
        raise ParseError(f"trailing input in {text!r}")
    return tuple(w)


def _word_power(w, n):
    if n < 0:
        w = [-k for k in reversed(w)]
        n = -n
    return list(w) * n


def parse_element(group: Group, text: str) -> Element:
    return Element(group, group.canonical(parse_word(group, text)))


def format_word(group: Group, w: Word) -> str:
    if not w:
        return "e"
    out = []
    for k in w:
        name = group.generators[abs(k) - 1]
        out.append(name if k > 0 else name.swapcase() if name.swapcase() != name else name + "^-1")
    return " ".join(out)


# -- JSON ------------------------------------------------------------------------------------

def group_to_json(group: Group) -> dict[str, Any]:
    if isinstance(group, FreeGroup):
        return {"kind": "free", "generators": list(group.generators)}
    if isinstance(group, FiniteGroup):
        return {"kind": "finite", "elements": list(group.names),
                "table": [list(r) for r in group.table], "generators": list(group.generators)}
    if isinstance(group, FreeProduct):
        return {"kind": "free_product", "factors": [group_to_json(f) for f in group.factors]}
    if isinstance(group, DirectProduct):
        return {"kind": "direct", "factors": [group_to_json(f) for f in group.factors]}
    if isinstance(group, SemidirectByFinite):
        action = {}
        for j, name in enumerate(group.acting.generators):
            gamma = group.acting.gen_canon(j)
            action[name] = {group.fiber.generators[i]: group.fiber.format(group.act(gamma, group.fiber.gen_canon(i)))
                            for i in range(group._nf)}
        return {"kind": "semidirect", "fiber": group_to_json(group.fiber),
                "acting": group_to_json(group.acting), "action": action}
    raise InvalidGroup(f"cannot serialize {group!r}")


def group_from_json(doc: dict[str, Any]) -> Group:
    try:
        kind = doc["kind"]
        if kind == "free":
            gens = doc.get("generators", doc.get("rank"))
            return FreeGroup(gens)
        if kind == "finite":
            return FiniteGroup(doc["elements"], doc["table"], doc.get("generators"))
        if kind == "free_product":
            return FreeProduct([group_from_json(f) for f in doc["factors"]])
        if kind == "direct":
            return DirectProduct([group_from_json(f) for f in doc["factors"]])
        if kind == "semidirect":
            fiber = group_from_json(doc["fiber"])
            acting = group_from_json(doc["acting"])
            if not isinstance(acting, FiniteGroup):
                raise InvalidGroup("acting group must be finite")
            action = {}
            for key, imgs in doc["action"].items():
                gamma = (acting.gen_canon(acting.generators.index(key)) if key in acting.generators
                         else acting.names.index(key))
                action[gamma] = tuple(parse_element(fiber, imgs[g]).canon for g in fiber.generators)
            return SemidirectByFinite(fiber, acting, action)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidGroup(f"malformed group spec: {exc}") from exc
    raise InvalidGroup(f"unknown group kind {kind!r}")


def context_from_json(doc: dict[str, Any]) -> GroupContext:
    """``{"group": ..., "quotient": "trivial" | {"group": ..., "images": {gen: word}}}``."""
    G = group_from_json(doc["group"])
    quot = doc.get("quotient", "trivial")
    name = doc.get("name", "")
    if quot == "trivial":
        return GroupContext.full(G, name=name)
    Q = group_from_json(quot["group"])
    imgs = quot["images"]
    if isinstance(imgs, dict):
        imgs = [imgs[g] for g in G.generators]
    images = [parse_element(Q, w) for w in imgs]
    return GroupContext(G, Homomorphism(G, Q, images), name=name)


def context_to_json(ctx: GroupContext) -> dict[str, Any]:
    doc: dict[str, Any] = {"group": group_to_json(ctx.group)}
    if ctx.name:
        doc["name"] = ctx.name
    if ctx.is_full:
        doc["quotient"] = "trivial"
    else:
        doc["quotient"] = {
            "group": group_to_json(ctx.qgroup),
            "images": {g: ctx.qgroup.format(img) for g, img in zip(ctx.group.generators, ctx.quotient.images)},
        }
    return doc
