"""Finite groups given by polycyclic presentations with prime relative orders.

Generators are ``g_1 .. g_n`` in the text formats and reports, but Python
code indexes them from 0.  Elements are exponent tuples in collected normal
form ``g_1^e_1 ... g_n^e_n``.
"""

from __future__ import annotations

import functools
import itertools
import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field

from .linalg import inv_mod, is_prime

PcElement = tuple  # tuple[int, ...], exponents in normal form


class PresentationError(ValueError):
    pass


class NotRefinedError(ValueError):
    """The polycyclic sequence does not pass through a required series term."""


class NotNilpotentError(ValueError):
    pass


@dataclass(frozen=True)
class PcPresentation:
    """Consistent polycyclic presentation.

    ``powers[i]`` is the normal form of ``g_i^{r_i}`` and ``conjugates[i][j]``
    (for ``j < i``) the normal form of ``g_i^{g_j}``, both as full length-n
    exponent tuples.
    """

    rel_orders: tuple
    powers: tuple
    conjugates: tuple = field(repr=False)

    def __post_init__(self):
        n = len(self.rel_orders)
        if len(self.powers) != n or len(self.conjugates) != n:
            raise PresentationError("relation tables do not match generator count")
        for i, r in enumerate(self.rel_orders):
            if not is_prime(r):
                raise PresentationError("relative order of g%d is not prime: %d" % (i + 1, r))
        for i in range(n):
            self._check_vector(self.powers[i], i + 1, "power of g%d" % (i + 1))
            if len(self.conjugates[i]) != i:
                raise PresentationError("conjugate table of g%d has wrong length" % (i + 1))
            for j in range(i):
                self._check_vector(
                    self.conjugates[i][j], j + 1, "g%d^g%d" % (i + 1, j + 1)
                )

    def _check_vector(self, v, start, what):
        if len(v) != self.n:
            raise PresentationError("%s: wrong length" % what)
        for k, e in enumerate(v):
            if not 0 <= e < self.rel_orders[k]:
                raise PresentationError("%s: exponent %d of g%d out of range" % (what, e, k + 1))
            if e and k < start:
                raise PresentationError("%s: involves g%d" % (what, k + 1))

    @classmethod
    def from_relations(cls, rel_orders, powers=None, conjugates=None) -> PcPresentation:
        """Build from sparse relations; omitted ones are trivial.

        ``powers`` maps ``i`` to a vector or ``{k: e}``; ``conjugates`` maps
        ``(i, j)`` with ``j < i`` likewise.  Indices are 0-based.
        """
        rel_orders = tuple(int(r) for r in rel_orders)
        n = len(rel_orders)

        def vec(v):
            out = [0] * n
            items = v.items() if isinstance(v, dict) else enumerate(v)
            for k, e in items:
                out[k] = e % rel_orders[k]
            return tuple(out)

        powers = powers or {}
        conjugates = conjugates or {}
        pw = tuple(vec(powers.get(i, {})) for i in range(n))
        cj = tuple(
            tuple(vec(conjugates[(i, j)]) if (i, j) in conjugates else unit(n, i) for j in range(i))
            for i in range(n)
        )
        return cls(rel_orders, pw, cj)

    @property
    def n(self) -> int:
        return len(self.rel_orders)

    def order(self) -> int:
        return math.prod(self.rel_orders)

    def composition_length(self) -> int:
        return self.n

    @property
    def identity(self) -> PcElement:
        return (0,) * self.n

    def gen(self, i: int, e: int = 1) -> PcElement:
        v = [0] * self.n
        v[i] = e % self.rel_orders[i]
        return tuple(v)

    def is_trivial_conjugate(self, i: int, j: int) -> bool:
        return self.conjugates[i][j] == unit(self.n, i)

    @functools.cached_property
    def _tables(self):
        n = self.n
        pow_items = [word_items(self.powers[i]) for i in range(n)]
        conj_items = [[word_items(self.conjugates[k][g]) for g in range(k)] for k in range(n)]
        nontriv = [
            tuple(k for k in range(g + 1, n) if not self.is_trivial_conjugate(k, g)) for g in range(n)
        ]
        nontriv_sets = [frozenset(t) for t in nontriv]
        return pow_items, conj_items, nontriv, nontriv_sets

    def _collect(self, w: list, stack: list) -> list:
        """Collection from the left: multiply ``w`` by the items on ``stack``."""
        r = self.rel_orders
        n = self.n
        pow_items, conj_items, nontriv, nontriv_sets = self._tables
        while stack:
            g, e = stack.pop()
            if e > 1:
                stack.append((g, e - 1))
            first = -1
            for k in nontriv[g]:
                if w[k]:
                    first = k
                    break
            if w[g] + 1 < r[g]:
                w[g] += 1
                if first < 0:
                    continue
                start = first
                pushes = []
            else:
                w[g] = 0
                pushes = list(pow_items[g])
                if not pushes:
                    if first < 0:
                        continue
                    start = first
                else:
                    start = g + 1
            for k in range(start, n):
                a = w[k]
                if a:
                    w[k] = 0
                    if k in nontriv_sets[g]:
                        pushes.extend(conj_items[k][g] * a)
                    else:
                        pushes.append((k, a))
            stack.extend(reversed(pushes))
        return w

    def collect(self, word: Iterable[int]) -> PcElement:
        """Normal form of a word of signed 1-based generator indices."""
        w = [0] * self.n
        stack = []
        for x in reversed(list(word)):
            if x == 0 or abs(x) > self.n:
                raise IndexError("generator index %d out of range 1..%d" % (x, self.n))
            if x > 0:
                stack.append((x - 1, 1))
            else:
                stack.extend(reversed(word_items(self._gen_inverses[-x - 1])))
        return tuple(self._collect(w, stack))

    @functools.cached_property
    def _gen_inverses(self):
        return [self.inverse(self.gen(i)) for i in range(self.n)]

    def multiply(self, x: PcElement, y: PcElement) -> PcElement:
        stack = word_items(y)
        stack.reverse()
        return tuple(self._collect(list(x), stack))

    def mul_word(self, x: PcElement, items) -> PcElement:
        stack = list(reversed(items))
        return tuple(self._collect(list(x), stack))

    def product(self, *xs: PcElement) -> PcElement:
        out = self.identity
        for x in xs:
            out = self.multiply(out, x)
        return out

    def inverse(self, x: PcElement) -> PcElement:
        z = list(x)
        y = [0] * self.n
        for i in range(self.n):
            if z[i]:
                e = self.rel_orders[i] - z[i]
                y[i] = e
                z = self._collect(z, [(i, e)])
        return tuple(y)

    def power(self, x: PcElement, e: int) -> PcElement:
        if e < 0:
            x, e = self.inverse(x), -e
        out = self.identity
        base = x
        while e:
            if e & 1:
                out = self.multiply(out, base)
            e >>= 1
            if e:
                base = self.multiply(base, base)
        return out

    def conjugate(self, x: PcElement, y: PcElement) -> PcElement:
        """``x^y = y^-1 x y``."""
        return self.product(self.inverse(y), x, y)

    def commutator(self, x: PcElement, y: PcElement) -> PcElement:
        """``[x, y] = x^-1 y^-1 x y``."""
        return self.multiply(self.inverse(self.multiply(y, x)), self.multiply(x, y))

    def element_order(self, x: PcElement) -> int:
        order = self.order()
        for q in sorted(set(self.rel_orders)):
            while order % q == 0 and self.power(x, order // q) == self.identity:
                order //= q
        return order

    def elements(self) -> Iterator[PcElement]:
        return itertools.product(*[range(r) for r in self.rel_orders])

    def index(self, x: PcElement) -> int:
        """Mixed-radix position of ``x`` in :meth:`elements` order."""
        idx = 0
        for e, r in zip(x, self.rel_orders):
            idx = idx * r + e
        return idx


def unit(n: int, i: int, e: int = 1) -> PcElement:
    v = [0] * n
    v[i] = e
    return tuple(v)


def word_items(v) -> list:
    return [(k, e) for k, e in enumerate(v) if e]


def depth(x: PcElement) -> int:
    """Index of the first non-zero exponent, ``len(x)`` for the identity."""
    for k, e in enumerate(x):
        if e:
            return k
    return len(x)


# -- consistency -------------------------------------------------------------


def consistency_tests(n: int, rel_orders: Sequence[int]):
    """Yield ``(label, lhs, rhs)`` overlap tests as small expression trees.

    Leaves are ``("g", i, e)`` generator powers; nodes ``("*", a, b)``.
    """

    def g(i, e=1):
        return ("g", i, e)

    def mul(a, b):
        return ("*", a, b)

    def P(i):
        return mul(g(i, rel_orders[i] - 1), g(i))

    for k in range(n):
        for j in range(k):
            for i in range(j):
                yield (
                    "g%d g%d g%d" % (k + 1, j + 1, i + 1),
                    mul(mul(g(k), g(j)), g(i)),
                    mul(g(k), mul(g(j), g(i))),
                )
    for j in range(n):
        for i in range(j):
            yield (
                "g%d^%d g%d" % (j + 1, rel_orders[j], i + 1),
                mul(P(j), g(i)),
                mul(g(j, rel_orders[j] - 1), mul(g(j), g(i))),
            )
            yield (
                "g%d g%d^%d" % (j + 1, i + 1, rel_orders[i]),
                mul(g(j), P(i)),
                mul(mul(g(j), g(i)), g(i, rel_orders[i] - 1)),
            )
    for i in range(n):
        yield ("g%d^%d" % (i + 1, rel_orders[i] + 1), mul(P(i), g(i)), mul(g(i), P(i)))


def evaluate_test(expr, gen, mul):
    if expr[0] == "g":
        return gen(expr[1], expr[2])
    return mul(evaluate_test(expr[1], gen, mul), evaluate_test(expr[2], gen, mul))


def check_consistency(pres: PcPresentation) -> list[str]:
    """Labels of the failing overlap tests; an empty list means consistent."""
    failures = []
    for label, lhs, rhs in consistency_tests(pres.n, pres.rel_orders):
        a = evaluate_test(lhs, pres.gen, pres.multiply)
        b = evaluate_test(rhs, pres.gen, pres.multiply)
        if a != b:
            failures.append(label)
    return failures


# -- subgroups ---------------------------------------------------------------


@dataclass(frozen=True)
class Subgroup:
    """Subgroup held by its canonical induced generating sequence.

    Generators have distinct, increasing depths, leading exponent 1, and zero
    exponents at the depths of the other generators.
    """

    gens: tuple
    rel_orders: tuple

    @property
    def depths(self) -> tuple:
        return tuple(depth(x) for x in self.gens)

    def order(self) -> int:
        return math.prod(self.rel_orders[d] for d in self.depths)

    def is_trivial(self) -> bool:
        return not self.gens

    def tail_index(self) -> int | None:
        """``k`` such that this subgroup is ``<g_k, ..., g_n>`` (0-based), else None."""
        n = len(self.rel_orders)
        if not self.gens:
            return n
        d0 = self.depths[0]
        return d0 if self.depths == tuple(range(d0, n)) else None

    def __len__(self):
        return len(self.gens)


class _IGSBuilder:
    def __init__(self, pres: PcPresentation, igs: dict | None = None):
        self.pres = pres
        self.igs = dict(igs or {})

    def sift(self, x: PcElement) -> PcElement:
        pres = self.pres
        while True:
            d = depth(x)
            if d == pres.n or d not in self.igs:
                return x
            x = pres.multiply(pres.power(self.igs[d], -x[d]), x)

    def add(self, x: PcElement) -> PcElement | None:
        """Sift ``x``; if it is new, normalise and insert it, returning it."""
        y = self.sift(x)
        d = depth(y)
        if d == self.pres.n:
            return None
        r = self.pres.rel_orders[d]
        y = self.pres.power(y, inv_mod(y[d], r))
        self.igs[d] = y
        return y

    def close(self, queue: list, conjugators: Sequence[PcElement] = ()) -> None:
        """Add ``queue`` and close under powers, commutators and conjugation."""
        pres = self.pres
        while queue:
            y = self.add(queue.pop())
            if y is None:
                continue
            d = depth(y)
            queue.append(pres.power(y, pres.rel_orders[d]))
            for z in list(self.igs.values()):
                if z is not y:
                    queue.append(pres.commutator(y, z))
            for c in conjugators:
                queue.append(pres.conjugate(y, c))

    def subgroup(self) -> Subgroup:
        pres = self.pres
        ds = sorted(self.igs)
        gens = [list(self.igs[d]) for d in ds]
        # canonical: clear exponents at other generators' depths
        for a in range(len(ds)):
            x = tuple(gens[a])
            for b in range(a + 1, len(ds)):
                e = x[ds[b]]
                if e:
                    x = pres.multiply(x, pres.power(tuple(gens[b]), -e))
            gens[a] = x
        return Subgroup(tuple(tuple(g) for g in gens), pres.rel_orders)


def subgroup(pres: PcPresentation, gens: Iterable[PcElement]) -> Subgroup:
    b = _IGSBuilder(pres)
    b.close(list(gens))
    return b.subgroup()


def normal_closure(pres: PcPresentation, gens: Iterable[PcElement], under: Sequence[PcElement] | None = None) -> Subgroup:
    """Smallest subgroup containing ``gens`` and normalised by ``under`` (default: G)."""
    if under is None:
        under = [pres.gen(i) for i in range(pres.n)]
    b = _IGSBuilder(pres)
    b.close(list(gens), conjugators=list(under))
    return b.subgroup()


def whole_group(pres: PcPresentation) -> Subgroup:
    return Subgroup(tuple(pres.gen(i) for i in range(pres.n)), pres.rel_orders)


def trivial_subgroup(pres: PcPresentation) -> Subgroup:
    return Subgroup((), pres.rel_orders)


def contains(pres: PcPresentation, sub: Subgroup, x: PcElement) -> bool:
    b = _IGSBuilder(pres, {depth(g): g for g in sub.gens})
    return depth(b.sift(x)) == pres.n


def commutator_subgroup(pres: PcPresentation, h: Subgroup, k: Subgroup) -> Subgroup:
    """``[H, K]`` for subgroups normal in G."""
    comms = [pres.commutator(x, y) for x in h.gens for y in k.gens]
    return normal_closure(pres, comms)


def derived_series(pres: PcPresentation) -> list[Subgroup]:
    series = [whole_group(pres)]
    while not series[-1].is_trivial():
        nxt = commutator_subgroup(pres, series[-1], series[-1])
        if nxt == series[-1]:
            raise ValueError("group is not solvable")
        series.append(nxt)
    return series


def lower_central_series(pres: PcPresentation) -> list[Subgroup]:
    """Terms down to 1, or down to the point where the series stabilises."""
    g = whole_group(pres)
    series = [g]
    while not series[-1].is_trivial():
        nxt = commutator_subgroup(pres, g, series[-1])
        if nxt == series[-1]:
            break
        series.append(nxt)
    return series


def derived_length(pres: PcPresentation) -> int:
    return len(derived_series(pres)) - 1


def nilpotency_class(pres: PcPresentation) -> int | None:
    lcs = lower_central_series(pres)
    return len(lcs) - 1 if lcs[-1].is_trivial() else None


def gamma_smallest(pres: PcPresentation) -> Subgroup:
    """Last non-trivial term of the derived series."""
    if pres.n == 0:
        raise ValueError("trivial group")
    return derived_series(pres)[-2]


def lambda_smallest(pres: PcPresentation) -> Subgroup:
    """Last non-trivial term of the lower central series (G nilpotent)."""
    if pres.n == 0:
        raise ValueError("trivial group")
    lcs = lower_central_series(pres)
    if not lcs[-1].is_trivial():
        raise NotNilpotentError("group is not nilpotent")
    return lcs[-2]


def series_indices(pres: PcPresentation, kind: str) -> tuple[int, int]:
    """1-based ``(d, m)`` with ``G' = <g_{d+1}..g_n>`` and the smallest
    non-trivial term (lower central or derived) ``= <g_m..g_n>``."""
    if kind == "lcs":
        series = lower_central_series(pres)
        if not series[-1].is_trivial():
            raise NotNilpotentError("group is not nilpotent")
    elif kind == "derived":
        series = derived_series(pres)
    else:
        raise ValueError(kind)
    g_prime = series[1] if len(series) > 1 else trivial_subgroup(pres)
    last = series[-2]
    kd, km = g_prime.tail_index(), last.tail_index()
    if kd is None or km is None:
        raise NotRefinedError("pcgs does not refine series")
    return kd, km + 1


def refines(pres: PcPresentation, series: Sequence[Subgroup]) -> bool:
    return all(s.tail_index() is not None for s in series)


# -- refinement through a normal series ---------------------------------------


class Refinement:
    """A new polycyclic sequence passing through a given normal series.

    ``images[i]`` is the i-th new generator in old coordinates.
    """

    def __init__(self, pres: PcPresentation, series: Sequence[Subgroup]):
        self.old = pres
        terms = list(series)
        if not terms or terms[0].order() != pres.order():
            terms.insert(0, whole_group(pres))
        if not terms[-1].is_trivial():
            terms.append(trivial_subgroup(pres))
        self.layers = []  # (combined igs by depth, [(depth, new position)])
        images = []
        for upper, lower in zip(terms, terms[1:]):
            lower_depths = set(lower.depths)
            combined = {depth(x): x for x in lower.gens}
            mods = []
            for x in upper.gens:
                d = depth(x)
                if d not in lower_depths:
                    combined[d] = x
                    mods.append((d, len(images)))
                    images.append(x)
            self.layers.append((combined, mods))
        if len(images) != pres.n:
            raise ValueError("series is not a chain of normal subgroups")
        self.images = tuple(images)
        self.boundaries = []
        pos = 0
        for _, mods in self.layers:
            self.boundaries.append(pos)
            pos += len(mods)
        self.pres = self._build()

    def to_new(self, x: PcElement) -> PcElement:
        pres = self.old
        y = [0] * pres.n
        cur = x
        for combined, mods in self.layers:
            modpos = dict(mods)
            z = cur
            while True:
                d = depth(z)
                if d == pres.n:
                    break
                e = z[d]
                if d in modpos:
                    y[modpos[d]] = e
                z = pres.multiply(pres.power(combined[d], -e), z)
            prefix = pres.identity
            for d, pos in mods:
                if y[pos]:
                    prefix = pres.multiply(prefix, pres.power(combined[d], y[pos]))
            cur = pres.multiply(pres.inverse(prefix), cur)
        if cur != pres.identity:
            raise ValueError("element not expressible")
        return tuple(y)

    def to_old(self, y: PcElement) -> PcElement:
        out = self.old.identity
        for img, e in zip(self.images, y):
            if e:
                out = self.old.multiply(out, self.old.power(img, e))
        return out

    def _build(self) -> PcPresentation:
        old = self.old
        rel = tuple(old.rel_orders[depth(x)] for x in self.images)
        powers = tuple(self.to_new(old.power(x, r)) for x, r in zip(self.images, rel))
        conj = tuple(
            tuple(self.to_new(old.conjugate(self.images[i], self.images[j])) for j in range(i))
            for i in range(len(rel))
        )
        return PcPresentation(rel, powers, conj)


def refine_presentation(pres: PcPresentation, series: Sequence[Subgroup]) -> tuple[PcPresentation, Refinement]:
    """Presentation on a pcgs through ``series``; the refinement maps elements."""
    ref = Refinement(pres, series)
    return ref.pres, ref


def quotient_by_tail(pres: PcPresentation, m: int) -> PcPresentation:
    """``G / <g_{m+1}..g_n>`` (0-based ``m`` = number of kept generators).

    The tail must be normal, i.e. a series term.
    """
    return PcPresentation(
        pres.rel_orders[:m],
        tuple(v[:m] for v in pres.powers[:m]),
        tuple(tuple(v[:m] for v in row) for row in pres.conjugates[:m]),
    )
