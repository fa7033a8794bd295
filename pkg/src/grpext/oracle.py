"""Brute-force ground truth for small groups.

Everything here works on explicit multiplication tables and explicit
cocycle functions G x G -> A, independently of tails and collection
beyond building the table.  Sizes are capped; the searches are meant for
groups of order a few hundred at most.
"""

from __future__ import annotations

import itertools
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .gfmodule import GModule
from .pcgroup import (
    PcPresentation,
    derived_series,
    lower_central_series,
    quotient_by_tail,
    refine_presentation,
    word_items,
)

TABLE_CAP = 4096
COHOMOLOGY_CAP = 16
ISO_CAP = 512
HISTOGRAM_CAP = 10**6


class OracleCapError(ValueError):
    pass


@dataclass
class GroupTable:
    """A finite group as a multiplication table on ``0..order-1``."""

    table: np.ndarray
    labels: list = field(default_factory=list)
    check: bool = True

    def __post_init__(self):
        self.table = np.asarray(self.table, dtype=np.int64)
        n = self.table.shape[0]
        if self.table.shape != (n, n):
            raise ValueError("table must be square")
        if not self.labels:
            self.labels = list(range(n))
        ids = [e for e in range(n) if np.array_equal(self.table[e], np.arange(n))]
        if len(ids) != 1 or not np.array_equal(self.table[:, ids[0]], np.arange(n)):
            raise ValueError("no two-sided identity")
        self.identity = ids[0]
        if self.check:
            for row in self.table:
                if len(set(row.tolist())) != n:
                    raise ValueError("table is not a Latin square")
            self._check_associative()
        inv = np.zeros(n, dtype=np.int64)
        pos = np.nonzero(self.table == self.identity)
        inv[pos[0]] = pos[1]
        self.inverse = inv

    def _check_associative(self, chunk: int = 64):
        t = self.table
        n = t.shape[0]
        for a0 in range(0, n, chunk):
            a = np.arange(a0, min(n, a0 + chunk))
            lhs = t[t[a]]  # (ab)c : shape (len a, n, n)
            rhs = t[a][:, t]  # a(bc)
            if not np.array_equal(lhs, rhs):
                raise ValueError("table is not associative")

    @property
    def order(self) -> int:
        return self.table.shape[0]

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def power(self, a: int, e: int) -> int:
        x = self.identity
        if e < 0:
            a, e = int(self.inverse[a]), -e
        for _ in range(e):
            x = int(self.table[x, a])
        return x

    def comm(self, a: int, b: int) -> int:
        inv = self.inverse
        return int(self.table[self.table[inv[a], inv[b]], self.table[a, b]])

    def element_orders(self) -> np.ndarray:
        n = self.order
        out = np.ones(n, dtype=np.int64)
        cur = np.arange(n)
        done = cur == self.identity
        k = 1
        while not done.all():
            cur = self.table[cur, np.arange(n)]
            k += 1
            hit = (cur == self.identity) & ~done
            out[hit] = k
            done |= hit
        return out

    def closure(self, gens: Iterable[int]) -> np.ndarray:
        """Sorted element indices of the subgroup generated by ``gens``."""
        gens = list(gens)
        seen = {self.identity}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = int(self.table[x, g])
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return np.array(sorted(seen), dtype=np.int64)

    def commutator_subgroup(self, h: np.ndarray, k: np.ndarray) -> np.ndarray:
        gens = {self.comm(int(a), int(b)) for a in h for b in k}
        sub = self.closure(gens)
        # [H, K] is normalised by H and K; close under that conjugation
        while True:
            conj = {int(self.table[self.table[self.inverse[x], int(c)], x]) for c in sub for x in np.concatenate([h, k])}
            bigger = self.closure(set(sub.tolist()) | conj)
            if len(bigger) == len(sub):
                return sub
            sub = bigger

    @classmethod
    def from_pres(cls, pres: PcPresentation, cap: int = TABLE_CAP) -> GroupTable:
        n = pres.order()
        if n > cap:
            raise OracleCapError("group order %d exceeds table cap %d" % (n, cap))
        elts = list(pres.elements())
        t = np.zeros((n, n), dtype=np.int64)
        for a, x in enumerate(elts):
            for b, y in enumerate(elts):
                t[a, b] = pres.index(pres.multiply(x, y))
        return cls(t, elts, check=False)

    @classmethod
    def from_permutations(cls, gens: Sequence[Sequence[int]], cap: int = TABLE_CAP) -> GroupTable:
        """Group generated by permutations (images of 0..d-1); composition left to right."""
        gens = [tuple(g) for g in gens]
        d = len(gens[0])
        ident = tuple(range(d))
        elts = [ident]
        index = {ident: 0}
        k = 0
        while k < len(elts):
            x = elts[k]
            for g in gens:
                y = tuple(g[i] for i in x)
                if y not in index:
                    index[y] = len(elts)
                    elts.append(y)
                    if len(elts) > cap:
                        raise OracleCapError("permutation group exceeds cap %d" % cap)
            k += 1
        n = len(elts)
        t = np.zeros((n, n), dtype=np.int64)
        for a, x in enumerate(elts):
            for b, y in enumerate(elts):
                t[a, b] = index[tuple(y[i] for i in x)]
        return cls(t, elts)


# -- series and fingerprints on tables ------------------------------------------


def table_derived_series(g: GroupTable) -> list[np.ndarray]:
    series = [np.arange(g.order)]
    while True:
        nxt = g.commutator_subgroup(series[-1], series[-1])
        if len(nxt) == len(series[-1]):
            return series
        series.append(nxt)


def table_lower_central_series(g: GroupTable) -> list[np.ndarray]:
    whole = np.arange(g.order)
    series = [whole]
    while True:
        nxt = g.commutator_subgroup(series[-1], whole)
        if len(nxt) == len(series[-1]):
            return series
        series.append(nxt)


def _abelian_invariants_from_counts(order: int, count_killed) -> list[int]:
    """Invariants of an abelian group of ``order`` from ``count_killed(q)``,
    the number of elements with ``x^q = 1``."""
    inv = []
    m = order
    for p in range(2, order + 1):
        if m % p or not linalg.is_prime(p):
            continue
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        ranks = [0]
        q = 1
        while True:
            q *= p
            c = count_killed(q)
            r = round(np.log(c) / np.log(p))
            ranks.append(r)
            if r == e:
                break
        # number of cyclic factors of order >= p^k is ranks[k] - ranks[k-1]
        ge = [ranks[k] - ranks[k - 1] for k in range(1, len(ranks))] + [0]
        for k in range(1, len(ge)):
            inv.extend([p**k] * (ge[k - 1] - ge[k]))
    return sorted(inv)


@dataclass(frozen=True)
class Fingerprint:
    order: int
    histogram: tuple | None
    abelian_invariants: tuple
    derived_length: int
    nilpotency_class: int | None

    def involutions(self) -> int | None:
        if self.histogram is None:
            return None
        return dict(self.histogram).get(2, 0)

    def __str__(self):
        hist = "?" if self.histogram is None else ",".join("%d:%d" % kv for kv in self.histogram)
        cls = "inf" if self.nilpotency_class is None else str(self.nilpotency_class)
        ab = ",".join(map(str, self.abelian_invariants)) or "1"
        return "order=%d orders={%s} abelian=[%s] dl=%d class=%s" % (
            self.order,
            hist,
            ab,
            self.derived_length,
            cls,
        )


def fingerprint(obj, histogram_cap: int = HISTOGRAM_CAP) -> Fingerprint:
    if isinstance(obj, GroupTable):
        return _table_fingerprint(obj)
    pres: PcPresentation = obj
    order = pres.order()
    hist = None
    if order <= histogram_cap:
        hist = tuple(sorted(Counter(pres.element_order(x) for x in pres.elements()).items()))
    ds = derived_series(pres)
    lcs = lower_central_series(pres)
    nil = len(lcs) - 1 if lcs[-1].is_trivial() else None
    # G/G' as a pc quotient after refining through G'
    if len(ds) > 1:
        ref, _ = refine_presentation(pres, [ds[0], ds[1], ds[-1]])
        d = ref.n - len(ds[1])
        ab = quotient_by_tail(ref, d)
    else:
        ab = pres
    elts = list(ab.elements())
    inv = _abelian_invariants_from_counts(
        ab.order(), lambda q: sum(1 for x in elts if not any(ab.power(x, q)))
    )
    dl = len(ds) - 1 if ds[-1].is_trivial() else -1
    return Fingerprint(order, hist, tuple(inv), dl, nil)


def _table_fingerprint(g: GroupTable) -> Fingerprint:
    orders = g.element_orders()
    hist = tuple(sorted(Counter(orders.tolist()).items()))
    ds = table_derived_series(g)
    lcs = table_lower_central_series(g)
    nil = len(lcs) - 1 if len(lcs[-1]) == 1 else None
    dsub = set(ds[1].tolist()) if len(ds) > 1 else {g.identity}
    inv = _abelian_invariants_from_counts(
        g.order // len(dsub),
        lambda q: sum(1 for x in range(g.order) if g.power(x, q) in dsub) // len(dsub),
    )
    dl = len(ds) - 1 if len(ds[-1]) == 1 else -1
    return Fingerprint(g.order, hist, tuple(inv), dl, nil)


# -- homomorphism search ---------------------------------------------------------


def generating_set(g: GroupTable) -> list[int]:
    """A small generating set, greedily by decreasing element order."""
    orders = g.element_orders()
    cand = sorted(range(g.order), key=lambda x: (-orders[x], x))
    gens: list[int] = []
    sub = {g.identity}
    for x in cand:
        if len(sub) == g.order:
            break
        if x not in sub:
            gens.append(x)
            sub = set(g.closure(gens).tolist())
    return gens


@dataclass
class _Tree:
    order: np.ndarray  # elements in BFS order
    parent: np.ndarray
    via: np.ndarray  # generator position used to reach the element
    levels: list


def _spanning_tree(g: GroupTable, gens: Sequence[int]) -> _Tree:
    n = g.order
    parent = np.full(n, -1)
    via = np.full(n, -1)
    seen = np.zeros(n, dtype=bool)
    seen[g.identity] = True
    levels = []
    frontier = [g.identity]
    order = [g.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for k, s in enumerate(gens):
                y = int(g.table[x, s])
                if not seen[y]:
                    seen[y] = True
                    parent[y] = x
                    via[y] = k
                    nxt.append(y)
        if nxt:
            levels.append(np.array(nxt))
        order.extend(nxt)
        frontier = nxt
    return _Tree(np.array(order), parent, via, levels)


def _extend(g: GroupTable, gens, tree: _Tree, h: GroupTable, imgs) -> np.ndarray | None:
    """The homomorphism G -> H with gens -> imgs, or None."""
    phi = np.full(g.order, -1)
    phi[g.identity] = h.identity
    imgs = np.asarray(imgs)
    for lev in tree.levels:
        phi[lev] = h.table[phi[tree.parent[lev]], imgs[tree.via[lev]]]
    for s, y in zip(gens, imgs):
        if not np.array_equal(phi[g.table[:, s]], h.table[phi, y]):
            return None
    return phi


def _candidates(g: GroupTable, gens, h: GroupTable):
    og, oh = g.element_orders(), h.element_orders()
    by_order: dict[int, list[int]] = {}
    for y in range(h.order):
        by_order.setdefault(int(oh[y]), []).append(y)
    return og, oh, [by_order.get(int(og[s]), []) for s in gens]


def _search(g: GroupTable, h: GroupTable, first_only: bool):
    if g.order != h.order:
        return []
    if g.order > ISO_CAP:
        raise OracleCapError("order %d exceeds isomorphism cap %d" % (g.order, ISO_CAP))
    gens = generating_set(g)
    tree = _spanning_tree(g, gens)
    og, oh, cands = _candidates(g, gens, h)
    # products of consecutive generators prune early
    found = []

    def rec(k, chosen):
        if k == len(gens):
            phi = _extend(g, gens, tree, h, chosen)
            if phi is not None and len(set(phi.tolist())) == g.order:
                found.append(phi)
                return first_only
            return False
        for y in cands[k]:
            ok = True
            for j in range(k):
                if oh[h.table[chosen[j], y]] != og[g.table[gens[j], gens[k]]]:
                    ok = False
                    break
                if oh[h.comm(chosen[j], y)] != og[g.comm(gens[j], gens[k])]:
                    ok = False
                    break
            if ok and rec(k + 1, chosen + [y]):
                return True
        return False

    rec(0, [])
    return found


def _as_table(x) -> GroupTable:
    return x if isinstance(x, GroupTable) else GroupTable.from_pres(x, cap=ISO_CAP)


def isomorphic(a, b) -> bool:
    if fingerprint(a) != fingerprint(b):
        return False
    return bool(_search(_as_table(a), _as_table(b), first_only=True))


def automorphisms(x) -> list[np.ndarray]:
    """All automorphisms as permutation arrays of the table elements."""
    g = _as_table(x)
    return _search(g, g, first_only=False)


def aut_group_order(x) -> int:
    return len(automorphisms(x))


def aut_generators(pres: PcPresentation) -> tuple[list[tuple], int]:
    """Generators of Aut(G) as images of the pc generators, plus |Aut(G)|.

    Greedy: walk the automorphisms in order and keep one whenever it is not
    in the group generated so far.
    """
    g = GroupTable.from_pres(pres, cap=ISO_CAP)
    auts = automorphisms(g)
    if not auts:
        raise AssertionError("identity automorphism not found")
    keyed = {a.tobytes(): a for a in auts}
    gens: list[np.ndarray] = []
    group = {np.arange(g.order).tobytes()}
    for a in auts:
        if a.tobytes() in group:
            continue
        gens.append(a)
        frontier = [np.arange(g.order)]
        group = {frontier[0].tobytes()}
        while frontier:
            nxt = []
            for f in frontier:
                for s in gens:
                    c = s[f]
                    k = c.tobytes()
                    if k not in group:
                        group.add(k)
                        nxt.append(c)
            frontier = nxt
        if len(group) == len(keyed):
            break
    images = []
    for a in gens:
        images.append(tuple(g.labels[a[pres.index(pres.gen(i))]] for i in range(pres.n)))
    return images, len(auts)


# -- cohomology by brute force --------------------------------------------------


def element_matrices(g: GroupTable, module: GModule) -> np.ndarray:
    """Action matrix of every table element (labels must be pc elements)."""
    return np.array([module.matrix_of(x) for x in g.labels], dtype=np.int64)


def _cocycle_parametrisation(g: GroupTable, mats: np.ndarray, gens: Sequence[int], s: int) -> np.ndarray:
    """Linear expressions ``D[x, y] (s x V)`` for a cochain in terms of its
    values ``d(x, k)``, ``k`` in ``gens`` (``V = n |gens| s`` unknowns).

    Values at other second arguments follow from associativity along a
    spanning tree: ``d(x, yk) = d(x, y)^k + d(xy, k) - d(y, k)``.
    """
    n = g.order
    nv = n * len(gens) * s
    D = np.zeros((n, n, s, nv), dtype=np.int64)
    for gi, k in enumerate(gens):
        for x in range(n):
            base = (x * len(gens) + gi) * s
            D[x, k, :, base : base + s] = np.eye(s, dtype=np.int64)
    tree = _spanning_tree(g, gens)
    done = np.zeros(n, dtype=bool)
    done[g.identity] = True
    for lev in tree.levels:
        for y in lev:
            par, k = int(tree.parent[y]), gens[tree.via[y]]
            if y == k and par == g.identity:
                done[y] = True
                continue
            D[:, y] = (
                np.einsum("xsv,st->xtv", D[:, par], mats[k]) + D[g.table[:, par], k] - D[par, k][None]
            )
            done[y] = True
    return D


def brute_Z2(g: GroupTable, mats: np.ndarray, p: int, s: int, cap: int = COHOMOLOGY_CAP) -> np.ndarray:
    """Basis of normalised 2-cocycles, each row reshaped as ``(n, n, s)``.

    Unknowns are the values on (element, generator) pairs; associativity is
    imposed on every triple ``(a, b, k)`` with ``k`` a generator.  The right
    nucleus of the loop defined by a normalised cochain is a subgroup
    containing A, so these triples suffice.
    """
    n = g.order
    if n > cap:
        raise OracleCapError("order %d exceeds cohomology cap %d" % (n, cap))
    if n == 1 or s == 0:
        return np.zeros((0, n, n, s), dtype=np.int64)
    gens = generating_set(g)
    D = _cocycle_parametrisation(g, mats, gens, s) % p
    nv = D.shape[-1]
    a, b = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    a, b = a.reshape(-1), b.reshape(-1)
    eqs = [D[g.identity].reshape(-1, nv), D[:, g.identity].reshape(-1, nv)]
    for k in gens:
        ab, bk = g.table[a, b], g.table[b, k]
        lhs = np.einsum("esv,st->etv", D[a, b], mats[k]) + D[ab, k] - D[b, k] - D[a, bk]
        eqs.append(lhs.reshape(-1, nv))
    E = np.concatenate(eqs) % p
    E = E[E.any(axis=1)]
    ker = linalg.kernel(E.T, p) if E.shape[0] else np.eye(nv, dtype=np.int64)
    return np.einsum("xysv,kv->kxys", D, ker) % p


def brute_Z1_dim(g: GroupTable, mats: np.ndarray, p: int, s: int) -> int:
    """Crossed homomorphisms ``e(xh) = e(x)^h + e(h)``; generators h suffice."""
    n = g.order
    others = [x for x in range(n) if x != g.identity]
    pos = {x: k for k, x in enumerate(others)}
    eye = np.eye(s, dtype=np.int64)
    cols = []
    for h in generating_set(g):
        for x in range(n):
            eq = np.zeros((len(others) * s, s), dtype=np.int64)
            for y, coeff in ((int(g.table[x, h]), eye), (x, -mats[h]), (h, -eye)):
                if y != g.identity:
                    eq[pos[y] * s : (pos[y] + 1) * s] += coeff
            cols.append(eq % p)
    if not cols or not others:
        return 0
    return linalg.kernel(np.concatenate(cols, axis=1), p).shape[0]


def coboundary(g: GroupTable, mats: np.ndarray, eps: np.ndarray, p: int) -> np.ndarray:
    """``d(x, y) = e(x)^y + e(y) - e(xy)`` as an ``(n, n, s)`` array."""
    out = np.einsum("xs,yst->xyt", eps, mats) + eps[None, :, :] - eps[g.table]
    return out % p


def brute_B2(g: GroupTable, mats: np.ndarray, p: int, s: int) -> np.ndarray:
    n = g.order
    rows = []
    for x in range(n):
        if x == g.identity:
            continue
        for c in range(s):
            eps = np.zeros((n, s), dtype=np.int64)
            eps[x, c] = 1
            rows.append(coboundary(g, mats, eps, p).reshape(-1))
    if not rows:
        return np.zeros((0, n, n, s), dtype=np.int64)
    r, _ = linalg.rref(np.array(rows), p)
    return r.reshape(-1, n, n, s)


def brute_H2_dim(g: GroupTable, mats: np.ndarray, p: int, s: int, cap: int = COHOMOLOGY_CAP) -> int:
    z2 = brute_Z2(g, mats, p, s, cap).shape[0]
    b2 = (g.order - 1) * s - brute_Z1_dim(g, mats, p, s)
    return z2 - b2


def cocycle_holds(g: GroupTable, mats: np.ndarray, delta: np.ndarray, p: int) -> bool:
    t = g.table
    lhs = np.einsum("abs,cst->abct", delta, mats)
    n = g.order
    a, b, c = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    lhs = lhs + delta[t[a, b], c]
    rhs = delta[b, c] + delta[a, t[b, c]]
    return not ((lhs - rhs) % p).any()


class TableExtension:
    """E = G x A with ``(g,a)(h,b) = (gh, a^h + b + d(g,h))``."""

    def __init__(self, g: GroupTable, mats: np.ndarray, delta: np.ndarray, p: int):
        self.g, self.mats, self.delta, self.p = g, mats, delta, p

    def mul(self, x, y):
        (g, a), (h, b) = x, y
        c = (np.asarray(a) @ self.mats[h] + b + self.delta[g, h]) % self.p
        return int(self.g.table[g, h]), c

    def identity(self):
        return self.g.identity, np.zeros(self.delta.shape[-1], dtype=np.int64)

    def inverse(self, x):
        g, a = x
        gi = int(self.g.inverse[g])
        # (g,a)(gi,b) = (1, a^gi + b + d(g,gi)) = 0
        b = (-(np.asarray(a) @ self.mats[gi]) - self.delta[g, gi]) % self.p
        return gi, b

    def power(self, x, e: int):
        if e < 0:
            x, e = self.inverse(x), -e
        out = self.identity()
        for _ in range(e):
            out = self.mul(out, x)
        return out

    def comm(self, x, y):
        return self.mul(self.mul(self.inverse(x), self.inverse(y)), self.mul(x, y))

    def conj(self, x, y):
        return self.mul(self.mul(self.inverse(y), x), y)

    def relation_tails(self, pres: PcPresentation) -> np.ndarray:
        """``t_delta``: tails of the relations at the lifts ``(g_i, 0)``."""
        s = self.delta.shape[-1]
        lift = [(pres.index(pres.gen(i)), np.zeros(s, dtype=np.int64)) for i in range(pres.n)]
        out = []
        for i in range(pres.n):
            for j in range(i + 1):
                if i == j:
                    lhs = self.power(lift[i], pres.rel_orders[i])
                    rel = pres.powers[i]
                else:
                    lhs = self.conj(lift[i], lift[j])
                    rel = pres.conjugates[i][j]
                w = self.identity()
                for k, e in word_items(rel):
                    w = self.mul(w, self.power(lift[k], e))
                g, a = self.mul(self.inverse(w), lhs)
                assert g == self.g.identity
                out.append(a)
        return np.array(out, dtype=np.int64).reshape(-1)


def eval_hatdelta(g: GroupTable, delta: np.ndarray, x: int, h: int, p: int) -> np.ndarray:
    """``d(x,h) - d(h,x) - d((hx)^-1, hx) + d((hx)^-1, xh)`` (trivial module)."""
    t = g.table
    hx = int(t[h, x])
    xh = int(t[x, h])
    hxi = int(g.inverse[hx])
    return (delta[x, h] - delta[h, x] - delta[hxi, hx] + delta[hxi, xh]) % p


def transform_cocycle(g: GroupTable, delta: np.ndarray, eta_inv: np.ndarray, nu: np.ndarray, p: int) -> np.ndarray:
    """``(x, y) -> d(x^{eta^-1}, y^{eta^-1})^nu`` with ``eta_inv`` a permutation array."""
    return delta[eta_inv[:, None], eta_inv[None, :]] @ nu % p


# -- small groups ---------------------------------------------------------------


def small_pc_groups(max_order: int = 16) -> list[PcPresentation]:
    """One pc presentation per isomorphism type of order <= ``max_order``.

    Built by extending each known group by every module GF(p)^s with
    ``p^s`` small enough (all actions) and every class of Z/B, then
    discarding isomorphic duplicates.  Every finite solvable group has a
    minimal normal subgroup that is elementary abelian, so this reaches
    every group of order <= 16.
    """
    from .cocycles import cocycle_space, extension_presentation, h2_transversal

    trivial = PcPresentation((), (), ())
    found: dict[int, list[PcPresentation]] = {1: [trivial]}
    for order in range(2, max_order + 1):
        found[order] = []
        for base in sorted(d for d in found if order % d == 0 and d < order):
            q = order // base
            ps = [p for p in range(2, q + 1) if linalg.is_prime(p) and q % p == 0]
            if len(ps) != 1:
                continue
            p = ps[0]
            s = round(np.log(q) / np.log(p))
            if p**s != q:
                continue
            for h in found[base]:
                for module in all_modules(h, p, s):
                    space = cocycle_space(h, module)
                    for t in h2_transversal(space):
                        e = extension_presentation(h, module, t)
                        if not any(isomorphic(e, f) for f in found[order]):
                            found[order].append(e)
    out = []
    for order in sorted(found):
        out.extend(found[order])
    return out


def _invertible(s: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    cands = np.array(list(itertools.product(range(p), repeat=s * s)), dtype=np.int64).reshape(-1, s, s)
    keep = [a for a in cands if linalg.rank(a, p) == s]
    a = np.array(keep, dtype=np.int64).reshape(-1, s, s)
    return a, np.array([linalg.inverse(x, p) for x in a], dtype=np.int64).reshape(a.shape)


def _batch_power(a: np.ndarray, e: int, p: int) -> np.ndarray:
    out = np.broadcast_to(np.eye(a.shape[-1], dtype=np.int64), a.shape).copy()
    for _ in range(e):
        out = out @ a % p
    return out


def all_modules(h: PcPresentation, p: int, s: int, up_to_iso: bool = False):
    """Every action of ``h`` on GF(p)^s, as GModules in a fixed order.

    Matrices are assigned from the last generator down, all candidates of a
    level being tested at once; a partial assignment is dropped as soon as
    a relation among the assigned generators fails.  With ``up_to_iso``
    one module per isomorphism class (GL(s, p)-conjugacy of the matrix
    tuple) is returned, the least under lexicographic order of the
    flattened tuple.
    """
    from .gfmodule import GModule

    gl, gl_inv = _invertible(s, p)
    eye = np.eye(s, dtype=np.int64)
    n = h.n
    mats: list = [None] * n
    pw = {r: _batch_power(gl, r, p) for r in set(h.rel_orders)}

    def word(v):
        out = eye
        for k, e in word_items(v):
            out = out @ linalg.matrix_power(mats[k], e, p) % p
        return out

    def rec(k):
        if k < 0:
            yield tuple(m.copy() for m in mats)
            return
        ok = np.all(pw[h.rel_orders[k]] == word(h.powers[k]), axis=(1, 2))
        for i in range(k + 1, n):
            conj = gl_inv @ mats[i] @ gl % p
            ok &= np.all(conj == word(h.conjugates[i][k]), axis=(1, 2))
        for c in np.flatnonzero(ok):
            mats[k] = gl[c]
            yield from rec(k - 1)
        mats[k] = None

    seen: set = set()
    for tup in rec(n - 1):
        if up_to_iso and n:
            stack = np.array(tup)  # (n, s, s)
            if stack.tobytes() in seen:
                continue
            conj = np.einsum("gab,nbc,gcd->gnad", gl_inv, stack, gl) % p
            flat = conj.reshape(len(gl), -1)
            seen.update(f.tobytes() for f in flat)
            tup = tuple(flat[np.lexsort(flat.T[::-1])[0]].reshape(n, s, s))
        yield GModule.from_arrays(p, s, list(tup))
