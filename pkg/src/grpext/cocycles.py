"""Second cohomology through tails.

A tail vector ``t`` lists one module element per relation of the
presentation, indexed by the pairs ``J = {(i, j) : 1 <= j <= i <= n}`` in
lexicographic order: ``(i, i)`` for the power relation of ``g_i`` and
``(i, j)``, ``j < i``, for ``g_i^{g_j}``.  The extension ``P(t)`` appends
``t_{i,j}`` to the right-hand side of each relation.

Module values are carried as affine expressions: an array of shape
``(K + 1, s)`` whose last row is the constant part and whose first ``K``
rows are coefficients of unknowns.  Collecting symbolically in ``P(t)``
with unknown tails turns every consistency test into linear equations.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np

from . import linalg
from .gfmodule import GModule
from .linalg import Subspace
from .pcgroup import (
    PcElement,
    PcPresentation,
    check_consistency,
    consistency_tests,
    evaluate_test,
    unit,
    word_items,
)

DEFAULT_COSET_CAP = 10**7


class CapExceeded(RuntimeError):
    pass


class NotCocycle(ValueError):
    pass


def pairs(n: int) -> list[tuple[int, int]]:
    """1-based index pairs ``(i, j)``, ``1 <= j <= i <= n``, lexicographic."""
    return [(i, j) for i in range(1, n + 1) for j in range(1, i + 1)]


def pair_index(n: int) -> dict[tuple[int, int], int]:
    return {ij: k for k, ij in enumerate(pairs(n))}


@dataclass
class TailVector:
    """Tails as an ``(l, s)`` array over GF(p) with 1-based pair labels."""

    entries: np.ndarray
    p: int

    @classmethod
    def from_flat(cls, flat, n: int, s: int, p: int) -> TailVector:
        return cls(np.asarray(flat, dtype=np.int64).reshape(len(pairs(n)), s) % p, p)

    @classmethod
    def from_dict(cls, values: dict, n: int, s: int, p: int) -> TailVector:
        e = np.zeros((len(pairs(n)), s), dtype=np.int64)
        idx = pair_index(n)
        for ij, v in values.items():
            e[idx[ij]] = np.atleast_1d(v)
        return cls(e % p, p)

    @property
    def flat(self) -> np.ndarray:
        return self.entries.reshape(-1)

    @property
    def n(self) -> int:
        return int(round((np.sqrt(8 * self.entries.shape[0] + 1) - 1) / 2))

    def __getitem__(self, ij) -> np.ndarray:
        return self.entries[pair_index(self.n)[tuple(ij)]]

    def key(self) -> tuple:
        return tuple(int(x) for x in self.flat)


class ExtensionCollector:
    """Collection in an extension of A by G with affine-valued tails.

    ``tails`` maps 0-based ``(i, j)`` to an affine array; missing pairs have
    zero tail.  Elements are ``(exponents, affine array)``.
    """

    def __init__(self, pres: PcPresentation, module: GModule, tails: dict, nvars: int):
        self.pres = pres
        self.module = module
        self.p = module.p
        self.s = module.s
        self.nvars = nvars
        self.tails = tails
        self.mats = module.mats
        n = pres.n
        self.pow_items = [word_items(pres.powers[i]) for i in range(n)]
        self.conj_items = [[word_items(pres.conjugates[k][g]) for g in range(k)] for k in range(n)]

    def zero(self) -> np.ndarray:
        return np.zeros((self.nvars + 1, self.s), dtype=np.int64)

    def const(self, a) -> np.ndarray:
        z = self.zero()
        z[-1] = a
        return z

    def elem(self, g: PcElement, a=None):
        return (tuple(g), self.zero() if a is None else a)

    def gen(self, i: int, e: int = 1):
        return self.elem(self.pres.gen(i, e))

    def _collect(self, w: list, a: np.ndarray, stack: list):
        r = self.pres.rel_orders
        n = self.pres.n
        p = self.p
        while stack:
            item = stack.pop()
            if item[0] == "A":
                a = (a + item[1]) % p
                continue
            g, e = item
            if e > 1:
                stack.append((g, e - 1))
            a = a @ self.mats[g] % p
            pushes = []
            if w[g] + 1 < r[g]:
                w[g] += 1
            else:
                w[g] = 0
                pushes.extend(self.pow_items[g])
                t = self.tails.get((g, g))
                if t is not None:
                    pushes.append(("A", t))
            for k in range(g + 1, n):
                c = w[k]
                if c:
                    w[k] = 0
                    t = self.tails.get((k, g))
                    block = list(self.conj_items[k][g])
                    if t is not None:
                        block.append(("A", t))
                    pushes.extend(block * c)
            if pushes:
                if a.any():
                    pushes.append(("A", a))
                    a = self.zero()
                stack.extend(reversed(pushes))
        return w, a

    def multiply(self, x, y):
        stack = [("A", y[1])] if y[1].any() else []
        stack.extend(reversed(word_items(y[0])))
        w, a = self._collect(list(x[0]), x[1].copy(), stack)
        return tuple(w), a

    def inverse(self, x):
        ginv = self.pres.inverse(x[0])
        w, c = self.multiply(x, self.elem(ginv))
        assert not any(w)
        return ginv, (-c) % self.p

    def power(self, x, e: int):
        if e < 0:
            x, e = self.inverse(x), -e
        out = self.elem(self.pres.identity)
        for _ in range(e):
            out = self.multiply(out, x)
        return out

    def conjugate(self, x, y):
        return self.multiply(self.multiply(self.inverse(y), x), y)

    def relation_tails(self, lifts: Sequence) -> np.ndarray:
        """Tails of ``P``'s relations evaluated at elements ``lifts[i]`` standing
        for ``g_i``; returns an ``(l, K + 1, s)`` array."""
        pres = self.pres
        n = pres.n
        out = []
        for i1, j1 in pairs(n):
            i, j = i1 - 1, j1 - 1
            if i == j:
                lhs = self.power(lifts[i], pres.rel_orders[i])
                rel = pres.powers[i]
            else:
                lhs = self.conjugate(lifts[i], lifts[j])
                rel = pres.conjugates[i][j]
            word = self.elem(pres.identity)
            for k, e in word_items(rel):
                word = self.multiply(word, self.power(lifts[k], e))
            val = self.multiply(self.inverse(word), lhs)
            if any(val[0]):
                raise ValueError("relation (%d,%d) does not hold on the lifts" % (i1, j1))
            out.append(val[1])
        return np.array(out)


def symbolic_tails(n: int, s: int) -> tuple[dict, int]:
    """Tails ``t_{i,j}`` as independent unknowns; returns (tails, K = l*s)."""
    l = n * (n + 1) // 2
    nvars = l * s
    tails = {}
    for k, (i, j) in enumerate(pairs(n)):
        t = np.zeros((nvars + 1, s), dtype=np.int64)
        t[k * s : (k + 1) * s] = np.eye(s, dtype=np.int64)
        tails[(i - 1, j - 1)] = t
    return tails, nvars


def concrete_tails(t: TailVector) -> dict:
    out = {}
    for k, (i, j) in enumerate(pairs(t.n)):
        if t.entries[k].any():
            out[(i - 1, j - 1)] = t.entries[k].reshape(1, -1).copy()
    return out


def _check_inputs(pres: PcPresentation, module: GModule):
    if module.n != pres.n:
        raise ValueError("module is for %d generators, group has %d" % (module.n, pres.n))
    bad = check_consistency(pres)
    if bad:
        raise ValueError("inconsistent presentation: %s" % ", ".join(bad[:5]))
    bad = module.relator_failures(pres)
    if bad:
        raise ValueError("module action violates relators: %s" % ", ".join(bad[:5]))


def compute_Z(pres: PcPresentation, module: GModule, check: bool = True) -> Subspace:
    """Tail vectors ``t`` for which ``P(t)`` is consistent."""
    if check:
        _check_inputs(pres, module)
    n, s, p = pres.n, module.s, module.p
    l = n * (n + 1) // 2
    if s == 0 or n == 0:
        return Subspace.zero(p, l * s)
    tails, nvars = symbolic_tails(n, s)
    coll = ExtensionCollector(pres, module, tails, nvars)
    eqs = []
    for _, lhs, rhs in consistency_tests(n, pres.rel_orders):
        a = evaluate_test(lhs, coll.gen, coll.multiply)
        b = evaluate_test(rhs, coll.gen, coll.multiply)
        if a[0] != b[0]:
            raise ValueError("group part of a consistency test differs")
        d = (a[1] - b[1]) % p
        if d[-1].any():
            raise ValueError("split extension fails a consistency test")
        if d[:-1].any():
            eqs.append(d[:-1])
    if not eqs:
        return Subspace.full(p, nvars)
    return Subspace(linalg.kernel(np.concatenate(eqs, axis=1), p), p, nvars)


def coboundary_map(pres: PcPresentation, module: GModule) -> np.ndarray:
    """Matrix (n*s x l*s) sending lifts ``(g_i, eps_i)`` in the split
    extension to the tails of the relations they satisfy."""
    n, s, p = pres.n, module.s, module.p
    nvars = n * s
    if nvars == 0:
        return np.zeros((nvars, n * (n + 1) // 2 * s), dtype=np.int64)
    coll = ExtensionCollector(pres, module, {}, nvars)
    lifts = []
    for i in range(n):
        a = coll.zero()
        a[i * s : (i + 1) * s] = np.eye(s, dtype=np.int64)
        lifts.append(coll.elem(pres.gen(i), a))
    vals = coll.relation_tails(lifts)  # (l, nvars+1, s)
    if vals[:, -1].any():
        raise ValueError("split extension has non-zero constant tails")
    return vals[:, :-1, :].transpose(1, 0, 2).reshape(nvars, -1) % p


def compute_B(pres: PcPresentation, module: GModule) -> Subspace:
    mat = coboundary_map(pres, module)
    return Subspace(mat, module.p, mat.shape[1])


def compute_Z1(pres: PcPresentation, module: GModule) -> Subspace:
    """Assignments ``g_i -> eps_i`` extending to complements (1-cocycles)."""
    mat = coboundary_map(pres, module)
    return Subspace(linalg.kernel(mat, module.p), module.p, mat.shape[0])


@dataclass
class CocycleSpace:
    pres: PcPresentation
    module: GModule
    Z: Subspace
    B: Subspace
    Z1: Subspace

    @property
    def h2_dim(self) -> int:
        return self.Z.rank - self.B.rank

    @property
    def h2_order(self) -> int:
        return self.module.p**self.h2_dim

    @property
    def l(self) -> int:
        return self.pres.n * (self.pres.n + 1) // 2

    @property
    def quotient_basis(self) -> Subspace:
        """Echelon basis of ``{B-reduced t : t in Z}``, a complement of B in Z."""
        if not hasattr(self, "_qbasis"):
            self._qbasis = Subspace(self.Z.complement_basis(self.B), self.module.p, self.Z.dim)
        return self._qbasis

    @property
    def complement(self) -> np.ndarray:
        return self.quotient_basis.basis

    def canonical(self, t) -> np.ndarray:
        """Representative of ``t + B`` with zeros at B's pivot positions."""
        return self.B.reduce(np.asarray(t).reshape(-1))

    def label(self, t) -> tuple:
        """Coordinates of the class of ``t`` in Z/B w.r.t. :attr:`complement`."""
        return tuple(int(x) for x in self.quotient_basis.coordinates(self.canonical(t)))

    def from_label(self, label) -> np.ndarray:
        if not len(label):
            return np.zeros(self.Z.dim, dtype=np.int64)
        return np.array(label, dtype=np.int64) @ self.complement % self.module.p

    def tail(self, flat) -> TailVector:
        return TailVector.from_flat(flat, self.pres.n, self.module.s, self.module.p)


def cocycle_space(pres: PcPresentation, module: GModule) -> CocycleSpace:
    Z = compute_Z(pres, module)
    B = compute_B(pres, module)
    if not Z.contains_subspace(B):
        raise AssertionError("coboundary tails not contained in Z")
    return CocycleSpace(pres, module, Z, B, compute_Z1(pres, module))


def h2_transversal(space: CocycleSpace, cap: int = DEFAULT_COSET_CAP) -> Iterator[TailVector]:
    """One canonical representative per class of Z/B, zero first."""
    size = space.h2_order
    if size > cap:
        raise CapExceeded("|Z/B| = %d exceeds cap %d" % (size, cap))
    comp = space.complement
    p = space.module.p
    for coeffs in itertools.product(range(p), repeat=comp.shape[0]):
        flat = np.array(coeffs, dtype=np.int64) @ comp % p if comp.shape[0] else np.zeros(space.Z.dim, dtype=np.int64)
        yield space.tail(flat)


def extension_presentation(pres: PcPresentation, module: GModule, t: TailVector, check: bool = True) -> PcPresentation:
    """``P(t)`` on generators ``g_1..g_n, a_1..a_s``."""
    n, s, p = pres.n, module.s, module.p
    N = n + s
    rel = tuple(pres.rel_orders) + (p,) * s

    def ext(v, tail):
        return tuple(v) + tuple(int(x) for x in tail)

    powers = []
    for i in range(n):
        powers.append(ext(pres.powers[i], t[(i + 1, i + 1)]))
    powers.extend([(0,) * N] * s)
    conj = []
    for i in range(n):
        conj.append(tuple(ext(pres.conjugates[i][j], t[(i + 1, j + 1)]) for j in range(i)))
    for k in range(s):
        row = []
        for j in range(n):
            row.append((0,) * n + tuple(int(x) for x in module.mats[j][k]))
        for m in range(k):
            row.append(unit(N, n + k))
        conj.append(tuple(row))
    out = PcPresentation(rel, tuple(powers), tuple(conj))
    if check:
        bad = check_consistency(out)
        if bad:
            raise NotCocycle("tail vector is not in Z; failing overlaps: %s" % ", ".join(bad[:5]))
    return out


def layer_tails(ext: PcPresentation, n: int) -> TailVector:
    """Read ``t`` back from a presentation of the form ``P(t)`` with ``n`` group generators."""
    s = ext.n - n
    p = ext.rel_orders[n] if s else 2
    vals = {}
    for i, j in pairs(n):
        v = ext.powers[i - 1] if i == j else ext.conjugates[i - 1][j - 1]
        vals[(i, j)] = np.array(v[n:], dtype=np.int64)
    return TailVector.from_dict(vals, n, s, p)
