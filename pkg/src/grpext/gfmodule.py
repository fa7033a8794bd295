"""Elementary abelian G-modules GF(p)^s with a right action of pc generators."""

from __future__ import annotations

import functools
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import Subspace
from .pcgroup import PcElement, PcPresentation, Subgroup, quotient_by_tail


class ModuleError(ValueError):
    pass


def _freeze(mat) -> tuple:
    return tuple(tuple(int(x) for x in row) for row in np.asarray(mat))


@dataclass(frozen=True)
class GModule:
    """``A = GF(p)^s``; ``matrices[i]`` is the action of ``g_i`` on row vectors."""

    p: int
    s: int
    matrices: tuple

    def __post_init__(self):
        if not linalg.is_prime(self.p):
            raise ModuleError("p = %d is not prime" % self.p)
        for i, m in enumerate(self.matrices):
            if len(m) != self.s or any(len(row) != self.s for row in m):
                raise ModuleError("matrix for g%d is not %dx%d" % (i + 1, self.s, self.s))
            if self.s and linalg.rank(np.array(m), self.p) != self.s:
                raise ModuleError("matrix for g%d is singular" % (i + 1))

    @classmethod
    def from_arrays(cls, p: int, s: int, mats: Sequence) -> GModule:
        return cls(p, s, tuple(_freeze(np.asarray(m, dtype=np.int64) % p) for m in mats))

    @property
    def n(self) -> int:
        return len(self.matrices)

    @functools.cached_property
    def mats(self) -> list[np.ndarray]:
        return [np.array(m, dtype=np.int64).reshape(self.s, self.s) for m in self.matrices]

    def is_trivial(self) -> bool:
        eye = np.eye(self.s, dtype=np.int64)
        return all(np.array_equal(m, eye) for m in self.mats)

    def matrix_of(self, g: PcElement) -> np.ndarray:
        out = np.eye(self.s, dtype=np.int64)
        for k, e in enumerate(g):
            if e:
                out = out @ linalg.matrix_power(self.mats[k], e, self.p) % self.p
        return out

    def act(self, a, g: PcElement) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if a.shape[-1] != self.s:
            raise ModuleError("vector length %d != %d" % (a.shape[-1], self.s))
        return a @ self.matrix_of(g) % self.p

    def relator_failures(self, pres: PcPresentation) -> list[str]:
        """Relators of ``pres`` whose matrix image is not the identity."""
        if pres.n != self.n:
            return ["module has %d matrices, group %d generators" % (self.n, pres.n)]
        bad = []
        p = self.p
        for i in range(pres.n):
            lhs = linalg.matrix_power(self.mats[i], pres.rel_orders[i], p)
            if not np.array_equal(lhs, self.matrix_of(pres.powers[i])):
                bad.append("g%d^%d" % (i + 1, pres.rel_orders[i]))
            for j in range(i):
                lhs = linalg.inverse(self.mats[j], p) @ self.mats[i] @ self.mats[j] % p
                if not np.array_equal(lhs, self.matrix_of(pres.conjugates[i][j])):
                    bad.append("g%d^g%d" % (i + 1, j + 1))
        return bad


def trivial_module(p: int, s: int, n: int = 0) -> GModule:
    """Trivial module of dimension ``s`` for a group on ``n`` pc generators."""
    if not linalg.is_prime(p):
        raise ModuleError("p = %d is not prime" % p)
    eye = _freeze(np.eye(s, dtype=np.int64))
    return GModule(p, s, (eye,) * n)


def commutator_submodule(m: GModule, h: Subgroup) -> Subspace:
    """``[A, H]``: span of ``a (M(h) - 1)`` closed under the action of H."""
    mats = [m.matrix_of(x) for x in h.gens]
    eye = np.eye(m.s, dtype=np.int64)
    rows = [(mat - eye) % m.p for mat in mats]
    u = Subspace(np.concatenate(rows) if rows else np.zeros((0, m.s), dtype=np.int64), m.p, m.s)
    while True:
        grown = u + Subspace(
            np.concatenate([u.basis @ mat % m.p for mat in mats]) if mats and u.rank else u.basis,
            m.p,
            m.s,
        )
        if grown.rank == u.rank:
            return u
        u = grown


@dataclass(frozen=True)
class Projection:
    """Linear map ``A -> A/U`` onto the coordinates at non-pivot positions of U."""

    matrix: np.ndarray  # s x (s - dim U)
    sub: Subspace

    def __call__(self, a) -> np.ndarray:
        return np.asarray(a, dtype=np.int64) @ self.matrix % self.sub.p

    @property
    def target_dim(self) -> int:
        return self.matrix.shape[1]


def projection(u: Subspace) -> Projection:
    keep = [c for c in range(u.dim) if c not in set(u.pivots)]
    mat = np.zeros((u.dim, len(keep)), dtype=np.int64)
    for i in range(u.dim):
        e = np.zeros(u.dim, dtype=np.int64)
        e[i] = 1
        mat[i] = u.reduce(e)[keep]
    return Projection(mat, u)


def quotient_module(m: GModule, u: Subspace) -> tuple[GModule, Projection]:
    if not u.is_invariant(m.mats):
        raise ModuleError("subspace is not invariant under the action")
    proj = projection(u)
    keep = [c for c in range(m.s) if c not in set(u.pivots)]
    mats = []
    for mat in m.mats:
        q = np.zeros((len(keep), len(keep)), dtype=np.int64)
        for r, c in enumerate(keep):
            q[r] = proj(mat[c])
        mats.append(q)
    return GModule.from_arrays(m.p, len(keep), mats), proj


def minimal_generator_number(m: GModule) -> int:
    return m.s


def maximal_subspaces(m: GModule) -> Iterator[Subspace]:
    return linalg.hyperplanes(m.s, m.p)


def module_from_layer(pres: PcPresentation, start: int, stop: int) -> tuple[PcPresentation, GModule]:
    """Split off an elementary abelian layer ``<g_start..> / <g_stop..>``.

    Returns ``G = pres / <g_start..>`` and the conjugation module on the layer
    (0-based bounds).  Both tails must be normal subgroups.
    """
    ps = set(pres.rel_orders[start:stop])
    if len(ps) != 1:
        raise ModuleError("layer is not a p-group of exponent p")
    p = ps.pop()
    s = stop - start
    for k in range(start, stop):
        if any(pres.powers[k][start:stop]):
            raise ModuleError("layer is not elementary abelian")
        for j in range(start, k):
            if pres.conjugates[k][j][start:stop] != tuple(int(x == k) for x in range(start, stop)):
                raise ModuleError("layer is not abelian modulo the next term")
    mats = []
    for j in range(start):
        mats.append([pres.conjugates[k][j][start:stop] for k in range(start, stop)])
    return quotient_by_tail(pres, start), GModule.from_arrays(p, s, mats)
