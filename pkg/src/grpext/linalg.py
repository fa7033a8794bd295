"""Linear algebra over prime fields GF(p).

Vectors are rows; matrices act on the right.  Everything is stored as
``numpy`` int64 arrays reduced into ``[0, p)``.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator, Sequence

import numpy as np


def as_array(rows, p: int, ncols: int | None = None) -> np.ndarray:
    a = np.array(rows, dtype=np.int64)
    if a.size == 0:
        return np.zeros((0, ncols if ncols is not None else 0), dtype=np.int64)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    return a % p


def inv_mod(x: int, p: int) -> int:
    x %= p
    if x == 0:
        raise ZeroDivisionError("0 has no inverse mod %d" % p)
    return pow(x, p - 2, p)


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % q for q in range(2, int(p**0.5) + 1))


def _matmul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    # float64 products are exact while the dot products stay below 2**53
    if a.shape[1] * (p - 1) ** 2 < 2**52:
        return np.rint(a.astype(np.float64) @ b.astype(np.float64)).astype(np.int64) % p
    return a @ b % p


def rref(mat: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    a = np.array(mat, dtype=np.int64) % p
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.shape[0] > 2 * a.shape[1] + 64:
        return _rref_tall(a, p)
    return _rref_dense(a, p)


def _rref_tall(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Row-reduce in chunks: each chunk is first cleared against the current
    basis by one matrix product, so only the new pivots need elimination."""
    ncols = a.shape[1]
    basis = np.zeros((0, ncols), dtype=np.int64)
    piv: list[int] = []
    step = max(ncols, 64)
    for start in range(0, a.shape[0], step):
        chunk = a[start : start + step]
        if piv:
            chunk = (chunk - _matmul(chunk[:, piv], basis, p)) % p
        chunk = chunk[chunk.any(axis=1)]
        if not chunk.shape[0]:
            continue
        new, newpiv = _rref_dense(chunk, p)
        if basis.shape[0]:
            basis = (basis - _matmul(basis[:, newpiv], new, p)) % p
        basis = np.concatenate([basis, new])
        piv = piv + newpiv
        order = np.argsort(piv)
        basis = basis[order]
        piv = [piv[k] for k in order]
        if len(piv) == ncols:
            break
    return basis, piv


def _rref_dense(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    nrows, ncols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            a[[r, k]] = a[[k, r]]
        a[r] = (a[r] * inv_mod(int(a[r, c]), p)) % p
        col = a[:, c].copy()
        col[r] = 0
        rows = np.nonzero(col)[0]
        if rows.size:
            a[rows] = (a[rows] - np.outer(col[rows], a[r])) % p
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rank(mat: np.ndarray, p: int) -> int:
    if np.size(mat) == 0:
        return 0
    return len(rref(mat, p)[1])


def kernel(mat: np.ndarray, p: int) -> np.ndarray:
    """Basis (as rows) of the left kernel ``{x : x @ mat == 0}``."""
    mat = np.asarray(mat, dtype=np.int64)
    m = mat.shape[0]
    if m == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if mat.shape[1] == 0:
        return np.eye(m, dtype=np.int64)
    # x @ mat = 0  <=>  mat.T @ x.T = 0
    r, piv = rref(mat.T, p)
    free = [c for c in range(m) if c not in set(piv)]
    basis = np.zeros((len(free), m), dtype=np.int64)
    for b, f in enumerate(free):
        basis[b, f] = 1
        for row, pc in enumerate(piv):
            basis[b, pc] = (-r[row, f]) % p
    return basis


def inverse(mat: np.ndarray, p: int) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.int64) % p
    s = mat.shape[0]
    aug = np.concatenate([mat, np.eye(s, dtype=np.int64)], axis=1)
    r, piv = rref(aug, p)
    if piv != list(range(s)):
        raise ValueError("matrix is singular mod %d" % p)
    return r[:, s:]


def solve_affine(lhs: np.ndarray, rhs: np.ndarray, p: int) -> tuple[np.ndarray | None, np.ndarray]:
    """Solve ``x @ lhs == rhs``; returns (particular solution or None, kernel basis)."""
    lhs = np.asarray(lhs, dtype=np.int64) % p
    rhs = np.asarray(rhs, dtype=np.int64).reshape(1, -1) % p
    m = lhs.shape[0]
    ext = np.concatenate([lhs, rhs], axis=0)
    ker = kernel(ext, p)
    # solutions of x @ lhs = rhs correspond to kernel vectors with last coordinate -1
    part = None
    for v in ker:
        if v[m] != 0:
            part = (v[:m] * (-inv_mod(int(v[m]), p))) % p
            break
    return part, kernel(lhs, p)


def matrix_power(mat: np.ndarray, e: int, p: int) -> np.ndarray:
    result = np.eye(mat.shape[0], dtype=np.int64)
    base = np.asarray(mat, dtype=np.int64) % p
    while e:
        if e & 1:
            result = result @ base % p
        base = base @ base % p
        e >>= 1
    return result


def gl_order(s: int, p: int) -> int:
    order = 1
    for i in range(s):
        order *= p**s - p**i
    return order


def primitive_root(p: int) -> int:
    if p == 2:
        return 1
    phi = p - 1
    factors = [q for q in range(2, phi + 1) if phi % q == 0 and is_prime(q)]
    for g in range(2, p):
        if all(pow(g, phi // q, p) != 1 for q in factors):
            return g
    raise ValueError(p)


def gl_generators(s: int, p: int) -> list[np.ndarray]:
    """A generating set of GL(s, p): transvections plus one diagonal matrix."""
    gens = []
    if p > 2 or s == 1:
        d = np.eye(s, dtype=np.int64)
        d[0, 0] = primitive_root(p)
        if p > 2:
            gens.append(d)
    for i in range(s):
        for j in range(s):
            if i != j:
                e = np.eye(s, dtype=np.int64)
                e[i, j] = 1
                gens.append(e)
    if not gens:
        gens.append(np.eye(s, dtype=np.int64))
    return gens


def all_vectors(dim: int, p: int) -> Iterator[tuple[int, ...]]:
    return itertools.product(range(p), repeat=dim)


def gaussian_binomial(n: int, k: int, p: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= p ** (n - i) - 1
        den *= p ** (i + 1) - 1
    return num // den


class Subspace:
    """A subspace of GF(p)^dim held as a reduced echelon basis."""

    __slots__ = ("basis", "dim", "p", "pivots")

    def __init__(self, rows, p: int, dim: int):
        self.p = p
        self.dim = dim
        a = as_array(rows, p, dim) if not isinstance(rows, np.ndarray) else rows % p
        a = np.zeros((0, dim), dtype=np.int64) if a.size == 0 else a.reshape(-1, dim)
        if a.shape[0]:
            self.basis, self.pivots = rref(a, p)
        else:
            self.basis, self.pivots = a, []

    @classmethod
    def zero(cls, p: int, dim: int) -> Subspace:
        return cls(np.zeros((0, dim), dtype=np.int64), p, dim)

    @classmethod
    def full(cls, p: int, dim: int) -> Subspace:
        return cls(np.eye(dim, dtype=np.int64), p, dim)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def size(self) -> int:
        return self.p**self.rank

    def reduce(self, v) -> np.ndarray:
        """Canonical representative of ``v`` modulo this subspace."""
        v = np.array(v, dtype=np.int64) % self.p
        if not self.pivots:
            return v
        # basis rows vanish at each other's pivots, so one product clears all
        return (v - v[..., self.pivots] @ self.basis) % self.p

    def __contains__(self, v) -> bool:
        return not self.reduce(v).any()

    def contains_subspace(self, other: Subspace) -> bool:
        return all(v in self for v in other.basis)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subspace)
            and self.p == other.p
            and self.dim == other.dim
            and self.pivots == other.pivots
            and np.array_equal(self.basis, other.basis)
        )

    def __hash__(self):
        return hash((self.p, self.dim, self.basis.tobytes()))

    def __repr__(self):
        return "Subspace(p=%d, dim=%d, rank=%d)" % (self.p, self.dim, self.rank)

    def __add__(self, other: Subspace) -> Subspace:
        return Subspace(np.concatenate([self.basis, other.basis]), self.p, self.dim)

    def intersect(self, other: Subspace) -> Subspace:
        if self.rank == 0 or other.rank == 0:
            return Subspace.zero(self.p, self.dim)
        # x @ self.basis == y @ other.basis
        stacked = np.concatenate([self.basis, (-other.basis) % self.p])
        ker = kernel(stacked, self.p)
        if ker.shape[0] == 0:
            return Subspace.zero(self.p, self.dim)
        return Subspace(ker[:, : self.rank] @ self.basis % self.p, self.p, self.dim)

    def complement_basis(self, sub: Subspace) -> np.ndarray:
        """Rows spanning a complement of ``sub`` inside ``self``, reduced mod ``sub``."""
        reduced = [sub.reduce(v) for v in self.basis]
        reduced = [v for v in reduced if v.any()]
        if not reduced:
            return np.zeros((0, self.dim), dtype=np.int64)
        r, _ = rref(np.array(reduced), self.p)
        return np.array([sub.reduce(v) for v in r], dtype=np.int64).reshape(-1, self.dim)

    def coordinates(self, v) -> np.ndarray:
        """Coefficients of ``v`` in the echelon basis (``v`` must lie in the space)."""
        v = np.array(v, dtype=np.int64) % self.p
        coeffs = v[self.pivots] if self.pivots else np.zeros(0, dtype=np.int64)
        if not np.array_equal(coeffs @ self.basis % self.p, v):
            raise ValueError("vector not in subspace")
        return coeffs

    def elements(self) -> Iterator[np.ndarray]:
        for c in all_vectors(self.rank, self.p):
            yield np.array(c, dtype=np.int64) @ self.basis % self.p if self.rank else np.zeros(
                self.dim, dtype=np.int64
            )

    def image(self, mat: np.ndarray) -> Subspace:
        mat = np.asarray(mat, dtype=np.int64)
        return Subspace(self.basis @ mat % self.p, self.p, mat.shape[1])

    def is_invariant(self, mats: Sequence[np.ndarray]) -> bool:
        return all(self.contains_subspace(self.image(m)) for m in mats)


def hyperplanes(dim: int, p: int) -> Iterator[Subspace]:
    """All maximal subspaces of GF(p)^dim, one per normal vector up to scalars."""
    for normal in all_vectors(dim, p):
        normal = np.array(normal, dtype=np.int64)
        nz = np.nonzero(normal)[0]
        if nz.size == 0 or normal[nz[0]] != 1:
            continue
        yield Subspace(kernel(normal.reshape(-1, 1), p), p, dim)


def subspaces(dim: int, p: int) -> Iterator[Subspace]:
    """Every subspace of GF(p)^dim exactly once (via RREF shapes)."""
    for k in range(dim + 1):
        for piv in itertools.combinations(range(dim), k):
            free = [(r, c) for r in range(k) for c in range(piv[r] + 1, dim) if c not in piv]
            for vals in itertools.product(range(p), repeat=len(free)):
                m = np.zeros((k, dim), dtype=np.int64)
                for r, c in enumerate(piv):
                    m[r, c] = 1
                for (r, c), v in zip(free, vals):
                    m[r, c] = v
                yield Subspace(m, p, dim)
