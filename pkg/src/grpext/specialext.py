"""Lower central series and derived series extensions.

An extension E of A by G is a lower central series extension if E is
nilpotent and A is the last non-trivial term of its lower central series;
it is a derived series extension if A is the last non-trivial term of the
derived series.  Both are decided on tails: the entries of t at a set of
index pairs I (after projecting to A/[A, gamma(G)] in the derived case)
must span the target.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from . import linalg
from .cocycles import (
    CapExceeded,
    CocycleSpace,
    TailVector,
    cocycle_space,
    extension_presentation,
    pair_index,
)
from .compat import apply_hom, comp_group, orbits, stabilizer_order
from .gfmodule import GModule, Projection, commutator_submodule, projection
from .linalg import Subspace
from .pcgroup import (
    NotNilpotentError,
    NotRefinedError,
    PcPresentation,
    Refinement,
    derived_series,
    gamma_smallest,
    lower_central_series,
    refine_presentation,
    series_indices,
)

SUBSPACE_CAP = 10**5


class PreconditionError(ValueError):
    pass


@dataclass
class ProjectionSpec:
    kind: str
    I: list  # 1-based pairs (i, j)
    d: int
    m: int
    s: int
    p: int
    quotient: Projection | None = None

    @property
    def h(self) -> int:
        return len(self.I)

    @property
    def target_dim(self) -> int:
        return self.s if self.quotient is None else self.quotient.target_dim

    def matrix(self, n: int) -> np.ndarray:
        """Linear map from flat tails (length l*s) to the projected tuple
        (length h*target_dim)."""
        idx = pair_index(n)
        s, td = self.s, self.target_dim
        out = np.zeros((len(idx) * s, self.h * td), dtype=np.int64)
        q = np.eye(s, dtype=np.int64) if self.quotient is None else self.quotient.matrix
        for k, ij in enumerate(self.I):
            r = idx[ij]
            out[r * s : (r + 1) * s, k * td : (k + 1) * td] = q
        return out


def lcs_projection(pres: PcPresentation, module: GModule) -> ProjectionSpec:
    if pres.n == 0:
        raise PreconditionError("G is trivial")
    if not module.is_trivial():
        raise PreconditionError("module is not trivial")
    try:
        d, m = series_indices(pres, "lcs")
    except NotNilpotentError:
        raise PreconditionError("not nilpotent") from None
    n = pres.n
    I = [(i, j) for i in range(m, n + 1) for j in range(1, d + 1) if j < i]
    return ProjectionSpec("lcs", I, d, m, module.s, module.p)


def der_projection(pres: PcPresentation, module: GModule) -> ProjectionSpec:
    if pres.n == 0:
        raise PreconditionError("G is trivial")
    d, m = series_indices(pres, "derived")
    n = pres.n
    U = commutator_submodule(module, gamma_smallest(pres))
    I = [(i, j) for j in range(m, n + 1) for i in range(j + 1, n + 1)]
    I.sort()
    return ProjectionSpec("derived", I, d, m, module.s, module.p, projection(U))


def project(spec: ProjectionSpec, t: TailVector) -> np.ndarray:
    rows = np.array([t[ij] for ij in spec.I], dtype=np.int64).reshape(spec.h, spec.s)
    if spec.quotient is not None:
        rows = spec.quotient(rows)
    return rows % spec.p


def is_full(spec: ProjectionSpec, t: TailVector) -> bool:
    if spec.target_dim == 0:
        return True
    rows = project(spec, t)
    return rows.size > 0 and linalg.rank(rows, spec.p) == spec.target_dim


def full_mask(spec: ProjectionSpec, flats: np.ndarray, n: int) -> np.ndarray:
    """Fullness of many flat tail vectors at once."""
    P = spec.matrix(n)
    proj = flats @ P % spec.p
    td = spec.target_dim
    if td == 0:
        return np.ones(len(flats), dtype=bool)
    blocks = proj.reshape(len(flats), spec.h, td)
    return np.array([spec.h > 0 and linalg.rank(b, spec.p) == td for b in blocks], dtype=bool)


def _projected_blocks(spec: ProjectionSpec, Z: Subspace, n: int) -> np.ndarray:
    """All blocks (vectors in the target) of the projected basis of Z."""
    if Z.rank == 0 or spec.h == 0:
        return np.zeros((0, spec.target_dim), dtype=np.int64)
    img = Z.basis @ spec.matrix(n) % spec.p
    return img.reshape(-1, spec.target_dim)


def quick_reject(spec: ProjectionSpec, Z: Subspace, n: int) -> str | None:
    """A reason why no full tuple can exist, or None (which proves nothing).

    The projected image of Z lies in M^h for a maximal subspace M exactly
    when the blocks of its basis fail to span the target.
    """
    td = spec.target_dim
    if td == 0:
        return None
    if spec.h < td:
        return "h < d(A): %d index pairs for a target of dimension %d" % (spec.h, td)
    blocks = _projected_blocks(spec, Z, n)
    if blocks.shape[0] == 0 or linalg.rank(blocks, spec.p) < td:
        return "projection of Z lies in M^h for a maximal subspace M"
    return None


def _count_inside(spec: ProjectionSpec, Z: Subspace, n: int, W: Subspace) -> int:
    """``|{t in Z : every projected entry lies in W}|``."""
    p, td = spec.p, spec.target_dim
    if Z.rank == 0:
        return 1
    normals = linalg.kernel(W.basis.T, p) if W.rank else np.eye(td, dtype=np.int64)
    if normals.shape[0] == 0:
        return p**Z.rank
    img = (Z.basis @ spec.matrix(n) % p).reshape(Z.rank, spec.h, td)
    cons = np.einsum("zhd,kd->zhk", img, normals).reshape(Z.rank, -1) % p
    return p ** (Z.rank - linalg.rank(cons, p))


def count_delta(spec: ProjectionSpec, Z: Subspace, n: int, symmetric: bool = False, cap: int = SUBSPACE_CAP) -> int:
    """``|{t in Z : projected tuple full}|`` by inclusion-exclusion.

    The subsets of maximal subspaces are grouped by their intersection W;
    the signed number of subsets meeting in W is the Moebius value
    ``(-1)^k p^(k(k-1)/2)``, k = codim W.  With ``symmetric`` the count of
    t inside W^h is assumed to depend only on dim W (true when Z is stable
    under GL of the target, e.g. for a trivial module) and one W per
    dimension is solved.
    """
    p, td = spec.p, spec.target_dim
    if td == 0:
        return Z.size
    total = 0
    if symmetric:
        for k in range(td + 1):
            W = Subspace(np.eye(td, dtype=np.int64)[: td - k], p, td)
            num = linalg.gaussian_binomial(td, k, p)
            mu = (-1) ** k * p ** (k * (k - 1) // 2)
            total += mu * num * _count_inside(spec, Z, n, W)
        return total
    n_subspaces = sum(linalg.gaussian_binomial(td, k, p) for k in range(td + 1))
    if n_subspaces > cap:
        raise CapExceeded("%d subspaces exceed cap %d" % (n_subspaces, cap))
    for W in linalg.subspaces(td, p):
        k = td - W.rank
        mu = (-1) ** k * p ** (k * (k - 1) // 2)
        total += mu * _count_inside(spec, Z, n, W)
    return total


def brute_count(spec: ProjectionSpec, Z: Subspace, n: int) -> int:
    if Z.rank == 0:
        return int(full_mask(spec, np.zeros((1, Z.dim), dtype=np.int64), n)[0])
    coeffs = np.array(list(itertools.product(range(spec.p), repeat=Z.rank)), dtype=np.int64)
    flats = coeffs @ Z.basis % spec.p
    return int(full_mask(spec, flats, n).sum())


# -- classification ------------------------------------------------------------------


@dataclass
class Extension:
    presentation: PcPresentation
    tail: TailVector
    label: tuple
    orbit_size: int
    stabilizer_order: int
    aut_order: int


@dataclass
class Classification:
    kind: str
    pres: PcPresentation
    module: GModule
    spec: ProjectionSpec
    space: CocycleSpace
    comp_order: int
    orbit_sizes: list
    extensions: list
    refinement: Refinement | None = None
    reject: str | None = None

    @property
    def count(self) -> int:
        return len(self.extensions)


def transport(ref: Refinement, module: GModule, aut_gens: Sequence) -> tuple[GModule, list]:
    """Module and automorphisms in the refined generators."""
    old = ref.old
    mats = [module.matrix_of(x) for x in ref.images]
    mod = GModule.from_arrays(module.p, module.s, mats)
    auts = []
    for a in aut_gens:
        auts.append(tuple(ref.to_new(apply_hom(old, a, x)) for x in ref.images))
    return mod, auts


def _needs_refinement(pres: PcPresentation, kind: str) -> bool:
    try:
        series_indices(pres, "lcs" if kind == "lcs" else "derived")
    except NotRefinedError:
        return True
    return False


def classify(
    pres: PcPresentation,
    module: GModule,
    aut_gens: Sequence,
    aut_order: int,
    kind: str,
    comp: tuple | None = None,
    cap: int = 10**7,
) -> Classification:
    """Isomorphism types of lower central series (``kind='lcs'``) or derived
    series (``kind='derived'``) extensions of ``module`` by ``pres``.

    If the pcgs does not pass through the required series it is refined
    first and everything is reported in the refined generators.
    """
    if kind not in ("lcs", "derived"):
        raise ValueError("kind must be 'lcs' or 'derived'")
    if kind == "lcs" and not lower_central_series(pres)[-1].is_trivial():
        raise PreconditionError("not nilpotent")
    ref = None
    if pres.n and _needs_refinement(pres, kind):
        series = lower_central_series(pres) if kind == "lcs" else derived_series(pres)
        new, ref = refine_presentation(pres, series)
        if comp is not None:
            raise PreconditionError("user-supplied compatible pairs need a presentation refining the series")
        module, aut_gens = transport(ref, module, aut_gens)
        pres = new
    spec = lcs_projection(pres, module) if kind == "lcs" else der_projection(pres, module)
    space = cocycle_space(pres, module)
    reason = quick_reject(spec, space.Z, pres.n)
    cg = comp_group(pres, module, aut_gens, aut_order, user=comp)
    result = Classification(kind, pres, module, spec, space, cg.order, [], [], ref, reason)
    if reason is not None:
        return result
    orbs = orbits(space, cg.generators, cap=cap)
    result.orbit_sizes = [o.size for o in orbs]
    z1 = space.Z1.size
    for o in orbs:
        if not is_full(spec, o.tail):
            continue
        stab = stabilizer_order(cg.order, o.size)
        result.extensions.append(
            Extension(extension_presentation(pres, module, o.tail), o.tail, o.label, o.size, stab, z1 * stab)
        )
    return result


def defining_property_holds(ext: PcPresentation, n: int, kind: str) -> bool:
    """A = <g_{n+1}..> is exactly the last non-trivial lower central
    (resp. derived) term of ``ext``."""
    series = lower_central_series(ext) if kind == "lcs" else derived_series(ext)
    if not series[-1].is_trivial() or len(series) < 2:
        return False
    last = series[-2]
    return last.tail_index() == n and last.order() * _order_prefix(ext, n) == ext.order()


def _order_prefix(pres: PcPresentation, n: int) -> int:
    out = 1
    for r in pres.rel_orders[:n]:
        out *= r
    return out
