"""Compatible pairs and their action on Z/B.

Automorphisms of G are stored as images of the pc generators.  A pair
``(eta, nu)`` acts on the right: ``delta^(eta,nu)(g, h) =
delta(g^{eta^-1}, h^{eta^-1})^nu``, so ``(delta^c1)^c2 = delta^(c1 c2)``
where ``c1 c2 = (eta1 eta2, nu1 nu2)`` and ``g^(eta1 eta2) =
(g^eta1)^eta2``.

On tails the action is linear; it is computed once per pair as a matrix by
evaluating the relation words at the lifts ``(g_i^{eta^-1}, 0)`` inside
the extension with symbolic tails.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .cocycles import (
    CapExceeded,
    CocycleSpace,
    ExtensionCollector,
    TailVector,
    symbolic_tails,
)
from .gfmodule import GModule
from .pcgroup import PcElement, PcPresentation, depth, subgroup, word_items

ENUMERATION_CAP = 200_000


class AutomorphismError(ValueError):
    pass


# -- automorphisms of G -----------------------------------------------------------


def apply_hom(pres: PcPresentation, images: Sequence[PcElement], x: PcElement) -> PcElement:
    out = pres.identity
    for k, e in word_items(x):
        out = pres.multiply(out, pres.power(images[k], e))
    return out


def check_automorphism(pres: PcPresentation, images: Sequence[PcElement]) -> None:
    """Raise unless ``g_i -> images[i]`` defines an automorphism."""
    if len(images) != pres.n:
        raise AutomorphismError("expected %d images, got %d" % (pres.n, len(images)))
    images = [tuple(x) for x in images]
    for i in range(pres.n):
        lhs = pres.power(images[i], pres.rel_orders[i])
        if lhs != apply_hom(pres, images, pres.powers[i]):
            raise AutomorphismError("power relation of g%d is not preserved" % (i + 1))
        for j in range(i):
            lhs = pres.conjugate(images[i], images[j])
            if lhs != apply_hom(pres, images, pres.conjugates[i][j]):
                raise AutomorphismError("relation g%d^g%d is not preserved" % (i + 1, j + 1))
    if subgroup(pres, images).order() != pres.order():
        raise AutomorphismError("images do not generate the group")


def invert_automorphism(pres: PcPresentation, images: Sequence[PcElement]) -> tuple:
    """Images of the generators under ``eta^-1``.

    Builds an echelon of pairs ``(x^eta, x)`` sifted on the first entry, one
    per depth, then writes each ``g_i`` through it.
    """
    rel = pres.rel_orders
    table: dict[int, tuple] = {}

    def normalise(pair):
        y, x = pair
        d = depth(y)
        e = linalg.inv_mod(y[d], rel[d])
        return pres.power(y, e), pres.power(x, e)

    def sift(pair):
        y, x = pair
        while any(y):
            d = depth(y)
            if d not in table:
                return d, (y, x)
            ty, tx = table[d]
            e = y[d]
            inv = (pres.inverse(pres.power(ty, e)), pres.inverse(pres.power(tx, e)))
            y, x = pres.multiply(inv[0], y), pres.multiply(inv[1], x)
        return None, None

    queue = [(tuple(images[i]), pres.gen(i)) for i in range(pres.n)]
    while queue:
        d, pair = sift(queue.pop())
        if d is None:
            continue
        table[d] = normalise(pair)
        y, x = table[d]
        queue.append((pres.power(y, rel[d]), pres.power(x, rel[d])))
        for ty, tx in list(table.values()):
            queue.append((pres.commutator(y, ty), pres.commutator(x, tx)))
    if len(table) != pres.n:
        raise AutomorphismError("map is not surjective")
    out = []
    for i in range(pres.n):
        y, pre = pres.gen(i), pres.identity
        while any(y):
            d = depth(y)
            ty, tx = table[d]
            e = y[d]
            y = pres.multiply(pres.inverse(pres.power(ty, e)), y)
            pre = pres.multiply(pre, pres.power(tx, e))
        out.append(pre)
    return tuple(out)


def compose(pres: PcPresentation, a: Sequence[PcElement], b: Sequence[PcElement]) -> tuple:
    """``g -> (g^a)^b``."""
    return tuple(apply_hom(pres, b, x) for x in a)


# -- compatible pairs ----------------------------------------------------------


@dataclass(frozen=True)
class CompatiblePair:
    eta: tuple
    nu: tuple
    eta_inv: tuple = field(compare=False, default=())

    @property
    def nu_matrix(self) -> np.ndarray:
        return np.array(self.nu, dtype=np.int64).reshape(len(self.nu), -1)

    def key(self) -> tuple:
        return (self.eta, self.nu)


def make_pair(pres: PcPresentation, module: GModule, eta, nu, check: bool = True) -> CompatiblePair:
    eta = tuple(tuple(int(v) for v in x) for x in eta)
    nu = np.asarray(nu, dtype=np.int64).reshape(module.s, module.s) % module.p
    if check:
        check_automorphism(pres, eta)
        if not is_compatible(pres, module, eta, nu):
            raise AutomorphismError("pair is not compatible with the module action")
    nu_t = tuple(tuple(int(v) for v in row) for row in nu)
    return CompatiblePair(eta, nu_t, invert_automorphism(pres, eta))


def is_compatible(pres: PcPresentation, module: GModule, eta, nu) -> bool:
    """``M(g_i^eta) = nu^-1 M(g_i) nu`` for every generator."""
    p = module.p
    nu = np.asarray(nu, dtype=np.int64) % p
    if module.s and linalg.rank(nu, p) != module.s:
        return False
    for i in range(pres.n):
        if not np.array_equal(nu @ module.matrix_of(eta[i]) % p, module.mats[i] @ nu % p):
            return False
    return True


def compose_pairs(pres: PcPresentation, c1: CompatiblePair, c2: CompatiblePair, p: int) -> CompatiblePair:
    eta = compose(pres, c1.eta, c2.eta)
    eta_inv = compose(pres, c2.eta_inv, c1.eta_inv)
    nu = c1.nu_matrix @ c2.nu_matrix % p
    return CompatiblePair(eta, tuple(tuple(int(v) for v in r) for r in nu), eta_inv)


def identity_pair(pres: PcPresentation, module: GModule) -> CompatiblePair:
    ident = tuple(pres.gen(i) for i in range(pres.n))
    eye = tuple(tuple(int(i == j) for j in range(module.s)) for i in range(module.s))
    return CompatiblePair(ident, eye, ident)


@dataclass
class CompGroup:
    generators: list
    order: int


def _closure(pres, module, gens, cap, key=lambda c: c.key()):
    ident = identity_pair(pres, module)
    seen = {key(ident): ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for c in frontier:
            for g in gens:
                d = compose_pairs(pres, c, g, module.p)
                k = key(d)
                if k not in seen:
                    seen[k] = d
                    nxt.append(d)
                    if len(seen) > cap:
                        raise CapExceeded("group enumeration exceeds cap %d" % cap)
        frontier = nxt
    return list(seen.values())


def aut_elements(pres: PcPresentation, aut_gens: Sequence, cap: int = ENUMERATION_CAP) -> list[tuple]:
    ident = tuple(pres.gen(i) for i in range(pres.n))
    seen = {ident}
    out = [ident]
    frontier = [ident]
    gens = [tuple(tuple(x) for x in a) for a in aut_gens]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = compose(pres, a, g)
                if b not in seen:
                    seen.add(b)
                    out.append(b)
                    nxt.append(b)
                    if len(out) > cap:
                        raise CapExceeded("Aut(G) enumeration exceeds cap %d" % cap)
        frontier = nxt
    return out


def _intertwiners(module: GModule, targets: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Invertible ``nu`` with ``nu T_i = M_i nu`` for all i."""
    s, p = module.s, module.p
    if s == 0:
        return [np.zeros((0, 0), dtype=np.int64)]
    # unknown nu as vector of length s*s (row-major); equations linear in nu
    cols = []
    eye = np.eye(s, dtype=np.int64)
    for m, t in zip(module.mats, targets):
        # nu t - m nu = 0  ->  (I kron t^T - m kron I) vec(nu)
        op = np.kron(eye, t.T) - np.kron(m, eye)
        cols.append(op.T)
    sol = linalg.kernel(np.concatenate(cols, axis=1) % p, p) if cols else np.eye(s * s, dtype=np.int64)
    out = []
    for coeffs in itertools.product(range(p), repeat=sol.shape[0]):
        nu = (np.array(coeffs, dtype=np.int64) @ sol % p).reshape(s, s) if sol.shape[0] else np.zeros((s, s), dtype=np.int64)
        if linalg.rank(nu, p) == s:
            out.append(nu)
    return out


def comp_group(
    pres: PcPresentation,
    module: GModule,
    aut_gens: Sequence,
    aut_order: int,
    user: tuple | None = None,
    cap: int = ENUMERATION_CAP,
    check: bool = True,
) -> CompGroup:
    """Generators and order of Comp(G, A).

    Trivial module: Aut(G) x GL(s, p).  Otherwise Aut(G) is enumerated and
    for each automorphism the compatible ``nu`` are solved for linearly.
    ``user`` = ``(pairs, order)`` bypasses the search; the pairs are checked.
    """
    if check:
        for a in aut_gens:
            check_automorphism(pres, a)
    if user is not None:
        pairs, order = user
        gens = [make_pair(pres, module, eta, nu, check=check) for eta, nu in pairs]
        return CompGroup(gens, int(order))
    gl = linalg.gl_generators(module.s, module.p) if module.s else []
    ident = tuple(pres.gen(i) for i in range(pres.n))
    if module.is_trivial():
        eye = np.eye(module.s, dtype=np.int64)
        gens = [make_pair(pres, module, a, eye, check=False) for a in aut_gens]
        gens += [make_pair(pres, module, ident, m, check=False) for m in gl]
        return CompGroup(gens, int(aut_order) * linalg.gl_order(module.s, module.p))
    auts = aut_elements(pres, aut_gens, cap)
    if len(auts) != aut_order:
        raise AutomorphismError("generators give %d automorphisms, expected %d" % (len(auts), aut_order))
    elements = []
    for a in auts:
        targets = [module.matrix_of(a[i]) for i in range(pres.n)]
        for nu in _intertwiners(module, targets):
            elements.append((a, nu))
            if len(elements) > cap:
                raise CapExceeded("Comp(G, A) exceeds cap %d" % cap)
    order = len(elements)
    # greedy generating set
    gens: list[CompatiblePair] = []
    group: set = {identity_pair(pres, module).key()}
    for a, nu in elements:
        c = make_pair(pres, module, a, nu, check=False)
        if c.key() in group:
            continue
        gens.append(c)
        group = {x.key() for x in _closure(pres, module, gens, cap)}
        if len(group) == order:
            break
    return CompGroup(gens, order)


# -- action on tails ----------------------------------------------------------------


def action_matrix(pair: CompatiblePair, pres: PcPresentation, module: GModule) -> np.ndarray:
    """Matrix ``T`` (flat tails, row vectors) with ``t^(eta,nu) = t @ T``.

    Only rows of Z are meaningful: off Z the symbolic collection uses
    identities (such as t_ii fixed by g_i) that only cocycle tails satisfy.
    """
    n, s, p = pres.n, module.s, module.p
    tails, nvars = symbolic_tails(n, s)
    coll = ExtensionCollector(pres, module, tails, nvars)
    lifts = [coll.elem(pair.eta_inv[i]) for i in range(n)]
    vals = coll.relation_tails(lifts)  # (l, nvars+1, s)
    if vals[:, -1].any():
        raise AssertionError("split extension gave non-zero tails")
    vals = vals[:, :-1, :] @ pair.nu_matrix % p  # (l, nvars, s)
    return vals.transpose(1, 0, 2).reshape(nvars, -1)


def act_on_tail(pair: CompatiblePair, t: TailVector, pres: PcPresentation, module: GModule, Z=None) -> TailVector:
    if Z is not None and t.flat not in Z:
        raise ValueError("tail vector is not in Z")
    flat = t.flat @ action_matrix(pair, pres, module) % module.p
    return TailVector.from_flat(flat, pres.n, module.s, module.p)


def label_action(space: CocycleSpace, T: np.ndarray) -> np.ndarray:
    """The induced matrix on coordinates of Z/B."""
    p = space.module.p
    comp = space.complement
    rows = [space.label(c @ T % p) for c in comp]
    return np.array(rows, dtype=np.int64).reshape(comp.shape[0], comp.shape[0])


@dataclass
class Orbit:
    label: tuple
    tail: TailVector
    size: int


def orbits(space: CocycleSpace, gens: Sequence[CompatiblePair], cap: int = 10**7) -> list[Orbit]:
    """Orbits on Z/B; representatives are the least labels (first coordinate
    most significant)."""
    p = space.module.p
    h = space.complement.shape[0]
    total = p**h
    if total > cap:
        raise CapExceeded("|Z/B| = %d exceeds cap %d" % (total, cap))
    weights = p ** np.arange(h - 1, -1, -1, dtype=np.int64)
    labels = np.array(list(itertools.product(range(p), repeat=h)), dtype=np.int64).reshape(total, h)
    perms = []
    for g in gens:
        M = label_action(space, action_matrix(g, space.pres, space.module))
        perms.append((labels @ M % p) @ weights)
    # propagate minimum code over the orbit graph
    rep = np.arange(total)
    changed = True
    while changed:
        changed = False
        for perm in perms:
            new = np.minimum(rep, rep[perm])
            inv = np.empty_like(perm)
            inv[perm] = np.arange(total)
            new = np.minimum(new, new[inv])
            if not np.array_equal(new, rep):
                rep = new
                changed = True
        # pointer jumping
        while True:
            jumped = rep[rep]
            if np.array_equal(jumped, rep):
                break
            rep = jumped
            changed = True
    codes, sizes = np.unique(rep, return_counts=True)
    out = []
    for code, size in zip(codes, sizes):
        lab = tuple(int(x) for x in labels[code])
        out.append(Orbit(lab, space.tail(space.from_label(lab)), int(size)))
    return out


def stabilizer_order(comp_order: int, orbit_size: int) -> int:
    if orbit_size <= 0 or comp_order % orbit_size:
        raise ValueError("orbit size %d does not divide %d" % (orbit_size, comp_order))
    return comp_order // orbit_size
