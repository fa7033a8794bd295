import numpy as np
import pytest
from conftest import make_d8, make_s3, make_s4

from grpext import compat, oracle
from grpext.cocycles import TailVector, cocycle_space, extension_presentation
from grpext.gfmodule import GModule, module_from_layer, trivial_module
from grpext.pcgroup import PcPresentation

C22 = PcPresentation.from_relations([2, 2])


def _setup(g, m):
    ag, ao = oracle.aut_generators(g)
    return cocycle_space(g, m), compat.comp_group(g, m, ag, ao), ag, ao


def test_automorphism_checks():
    s4 = make_s4()
    ident = tuple(s4.gen(i) for i in range(4))
    compat.check_automorphism(s4, ident)
    with pytest.raises(compat.AutomorphismError):
        compat.check_automorphism(s4, (s4.gen(0),) * 4)
    with pytest.raises(compat.AutomorphismError):
        compat.check_automorphism(s4, ident[:3])
    for a in oracle.aut_generators(s4)[0]:
        inv = compat.invert_automorphism(s4, a)
        assert compat.compose(s4, a, inv) == ident
        assert compat.compose(s4, inv, a) == ident


def test_compose_is_right_action():
    d8 = make_d8()
    gens, _ = oracle.aut_generators(d8)
    a, b = gens[0], gens[-1]
    ab = compat.compose(d8, a, b)
    for x in d8.elements():
        assert compat.apply_hom(d8, ab, x) == compat.apply_hom(d8, b, compat.apply_hom(d8, a, x))


@pytest.mark.parametrize(
    "g,m,order",
    [
        (C22, trivial_module(2, 1, 2), 6),
        (make_s4(), trivial_module(2, 1, 4), 24),
        (C22, trivial_module(2, 2, 2), 36),
        (make_s3(), GModule.from_arrays(3, 1, [[[2]], [[1]]]), 6 * 2),
    ],
)
def test_comp_orders(g, m, order):
    _, cg, _, _ = _setup(g, m)
    assert cg.order == order
    assert len(compat._closure(g, m, cg.generators, 10**6)) == order


def test_nontrivial_module_comp_matches_brute_force():
    g, m = module_from_layer(make_s4(), 2, 4)  # S3 on GF(2)^2
    _, cg, _, _ao = _setup(g, m)
    brute = sum(
        1
        for a in compat.aut_elements(g, oracle.aut_generators(g)[0])
        for nu in (np.array(v).reshape(2, 2) for v in np.ndindex(2, 2, 2, 2))
        if compat.is_compatible(g, m, a, nu)
    )
    assert cg.order == brute == 6


def test_user_pairs_checked():
    g = C22
    m = trivial_module(2, 1, 2)
    ident = tuple(g.gen(i) for i in range(2))
    cg = compat.comp_group(g, m, [], 1, user=([(ident, [[1]])], 1))
    assert cg.order == 1
    s3 = make_s3()
    sign = GModule.from_arrays(3, 1, [[[2]], [[1]]])
    bad_nu = [[0]]
    with pytest.raises(compat.AutomorphismError):
        compat.make_pair(s3, sign, tuple(s3.gen(i) for i in range(2)), bad_nu)


def test_aut_order_mismatch_detected():
    s3 = make_s3()
    sign = GModule.from_arrays(3, 1, [[[2]], [[1]]])
    gens, order = oracle.aut_generators(s3)
    with pytest.raises(compat.AutomorphismError):
        compat.comp_group(s3, sign, gens, order + 1)


def test_orbits_c2xc2():
    sp, cg, _, _ = _setup(C22, trivial_module(2, 1, 2))
    orbs = compat.orbits(sp, cg.generators)
    assert sorted(o.size for o in orbs) == [1, 1, 3, 3]
    assert orbs[0].label == (0, 0, 0) and orbs[0].size == 1
    q8 = TailVector.from_dict({(1, 1): 1, (2, 2): 1, (2, 1): 1}, 2, 1, 2)
    for c in cg.generators:
        assert compat.act_on_tail(c, q8, C22, sp.module).key() == q8.key()
    stabs = {o.size: compat.stabilizer_order(cg.order, o.size) for o in orbs}
    assert stabs == {1: 6, 3: 2}
    with pytest.raises(ValueError):
        compat.stabilizer_order(6, 4)


def test_orbits_s4_all_fixed():
    sp, cg, _, _ = _setup(make_s4(), trivial_module(2, 1, 4))
    assert [o.size for o in compat.orbits(sp, cg.generators)] == [1, 1, 1, 1]


def test_identity_and_split_extension():
    g, m = module_from_layer(make_s4(), 2, 4)
    sp, cg, _, _ = _setup(g, m)
    ident = compat.identity_pair(g, m)
    T = compat.action_matrix(ident, g, m)
    assert np.array_equal(sp.Z.basis @ T % 2, sp.Z.basis)
    zero = sp.tail(np.zeros(sp.Z.dim, dtype=np.int64))
    for c in cg.generators:
        assert compat.act_on_tail(c, zero, g, m).flat in sp.B


def test_action_is_a_group_action():
    g, m = C22, trivial_module(3, 2, 2)
    sp, cg, _, _ = _setup(g, m)
    a, b = cg.generators[0], cg.generators[-1]
    ab = compat.compose_pairs(g, a, b, m.p)
    Ta, Tb, Tab = (compat.action_matrix(c, g, m) for c in (a, b, ab))
    rng = np.random.default_rng(5)
    for _ in range(10):
        t = rng.integers(0, 3, sp.Z.rank) @ sp.Z.basis % 3
        assert np.array_equal(t @ Tab % 3, t @ Ta @ Tb % 3)


def _cases():
    yield C22, trivial_module(2, 2, 2)
    yield make_d8(), trivial_module(2, 1, 3)
    yield make_s4(), trivial_module(3, 1, 4)
    yield make_s3(), GModule.from_arrays(3, 1, [[[2]], [[1]]])
    yield module_from_layer(make_s4(), 2, 4)


@pytest.mark.parametrize("g,m", list(_cases()))
def test_action_matches_transformed_cocycles(g, m):
    """The tail action agrees, modulo B, with transporting the cocycle
    function along (eta, nu); a deliberately wrong matrix does not."""
    sp, cg, _, _ = _setup(g, m)
    table = oracle.GroupTable.from_pres(g)
    mats = oracle.element_matrices(table, m)
    p = m.p
    zb = oracle.brute_Z2(table, mats, p, m.s, cap=64)
    elts = list(g.elements())
    rng = np.random.default_rng(11)
    wrong_seen = False
    for pair in cg.generators:
        T = compat.action_matrix(pair, g, m)
        perm = np.array([g.index(compat.apply_hom(g, pair.eta_inv, x)) for x in elts])
        for _ in range(5):
            d = np.tensordot(rng.integers(0, p, len(zb)), zb, 1) % p
            t = oracle.TableExtension(table, mats, d, p).relation_tails(g)
            d2 = oracle.transform_cocycle(table, d, perm, pair.nu_matrix, p)
            assert oracle.cocycle_holds(table, mats, d2, p)
            t2 = oracle.TableExtension(table, mats, d2, p).relation_tails(g)
            assert (t2 - t @ T) % p in sp.B
            # leaving t unchanged is wrong whenever the pair moves classes
            wrong_seen |= (t2 - t) % p not in sp.B
    moves = any((compat.label_action(sp, compat.action_matrix(c, g, m)) != np.eye(sp.h2_dim)).any() for c in cg.generators)
    assert wrong_seen == moves


def test_extensions_in_one_orbit_are_isomorphic():
    sp, cg, _, _ = _setup(C22, trivial_module(2, 1, 2))
    for o in compat.orbits(sp, cg.generators):
        e = extension_presentation(C22, sp.module, o.tail)
        for c in cg.generators:
            t2 = compat.act_on_tail(c, o.tail, C22, sp.module)
            assert oracle.isomorphic(e, extension_presentation(C22, sp.module, t2))
