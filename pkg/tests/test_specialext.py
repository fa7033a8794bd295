import itertools

import numpy as np
import pytest
from conftest import make_d8, make_q8, make_s3, make_s4

from grpext import oracle, specialext
from grpext.cocycles import (
    CapExceeded,
    TailVector,
    cocycle_space,
    extension_presentation,
)
from grpext.gfmodule import GModule, module_from_layer, trivial_module
from grpext.linalg import Subspace
from grpext.pcgroup import NotNilpotentError, NotRefinedError, PcPresentation, series_indices

C22 = PcPresentation.from_relations([2, 2])


def test_lcs_spec_c2xc2():
    spec = specialext.lcs_projection(C22, trivial_module(2, 1, 2))
    assert (spec.d, spec.m, spec.I, spec.h) == (2, 1, [(2, 1)], 1)


def test_der_spec_s4():
    spec = specialext.der_projection(make_s4(), trivial_module(2, 1, 4))
    assert spec.m == 3 and spec.I == [(4, 3)] and spec.target_dim == 1
    assert spec.quotient.sub.rank == 0


def test_preconditions():
    with pytest.raises(specialext.PreconditionError, match="not nilpotent"):
        specialext.lcs_projection(make_s4(), trivial_module(2, 1, 4))
    s3 = make_s3()
    with pytest.raises(specialext.PreconditionError, match="not trivial"):
        specialext.lcs_projection(make_d8(), GModule.from_arrays(3, 1, [[[2]], [[1]], [[1]]]))
    with pytest.raises(specialext.PreconditionError):
        specialext.classify(s3, trivial_module(2, 1, 2), *oracle.aut_generators(s3), "lcs")
    with pytest.raises(specialext.PreconditionError):
        specialext.lcs_projection(PcPresentation((), (), ()), trivial_module(2, 1, 0))


def test_fullness_examples():
    m = trivial_module(2, 1, 2)
    spec = specialext.lcs_projection(C22, m)
    d8 = TailVector.from_dict({(2, 1): 1}, 2, 1, 2)
    assert specialext.is_full(spec, d8)
    assert not specialext.is_full(spec, TailVector.from_dict({}, 2, 1, 2))
    s4 = make_s4()
    m4 = trivial_module(2, 1, 4)
    spec4 = specialext.der_projection(s4, m4)
    res = specialext.classify(s4, m4, *oracle.aut_generators(s4), "derived")
    gl23_tail = [e.tail for e in res.extensions if oracle.fingerprint(e.presentation).involutions() == 13]
    assert len(gl23_tail) == 1 and specialext.is_full(spec4, gl23_tail[0])
    assert not specialext.is_full(spec4, TailVector.from_dict({}, 4, 1, 2))


def test_quick_reject():
    g = make_s4()
    spec = specialext.der_projection(g, trivial_module(2, 2, 4))
    assert "h < d(A)" in specialext.quick_reject(spec, Subspace.zero(2, 20), 4)
    spec1 = specialext.der_projection(g, trivial_module(2, 1, 4))
    assert specialext.quick_reject(spec1, Subspace.zero(2, 10), 4)
    spec_c = specialext.lcs_projection(C22, trivial_module(2, 1, 2))
    assert specialext.quick_reject(spec_c, cocycle_space(C22, trivial_module(2, 1, 2)).Z, 2) is None


def test_count_examples():
    m = trivial_module(2, 1, 2)
    spec = specialext.lcs_projection(C22, m)
    Z = cocycle_space(C22, m).Z
    assert specialext.count_delta(spec, Z, 2) == 4
    assert specialext.count_delta(spec, Z, 2, symmetric=True) == 4
    assert specialext.brute_count(spec, Z, 2) == 4
    with pytest.raises(CapExceeded):
        specialext.count_delta(specialext.lcs_projection(C22, trivial_module(2, 3, 2)), Z, 2, cap=3)


@pytest.mark.parametrize(
    "g,m,kind",
    [
        (make_d8(), trivial_module(2, 2, 3), "lcs"),
        (make_q8(), trivial_module(3, 2, 3), "lcs"),
        (make_s3(), GModule.from_arrays(3, 2, [[[0, 1], [1, 0]], [[1, 0], [0, 1]]]), "derived"),
        (module_from_layer(make_s4(), 2, 4) + ("derived",)),
    ],
)
def test_count_matches_filter(g, m, kind):
    spec = specialext.lcs_projection(g, m) if kind == "lcs" else specialext.der_projection(g, m)
    Z = cocycle_space(g, m).Z
    assert specialext.count_delta(spec, Z, g.n) == specialext.brute_count(spec, Z, g.n)


def test_classify_c2xc2():
    res = specialext.classify(C22, trivial_module(2, 1, 2), *oracle.aut_generators(C22), "lcs")
    assert res.count == 2
    got = {oracle.fingerprint(e.presentation).involutions(): e.aut_order for e in res.extensions}
    assert got == {5: 8, 1: 24}
    assert res.orbit_sizes == [1, 3, 3, 1]


def test_classify_s4():
    s4 = make_s4()
    res = specialext.classify(s4, trivial_module(2, 1, 4), *oracle.aut_generators(s4), "derived")
    assert res.count == 2
    assert sorted(oracle.fingerprint(e.presentation).involutions() for e in res.extensions) == [1, 13]
    assert not oracle.isomorphic(res.extensions[0].presentation, res.extensions[1].presentation)


def test_classify_refines_first():
    # D8 on (r, r^2, s): the centre <r^2> is not a tail of the pcgs
    perm = PcPresentation.from_relations([2, 2, 2], {0: {1: 1}}, {(2, 0): {1: 1, 2: 1}})
    assert oracle.isomorphic(perm, make_d8())
    with pytest.raises(NotRefinedError):
        series_indices(perm, "lcs")
    res = specialext.classify(perm, trivial_module(2, 1, 3), *oracle.aut_generators(perm), "lcs")
    assert res.refinement is not None
    assert series_indices(res.pres, "lcs")
    for e in res.extensions:
        assert specialext.defining_property_holds(e.presentation, 3, "lcs")
    with pytest.raises(specialext.PreconditionError):
        specialext.classify(perm, trivial_module(2, 1, 3), [], 1, "lcs", comp=([], 1))


CASES = [
    (C22, trivial_module(2, 1, 2), "lcs"),
    (C22, trivial_module(3, 1, 2), "lcs"),
    (make_d8(), trivial_module(2, 1, 3), "lcs"),
    (make_q8(), trivial_module(2, 1, 3), "lcs"),
    (PcPresentation.from_relations([3, 3]), trivial_module(3, 1, 2), "lcs"),
    (make_s3(), GModule.from_arrays(3, 1, [[[2]], [[1]]]), "derived"),
    (make_s3(), trivial_module(2, 1, 2), "derived"),
    (module_from_layer(make_s4(), 2, 4) + ("derived",)),
    (make_s4(), trivial_module(2, 1, 4), "derived"),
]


@pytest.mark.parametrize("g,m,kind", CASES)
def test_complete_and_irredundant(g, m, kind):
    """Against exhaustive isomorphism on every full tail of Z."""
    res = specialext.classify(g, m, *oracle.aut_generators(g), kind)
    reps = [e.presentation for e in res.extensions]
    for a, b in itertools.combinations(reps, 2):
        assert not oracle.isomorphic(a, b)
    sp = res.space
    spec = res.spec
    p = m.p
    seen = 0
    for c in itertools.product(range(p), repeat=sp.Z.rank):
        t = sp.tail(np.array(c, dtype=np.int64) @ sp.Z.basis % p) if sp.Z.rank else sp.tail(np.zeros(sp.Z.dim, dtype=np.int64))
        if not specialext.is_full(spec, t):
            continue
        e = extension_presentation(res.pres, res.module, t)
        matches = sum(oracle.isomorphic(e, r) for r in reps)
        assert matches == 1
        seen += 1
    assert (seen > 0) == (len(reps) > 0)
    for e in res.extensions:
        assert specialext.defining_property_holds(e.presentation, res.pres.n, kind)
        if e.presentation.order() <= 512:
            assert e.aut_order == oracle.aut_group_order(e.presentation)


def test_lemma_full_against_hatdelta(small_groups):
    """Fullness of the projected tails equals spanning by hat-delta(g_j, g_i)."""
    rng = np.random.default_rng(7)
    checked = 0
    for g in small_groups:
        if g.n == 0:
            continue
        try:
            series_indices(g, "lcs")
        except (NotNilpotentError, NotRefinedError):
            continue
        for p, s in ((2, 1), (2, 2), (3, 1)):
            m = trivial_module(p, s, g.n)
            spec = specialext.lcs_projection(g, m)
            table = oracle.GroupTable.from_pres(g)
            mats = oracle.element_matrices(table, m)
            zb = oracle.brute_Z2(table, mats, p, s)
            gi = [g.index(g.gen(i)) for i in range(g.n)]
            for _ in range(8):
                d = np.tensordot(rng.integers(0, p, len(zb)), zb, 1) % p
                t = TailVector.from_flat(oracle.TableExtension(table, mats, d, p).relation_tails(g), g.n, s, p)
                hv = np.array([oracle.eval_hatdelta(table, d, gi[j - 1], gi[i - 1], p) for i, j in spec.I]).reshape(-1, s)
                spans = Subspace(hv, p, s).rank == s if hv.size else False
                assert specialext.is_full(spec, t) == spans
                checked += 1
    assert checked > 100
