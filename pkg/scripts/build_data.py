"""Regenerate the small bundled .pcp files.

The order-432 group is the quotient M/M^(6) of the (corrected) figure group
M by the sixth derived term, with the module M^(6)/M^(7) and Aut data found
by exhaustive search.
"""

import os

from grpext import gfmodule, oracle, pcpfile
from grpext.pcgroup import PcPresentation, derived_series
from grpext.pcpfile import AutSpec, PcpFile

DATA = os.path.join(os.path.dirname(__file__), "..", "src", "grpext", "data")


def with_aut(pres, module, comment, name):
    gens, order = oracle.aut_generators(pres)
    aut = AutSpec(tuple(tuple(tuple(int(e) for e in x) for x in g) for g in gens), order)
    pcpfile.write(PcpFile(pres, module, aut), os.path.join(DATA, name), comment)
    print(name, pres.order(), order)


def main():
    c22 = PcPresentation.from_relations([2, 2], {}, {})
    with_aut(c22, gfmodule.trivial_module(2, 1, 2), "C2 x C2 with the trivial module GF(2)", "c2c2_c2.pcp")

    s4 = PcPresentation.from_relations(
        [2, 3, 2, 2], {}, {(1, 0): {1: 2}, (3, 0): {2: 1, 3: 1}, (2, 1): {3: 1}, (3, 1): {2: 1, 3: 1}}
    )
    with_aut(s4, gfmodule.trivial_module(2, 1, 4), "S4 > A4 > V4 > 1 with the trivial module GF(2)", "s4_c2.pcp")

    m = pcpfile.figure_presentation(1, corrected=True)
    ds = derived_series(m)
    start, stop = ds[5].tail_index(), ds[6].tail_index()
    g, a = gfmodule.module_from_layer(m, start, stop)
    with_aut(g, a, "M/M^(6) = GL(2,3) x| 3^2 (order 432) with the layer M^(6)/M^(7)", "gl23_3_2.pcp")


if __name__ == "__main__":
    main()
