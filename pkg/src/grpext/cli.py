"""Command-line front end: ``grpext <verb> ...``."""

from __future__ import annotations

import argparse
import os
import sys
from collections import Counter

from . import oracle, pcpfile, specialext
from .cocycles import CapExceeded, cocycle_space
from .compat import AutomorphismError, comp_group
from .pcgroup import (
    NotNilpotentError,
    NotRefinedError,
    PresentationError,
    check_consistency,
    derived_series,
    lower_central_series,
    nilpotency_class,
)
from .pcpfile import PcpFile, PcpParseError

EXIT_OK = 0
EXIT_PRECONDITION = 3
EXIT_CAP = 4
EXIT_PARSE = 5


class Precondition(Exception):
    pass


def _factor(n: int) -> str:
    parts = Counter()
    d = 2
    while d * d <= n:
        while n % d == 0:
            parts[d] += 1
            n //= d
        d += 1
    if n > 1:
        parts[n] += 1
    if not parts:
        return "1"
    return "*".join("%d^%d" % (q, e) if e > 1 else str(q) for q, e in sorted(parts.items()))


def _load(path: str) -> PcpFile:
    return pcpfile.parse(path)


def _need_module(pf: PcpFile):
    if pf.module is None:
        raise Precondition("input has no MODULE section")
    return pf.module


def _need_aut(pf: PcpFile):
    if pf.aut is None:
        raise Precondition("input has no AUT section; Aut(G) generators are required")
    return pf.aut


def _comp_user(pf: PcpFile):
    return None if pf.comp is None else (pf.comp.pairs, pf.comp.order)


def _series_line(name, series) -> str:
    return "%s: %s" % (name, " > ".join(str(s.order()) for s in series))


def cmd_check(args) -> int:
    pf = _load(args.file)
    g = pf.group
    print("consistent; order=%s; composition_length=%d" % (_factor(g.order()), g.n))
    if pf.module is not None:
        bad = pf.module.relator_failures(g)
        print("module p=%d s=%d %s" % (pf.module.p, pf.module.s, "ok" if not bad else "violates " + ", ".join(bad)))
        if bad:
            return EXIT_PRECONDITION
    return EXIT_OK


def cmd_series(args) -> int:
    g = _load(args.file).group
    ds = derived_series(g)
    lcs = lower_central_series(g)
    print(_series_line("derived", ds))
    print(_series_line("lower_central", lcs))
    print("refines_derived=%s" % all(s.tail_index() is not None for s in ds))
    print("refines_lcs=%s" % all(s.tail_index() is not None for s in lcs))
    c = nilpotency_class(g)
    print("derived_length=%d; nilpotency_class=%s" % (len(ds) - 1, "inf" if c is None else c))
    return EXIT_OK


def cmd_h2(args) -> int:
    pf = _load(args.file)
    m = _need_module(pf)
    sp = cocycle_space(pf.group, m)
    print("l=%d s=%d" % (sp.l, m.s))
    print("dim Z=%d; dim B=%d; dim Z1=%d; dim H2=%d" % (sp.Z.rank, sp.B.rank, sp.Z1.rank, sp.h2_dim))
    return EXIT_OK


def cmd_comp(args) -> int:
    pf = _load(args.file)
    m = _need_module(pf)
    aut = _need_aut(pf)
    cg = comp_group(pf.group, m, aut.generators, aut.order, user=_comp_user(pf))
    print("|Aut(G)|=%d; |Comp(G,A)|=%d; generators=%d" % (aut.order, cg.order, len(cg.generators)))
    return EXIT_OK


def cmd_count(args) -> int:
    pf = _load(args.file)
    m = _need_module(pf)
    g = pf.group
    spec = specialext.lcs_projection(g, m) if args.kind == "lcs" else specialext.der_projection(g, m)
    sp = cocycle_space(g, m)
    reason = specialext.quick_reject(spec, sp.Z, g.n)
    if reason:
        print("quick_reject: %s" % reason)
    n = specialext.count_delta(spec, sp.Z, g.n, symmetric=m.is_trivial())
    print("|Z|=%d; |I|=%d; target_dim=%d" % (sp.Z.size, spec.h, spec.target_dim))
    print("count=%d" % n)
    return EXIT_OK


def _classify(args, kind: str) -> int:
    pf = _load(args.file)
    m = _need_module(pf)
    aut = _need_aut(pf)
    res = specialext.classify(pf.group, m, aut.generators, aut.order, kind, comp=_comp_user(pf))
    if res.refinement is not None:
        print("refined presentation through the %s series" % ("lower central" if kind == "lcs" else "derived"))
    sp = res.space
    print("dim Z=%d; dim B=%d; dim H2=%d; |Comp|=%d" % (sp.Z.rank, sp.B.rank, sp.h2_dim, res.comp_order))
    if res.reject:
        print("quick_reject: %s" % res.reject)
    else:
        print("orbits=%d; sizes=%s" % (len(res.orbit_sizes), " ".join(map(str, res.orbit_sizes))))
    stem = os.path.splitext(os.path.basename(args.file))[0]
    if args.out:
        os.makedirs(args.out, exist_ok=True)
    for idx, e in enumerate(res.extensions, 1):
        fp = oracle.fingerprint(e.presentation) if args.fingerprint else None
        line = "ext %d: label=%s orbit=%d stabilizer=%d aut_order=%d order=%d" % (
            idx,
            ",".join(map(str, e.label)),
            e.orbit_size,
            e.stabilizer_order,
            e.aut_order,
            e.presentation.order(),
        )
        print(line)
        if fp is not None:
            print("  %s" % fp)
        if args.out:
            path = os.path.join(args.out, "%s_%s_%d.pcp" % (stem, kind, idx))
            pcpfile.write(PcpFile(e.presentation), path, "tail label %s" % ",".join(map(str, e.label)))
    print("count=%d" % res.count)
    return EXIT_OK


def cmd_lcs(args) -> int:
    return _classify(args, "lcs")


def cmd_der(args) -> int:
    return _classify(args, "derived")


def cmd_fingerprint(args) -> int:
    print(oracle.fingerprint(_load(args.file).group))
    return EXIT_OK


def cmd_iso(args) -> int:
    a, b = _load(args.a).group, _load(args.b).group
    print("isomorphic=%s" % oracle.isomorphic(a, b))
    return EXIT_OK


def cmd_figures(args) -> int:
    text = pcpfile.figure_presentation_text(args.k, corrected=args.corrected)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    if not args.check:
        if not args.out:
            sys.stdout.write(text)
        return EXIT_OK
    g = pcpfile.parses(text, check=False).group
    bad = check_consistency(g)
    if bad:
        print("inconsistent; %d failing overlaps: %s" % (len(bad), ", ".join(bad[:10])))
        return EXIT_PRECONDITION
    dl = len(derived_series(g)) - 1
    print("consistent; order=%s; derived_length=%d; composition_length=%d" % (_factor(g.order()), dl, g.n))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="grpext", description="Special extensions of finite solvable groups.")
    sub = ap.add_subparsers(dest="verb", required=True)

    def verb(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(fn=fn)
        return p

    verb("check", cmd_check, "parse and check consistency").add_argument("file")
    verb("series", cmd_series, "derived and lower central series").add_argument("file")
    verb("h2", cmd_h2, "dimensions of Z, B and H^2").add_argument("file")
    verb("comp", cmd_comp, "compatible pairs").add_argument("file")
    p = verb("count", cmd_count, "count tails with full projection")
    p.add_argument("file")
    p.add_argument("--kind", choices=("lcs", "derived"), default="lcs")
    for name, fn, kind in (("lcs-ext", cmd_lcs, "lower central series"), ("der-ext", cmd_der, "derived series")):
        p = verb(name, fn, "classify %s extensions" % kind)
        p.add_argument("file")
        p.add_argument("--out", help="directory for one .pcp per representative")
        p.add_argument("--fingerprint", action="store_true", help="print a fingerprint per extension")
    verb("fingerprint", cmd_fingerprint, "isomorphism invariants").add_argument("file")
    p = verb("iso", cmd_iso, "exhaustive isomorphism test")
    p.add_argument("a")
    p.add_argument("b")
    p = verb("figures", cmd_figures, "the order 2^11*3^13 family")
    p.add_argument("--k", type=int, choices=(0, 1, 2), required=True)
    p.add_argument("--check", action="store_true")
    p.add_argument("--corrected", action="store_true", help="apply the two g24 exponent errata")
    p.add_argument("--out")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PcpParseError as e:
        print("parse error: %s" % e, file=sys.stderr)
        return EXIT_PARSE
    except (CapExceeded, oracle.OracleCapError) as e:
        print("cap exceeded: %s" % e, file=sys.stderr)
        return EXIT_CAP
    except (Precondition, specialext.PreconditionError, AutomorphismError, PresentationError, NotRefinedError, NotNilpotentError) as e:
        print("precondition failed: %s" % e, file=sys.stderr)
        return EXIT_PRECONDITION
    except OSError as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
