#!/usr/bin/env python3
"""Smoke test for the dcfg_py extension module.

Builds nothing itself: run `cargo build -p dcfg-py --release` first.
The script locates the compiled cdylib under target/, stages it as
`dcfg_py.so` in a temporary directory, imports it, and exercises the
tuple algebra, the grammar text format, bounded enumeration, the
normal-form pipeline, and the bounded equivalence check.
"""

import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        ROOT / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libdcfg_py.so", "dcfg_py.so", "libdcfg_py.dylib")
    ]
    lib = next((p for p in candidates if p.exists()), None)
    if lib is None:
        sys.exit("dcfg_py cdylib not found; run: cargo build -p dcfg-py --release")
    stage = pathlib.Path(tempfile.mkdtemp(prefix="dcfg_py_"))
    shutil.copy2(lib, stage / "dcfg_py.so")
    sys.path.insert(0, str(stage))
    import dcfg_py

    return dcfg_py


def check_tuples(m):
    x = m.StringTuple([["a"], ["b", "b"]])
    assert x.rank == 1 and len(x) == 3
    assert x.components == [["a"], ["b", "b"]]

    y = m.StringTuple.word(["a"])
    z = x.concat(y)
    assert z.rank == 1 and len(z) == 4

    # Intercalation fills gap 1 and adds rank(y) - 1 gaps.
    w = x.intercalate(1, m.StringTuple([["c"], ["d"]]))
    assert w.rank == 1 and len(w) == 5

    # bridge . split is the identity on the original tuple.
    s = x.split(1, 3)
    assert s.rank == 3
    back = s.bridge(1).bridge(1)
    assert back == x

    padded = x.concat(m.StringTuple.all_eps(2))
    assert padded.strip_right(2) == x
    assert x.reversed().reversed() == x
    assert m.StringTuple.epsilon().is_all_eps()

    try:
        x.intercalate(5, y)
    except ValueError:
        pass
    else:
        raise AssertionError("intercalate past the rank must raise")

    v = m.evaluate_term('("a","b") @1 "c"')
    assert v.components == [["a", "c", "b"]]
    print("tuple algebra: ok")


def check_grammars(m):
    g = m.Grammar.example(1)
    assert g.k == 1 and g.start and g.validate() == [] and g.is_linear()

    # Round trip through the text format.
    g2 = m.Grammar.parse(str(g))
    assert str(g2) == str(g)
    assert g2.nonterminals == g.nonterminals
    assert len(g2.rules) == len(g.rules)

    # L_1 at bound 8 contains exactly m = 0, 1, 2.
    words = g.enumerate(8)
    assert len(words) == 3, words
    assert any(len(w) == 0 for w in words)
    assert all(len(w) % 4 == 0 for w in words)

    n = g.normalize()
    assert n.validate() == []
    assert g.equiv_up_to(n, 8) is None

    trace = g.normalization_trace("wellformed")
    assert all(
        not line or line[:2] in ("+ ", "- ", "! ", "# ")
        for line in trace.splitlines()
    ), trace

    witness = g.equiv_up_to(m.Grammar.example(2), 8)
    assert witness is not None
    tup, in_first = witness
    assert isinstance(tup, m.StringTuple) and isinstance(in_first, bool)

    try:
        m.Grammar.parse("k: x\n")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed grammar text must raise")
    print("grammars: ok")


def main():
    m = load_module()
    check_tuples(m)
    check_grammars(m)
    print("smoke test: ok")


if __name__ == "__main__":
    main()
