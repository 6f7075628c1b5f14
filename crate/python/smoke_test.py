"""Smoke test for the Python extension. Build and install it first:

    cd crates/python && maturin build --release -o dist && pip install dist/*.whl

then run `python python/smoke_test.py` from the repository root.
"""

import math
import pathlib
import sys
import tempfile
import json

import lamcert_py as lc

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "fixtures"


def main():
    sq = lc.FlatTorusLattice([1.0, 0.0], [0.0, 1.0])
    assert sq.slope_length(3, 4) == 5.0
    assert sq.shortest_vector() == ((1, 0), 1.0)
    lo, hi = sq.covering_radius()
    assert lo <= math.sqrt(0.5) <= hi

    lo, hi = lc.nz_window(10.0)
    assert abs(lo - 2 * math.pi / 116.17) < 1e-15
    assert abs(hi - 2 * math.pi / 71.22) < 1e-15
    try:
        lc.nz_window(7.0)
    except lc.HypothesisError:
        pass
    else:
        raise AssertionError("short slope accepted")
    try:
        sq.slope_length(2, 4)
    except ValueError:
        pass
    else:
        raise AssertionError("non-primitive slope accepted")

    assert lc.boundary_slopes([2, 0], [([1, 0], [0, 1])]) == [(0, 2)]

    m = lc.Manifold.load(str(FIXTURES / "deep_square.json"))
    assert m.n_cusps == 1
    assert m.total_normalized_length("3,4") == 5.0

    fam = lc.Manifold.load(str(FIXTURES / "bd_synthetic.json")).family(str(FIXTURES / "bd_family.json"))
    assert fam["table"]["threshold"]["n"] == 36

    report = m.certify("1,0", [0, 1])
    assert report["report"]["verdict"] == "hypotheses-failed"
    with tempfile.TemporaryDirectory() as d:
        path = pathlib.Path(d) / "report.json"
        path.write_text(json.dumps(report, indent=2))
        assert lc.verify_report_file(str(path)) == []

    v = lc.verify_tubes(500, 7)
    assert v == lc.verify_tubes(500, 7)
    assert all(s["violations"] == 0 for s in v["suites"])
    print("python smoke test: ok")


if __name__ == "__main__":
    sys.exit(main())
