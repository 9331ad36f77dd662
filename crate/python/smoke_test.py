"""Smoke test for the parcalc Python extension.

Build and install first, e.g. ``maturin develop -m crates/python/Cargo.toml``.
"""

import pathlib
from fractions import Fraction

import parcalc

ROOT = pathlib.Path(__file__).resolve().parent.parent
SCENARIO = ROOT / "crates" / "cli" / "tests" / "scenarios" / "double_cover.json"


def curves_and_cover():
    x = parcalc.MarkedCurve(0, ["p", "q"])
    z = parcalc.MarkedCurve(0, ["a", "b"])
    phi = parcalc.CoveringMap(x, z, 2, {"p": ("a", 2), "q": ("b", 2)})
    return x, z, phi


def test_covering():
    x, z, phi = curves_and_cover()
    assert phi.validate() is None
    assert phi.is_galois_profile()
    bad = parcalc.CoveringMap(x, z, 2, {"p": ("a", 2)})
    assert "Riemann" in bad.validate()


def test_degrees_and_functors():
    x, z, phi = curves_and_cover()
    line = parcalc.ParaLine(z, 2, {"a": Fraction(1, 2)})
    assert line.par_deg() == "5/2"

    pulled = parcalc.pullback_bundle(phi, parcalc.SplitBundle([line]))
    assert pulled.par_deg() == "5"

    pushed = parcalc.direct_image(phi, parcalc.ParabolicChar(x, 1, 0))
    assert (pushed.rank, pushed.degree) == (2, -1)
    assert pushed.weights == {"a": ["0", "1/2"], "b": ["0", "1/2"]}
    assert pushed.par_deg() == "0"

    try:
        parcalc.ParaLine(z, 0, {"a": "3/2"})
    except parcalc.ParcalcError:
        pass
    else:
        raise AssertionError("weight 3/2 accepted")


def test_naht():
    p = parcalc.SpectralPoint("higgs", "1/2", "1/4+1 i")
    c = parcalc.higgs_to_conn(p)
    assert (c.kind, c.jump, c.eigenvalue) == ("connection", "0", "1/2+2 i")
    assert parcalc.conn_to_higgs(c) == p

    up = parcalc.pullback_spectrum("higgs", 2, [p])
    via_higgs = [parcalc.higgs_to_conn(q) for q in up]
    via_conn = parcalc.pullback_spectrum("connection", 2, [c])
    assert parcalc.canonical(via_higgs) == parcalc.canonical(via_conn)


def test_scenario_and_verify():
    scenario = parcalc.Scenario.load(str(SCENARIO))
    report = scenario.run("degree", names=["L"])
    assert report["result"]["par_deg"] == "5/2"
    report = scenario.run("naht", names=["P"], table="table1", m=[2])
    assert report["result"]["commutes"] is True

    result = parcalc.verify(seed=0, trials=10)
    assert len(result["properties"]) == len(parcalc.property_names())
    assert all(p["passed"] == p["trials"] for p in result["properties"])


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"ok  {name}")
