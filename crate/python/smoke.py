"""Smoke test for the cocart extension: python python/smoke.py"""

import json

import cocart

SRC = """
category I { objects a b; arrows f: a -> b }
category T { objects t }
functor P: I -> T { a -> t; b -> t; f -> id_t }
category V { objects x y z; arrows u: x -> y, v: y -> z, w: x -> z; compose v.u = w }
category B { objects 0 1 2; arrows s: 0 -> 1, t: 1 -> 2, r: 0 -> 2; compose t.s = r }
functor Q: V -> B { x -> 0; y -> 1; z -> 2; u -> s; v -> t; w -> r }
"""


def main():
    i = cocart.Category.fixture("I")
    assert i.objects == ["0", "1"], i.objects
    assert i.num_arrows() == 3

    loc = i.localize(["f"])
    assert loc.is_groupoid()
    assert loc.num_objects() == 2 and loc.num_arrows() == 4
    g = loc.inverse("f")
    assert loc.compose(g, "f") == loc.identity("0")

    ws = cocart.Workspace.parse(SRC)
    assert ws.categories() == ["I", "T", "V", "B"]
    assert ws.apply("Q", "w") == "r"
    assert ws.conduche_witness("Q") is None
    assert ws.is_cocartesian_fibration("Q")
    again = cocart.Workspace.parse(ws.to_dsl())
    assert again.to_json() == ws.to_json()

    try:
        cocart.Workspace.parse("category X { objects a; arrows g: a -> b }")
    except cocart.CocartError as e:
        assert "b" in str(e)
    else:
        raise AssertionError("unresolved endpoint accepted")

    text, w = cocart.generate("localisation-instance", seed=3, size=3)
    assert w is not None and "category" in text

    report = json.loads(cocart.run_suite("core-laws"))
    assert report["passed"], [c for c in report["checks"] if c["verdict"] != "pass"]
    assert report["criterion"] == 1
    assert report == json.loads(cocart.run_suite("1"))
    assert "join-correctness" in cocart.suite_names()

    print("cocart", cocart.__version__, "smoke ok")


if __name__ == "__main__":
    main()
