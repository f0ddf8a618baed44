"""Smoke test for the pycuttree extension.

Build and install first:
    cd crates/python && maturin build --release -o dist && pip install dist/*.whl
Then run with pytest or plain python.
"""

import math

import pycuttree as ct


def test_sample_and_pmf():
    w = ct.Weights([0.4, 0.3, 0.2, 0.1])
    rng = ct.Rng(7)
    t = ct.sample_ptree(w, rng)
    assert t.n == 4 and len(t.edges()) == 3
    assert t.parent(t.root) is None
    assert 0.0 < ct.ptree_pmf(w, t) <= 1.0
    assert ct.Tree.from_json(t.to_json()) == t
    assert ct.Tree(t.parents) == t


def test_same_seed_same_tree():
    w = ct.Weights.uniform(40)
    a = ct.sample_ptree(w, ct.Rng(11))
    b = ct.sample_ptree(w, ct.Rng(11))
    assert a == b


def test_cuts_reverse_exactly():
    w = ct.Weights.uniform(25)
    rng = ct.Rng(3)
    t = ct.sample_ptree(w, rng)
    for rec in (
        ct.cut_one_vertex(t, 5, w, rng),
        ct.cut_targets(t, [2, 9, 5], w, rng),
        ct.cut_all(t, w, rng),
    ):
        assert rec["kind"] in ("one", "k", "complete")
        assert ct.record_tree(rec).n == 25
        assert ct.reverse(rec) == t


def test_shuffles_keep_size():
    w = ct.Weights.uniform(10)
    rng = ct.Rng(4)
    t = ct.sample_ptree(w, rng)
    for s in (ct.shuff_one(t, 3, w, rng), ct.shuff_k(t, [1, 2], w, rng), ct.shuff_complete(t, w, rng)):
        assert s.n == 10 and len(s.edges()) == 9


def test_continuum_helpers():
    assert abs(ct.survival_eta1([1.0], 1.0) - math.exp(-0.5)) < 1e-12
    h = math.sqrt(0.5)
    assert abs(ct.survival_eta1([h, h], math.sqrt(2)) - 2 * math.exp(-1.5)) < 1e-12
    rt = ct.line_break([0.6, 0.8], 3, ct.Rng(5))
    assert len(rt["leaves"]) == 3
    w = ct.build_pn([0.6, 0.8], 500)
    assert w.n == 500 and abs(sum(w.probs) - 1.0) < 1e-9
    g = ct.genealogy([1.0], 2, m=100, seed=1)
    assert len(g["l_infinity"]) == 2


def test_errors_and_suites():
    for bad in (lambda: ct.Weights([0.5, 0.6]), lambda: ct.build_pn([0.7, 0.7], 10)):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")
    assert "cayley" in ct.suite_names()
    verdicts = ct.run_suite("cayley")
    assert all(v["pass"] for v in verdicts)
    try:
        ct.run_suite("nope")
    except KeyError:
        pass
    else:
        raise AssertionError("expected KeyError")


if __name__ == "__main__":
    for name, f in sorted(globals().items()):
        if name.startswith("test_") and callable(f):
            f()
            print(f"ok {name}")
