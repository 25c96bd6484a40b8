import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyline_gen import random_shared_tuple
from spinweb import webgeo
from spinweb.errors import DomainError, InputError
from spinweb.projcalc import RepTuple
from spinweb.splitcore import Splitting, is_rich, max_splitting
from spinweb.webgeo import (
    V1,
    V2,
    CoefficientProduct,
    EdgeTuple,
    MatrixCoefficient,
    ParamPolyline,
    SpinWeb,
)

HALF4 = RepTuple.parse("1/2,1/2,1/2,1/2")


def poly(pts, ts):
    return ParamPolyline(np.array(pts, float), np.array(ts, float))


@pytest.fixture
def fork():
    a = poly([[0, 0], [1, 0], [2, 1]], [0, 0.5, 1])
    b = poly([[0, 0], [1, 0], [2, -1]], [0, 0.5, 1])
    return EdgeTuple((a, b))


def test_polyline_validation():
    with pytest.raises(InputError):
        poly([[0, 0]], [0])
    with pytest.raises(InputError):
        poly([[0, 0], [0, 0], [1, 1]], [0, 0.5, 1])
    with pytest.raises(InputError):
        poly([[0, 0], [1, 1]], [0, 0.9])
    with pytest.raises(InputError):
        poly([[0, 0], [1, 0], [2, 0]], [0, 0.6, 0.5])


def test_consistency_examples(fork):
    a = fork.paths[0]
    assert webgeo.check_consistent(EdgeTuple((a, a))).ok
    skew = poly([[0, 0], [1, 0], [2, 1]], [0, 0.3, 1])
    rep = webgeo.check_consistent(EdgeTuple((a, skew)))
    assert not rep.ok and rep.violations[0][:2] == (1, 2)
    far = poly([[0, 5], [1, 6]], [0, 1])
    assert webgeo.check_consistent(EdgeTuple((a, far))).ok


def test_self_intersection_reported():
    loop = poly([[0, 0], [2, 0], [1, 1], [1, -1]], [0, 0.3, 0.6, 1])
    assert not webgeo.check_consistent(EdgeTuple((loop,))).ok


def test_coincidence_intervals(fork):
    assert webgeo.coincidence_intervals(fork, 1, 2) == [(0.0, 0.5)]
    assert webgeo.coincidence_intervals(fork, 1, 1) == [(0.0, 1.0)]
    x1 = poly([[0, 0], [1, 1]], [0, 1])
    x2 = poly([[0, 1], [1, 0]], [0, 1])
    assert webgeo.coincidence_intervals(EdgeTuple((x1, x2)), 1, 2) == []
    bad = EdgeTuple((fork.paths[0], poly([[0, 0], [1, 0], [2, 1]], [0, 0.3, 1])))
    with pytest.raises(InputError):
        webgeo.coincidence_intervals(bad, 1, 2)


def test_decompose_examples(fork):
    res = webgeo.decompose(fork)
    assert res.breakpoints == (0.0, 0.5, 1.0)
    assert [len(r) for r, _ in res.pieces] == [1, 2]
    x1 = poly([[0, 0], [1, 1]], [0, 1])
    x2 = poly([[0, 3], [1, 4]], [0, 1])
    assert webgeo.decompose(EdgeTuple((x1, x2)), (0.2, 0.7)).breakpoints == (0.2, 0.7)
    same = webgeo.decompose(EdgeTuple((x1, x1)))
    assert same.breakpoints == (0.0, 1.0) and same.pieces[0][1] == Splitting.of("11")
    with pytest.raises(InputError):
        webgeo.decompose(fork, (0.5, 0.5))


def test_reduction_example():
    g1 = poly([[0, 0], [1, 1]], [0, 1])
    g2 = poly([[0, 0], [1, -1]], [0, 1])
    g3 = poly([[0, 0], [-1, 1]], [0, 1])
    reps, V = webgeo.reduction_and_splitting(EdgeTuple((g1, g2, g3, g2)))
    assert reps == (1, 2, 3)
    assert V == Splitting.of("1000", "0101", "0010")
    assert webgeo.reduction_and_splitting(EdgeTuple((g1, g2, g3)))[1] == max_splitting(3)
    assert webgeo.reduction_and_splitting(EdgeTuple((g1, g1)))[1] == Splitting.of("11")


@settings(max_examples=60)
@given(st.integers(0, 2**31))
def test_decomposition_pieces_are_nice(seed):
    t = random_shared_tuple(np.random.default_rng(seed))
    res = webgeo.decompose(t)
    assert all(b > a for a, b in res.intervals)
    for piece in res.intervals:
        assert webgeo.is_hyph_piece(t, piece)
        assert webgeo.decompose(t, piece).breakpoints == piece


def test_standard_web_structure():
    w = webgeo.standard_web(2)
    assert webgeo.validate_web(w) == []
    assert webgeo.regular_sequence(w) == [V1, V2, V1, V2]
    assert set(webgeo.types_set(w)) == {(1, 1, 0, 0), (1, 0, 1, 0), (0, 1, 0, 1), (0, 0, 1, 1)}
    assert is_rich(webgeo.types_set(w), 4)
    assert webgeo.limit_splittings(w) == {V1, V2}
    union = {v for V in webgeo.limit_splittings(w) for v in V}
    assert union == set(webgeo.types_set(w))


def test_regular_set_dense():
    w = webgeo.standard_web(3)
    total = sum(b - a for a, b in webgeo.regular_set(w))
    assert total > 1 - 1e-9
    single = webgeo.Web((poly([[0, 0], [1, 0]], [0, 1]),), (Splitting.of("1"),), 1)
    assert webgeo.regular_set(single) == [(0.0, 1.0)]
    assert webgeo.types_set(single) == ((1,),)
    assert webgeo.limit_splittings(single) == {Splitting.of("1")}


def test_splitting_at_bubbles():
    w = webgeo.standard_web(2)
    regs = webgeo.regular_set(w)
    a, b = regs[-1]  # nearest parameter 1: a type-1 bubble
    assert webgeo.splitting_at(w, (a + b) / 2) == V1
    with pytest.raises(InputError):
        webgeo.splitting_at(w, 1.0)
    with pytest.raises(InputError):
        webgeo.splitting_at(w, regs[0][1])


def test_splitting_locally_constant():
    w = webgeo.standard_web(2)
    for a, b in webgeo.regular_set(w):
        vals = {webgeo.splitting_at(w, t) for t in np.linspace(a, b, 12)[1:-1]}
        assert len(vals) == 1
        assert set(next(iter(vals))) <= set(webgeo.types_set(w))


def test_identical_paths_share_one_type():
    e = poly([[0, 0], [1, 0.5], [2, 0]], [0, 0.5, 1])
    w = webgeo.Web((e, e))
    assert webgeo.splitting_at(w, 0.3) == Splitting.of("11")


def test_degeneracy_decision():
    w = webgeo.standard_web(2)
    d = webgeo.is_weakly_degenerate(SpinWeb(w, HALF4))
    assert d.degenerate and d.element == (1, 1, 0, 0) and d.q == 1
    assert str(d) == "degenerate, witness (1,1,0,0)"
    assert not webgeo.is_weakly_degenerate(SpinWeb(w, RepTuple.parse("1/2,1,3/2,2"))).degenerate
    single = webgeo.Web((poly([[0, 0], [1, 0]], [0, 1]),))
    assert not webgeo.is_weakly_degenerate(SpinWeb(single, RepTuple.parse("1/2"))).degenerate


def test_word_map_rank():
    assert webgeo.word_map_rank([V1, V2, V1, V2], seed=3) == 12


def test_strong_degeneracy_series():
    B = webgeo.bubbles_needed(2, 20)
    sw = SpinWeb(webgeo.standard_web(B), HALF4)
    s = webgeo.strong_degeneracy_series(sw, 2)
    assert all(b < a for a, b in zip(s, s[1:]))
    assert all(abs(x - 0.75 ** (k + 1)) < 1e-8 for k, x in enumerate(s))
    assert 0 <= webgeo.strong_degeneracy_series(SpinWeb(webgeo.standard_web(2), HALF4), 0, gap=0)[0] <= 1
    with pytest.raises(InputError):
        webgeo.strong_degeneracy_series(SpinWeb(webgeo.standard_web(2), HALF4), 5)
    with pytest.raises(DomainError):
        webgeo.strong_degeneracy_series(SpinWeb(webgeo.standard_web(B), RepTuple.parse("1/2,1,3/2,2")), 2)


def test_schedule_gaps_are_web_splittings():
    sw = SpinWeb(webgeo.standard_web(webgeo.bubbles_needed(1, 6)), HALF4)
    sched = webgeo.degeneracy_schedule(sw, 1, gap=6)
    assert sched.filter.splitting == V1 and sched.filter.q == 1
    for chain in sched.gap_blocks:
        assert len(chain) >= 6 and set(chain) <= {V1, V2}


def coeff(slot, r, c, conj=False):
    return MatrixCoefficient(slot, r, c, conj=conj)


def test_cylinder_integrals():
    e = poly([[0, 0], [1, 1]], [0, 1])
    e2 = poly([[0, 0], [1, -1]], [0, 1])
    f = CoefficientProduct((coeff(1, 1, 1), coeff(2, 1, 1, True)))
    assert abs(webgeo.integrate_cylinder(f, EdgeTuple((e, e))) - 0.5) < 1e-13
    assert abs(webgeo.integrate_cylinder(f, EdgeTuple((e, e2)))) < 1e-13
    assert webgeo.integrate_cylinder(CoefficientProduct.one(), EdgeTuple((e, e2))) == 1


def test_cylinder_hand_reduction():
    g1 = poly([[0, 0], [1, 1]], [0, 1])
    g2 = poly([[0, 0], [1, -1]], [0, 1])
    g3 = poly([[0, 0], [-1, 1]], [0, 1])
    f = CoefficientProduct((coeff(2, 1, 2), coeff(4, 1, 2, True), coeff(1, 1, 1), coeff(1, 1, 1, True), coeff(3, 2, 2)))
    got = webgeo.integrate_cylinder(f, EdgeTuple((g1, g2, g3, g2)))
    # slots 2 and 4 share a variable: |g_12|^2 -> 1/2, |g_11|^2 -> 1/2, g_22 -> 0
    assert abs(got) < 1e-13
    f2 = CoefficientProduct((coeff(2, 1, 2), coeff(4, 1, 2, True), coeff(1, 1, 1), coeff(1, 1, 1, True)))
    assert abs(webgeo.integrate_cylinder(f2, EdgeTuple((g1, g2, g3, g2))) - 0.25) < 1e-13


def test_cylinder_rejects_non_nice(fork):
    f = CoefficientProduct.one()
    with pytest.raises(InputError):
        webgeo.integrate_cylinder(f, fork)
    with pytest.raises(InputError):
        webgeo.mc_cylinder_expect(f, EdgeTuple(fork.paths[:1]), 10, 0)


def test_mc_determinism_and_constant():
    e = poly([[0, 0], [1, 1]], [0, 1])
    t = EdgeTuple((e, e))
    f = CoefficientProduct((coeff(1, 1, 1), coeff(2, 1, 1, True)))
    a = webgeo.mc_cylinder_expect(f, t, 1000, 5)
    b = webgeo.mc_cylinder_expect(f, t, 1000, 5)
    assert a.estimate == b.estimate and a.stderr == b.stderr
    one = webgeo.mc_cylinder_expect(CoefficientProduct.one(), t, 1000, 5)
    assert one.estimate == 1 and one.stderr == 0


def test_json_round_trip_and_errors(tmp_path):
    w = webgeo.standard_web(2)
    doc = webgeo.web_to_dict(w, HALF4)
    w2, labels = webgeo.web_from_dict(json.loads(json.dumps(doc)))
    assert labels == HALF4 and w2.tail == w.tail and webgeo.regular_sequence(w2) == webgeo.regular_sequence(w)
    bad = json.loads(json.dumps(doc))
    bad["paths"][2]["params"][3] = "x"
    with pytest.raises(InputError, match=r"paths\[2\]\.params\[3\]"):
        webgeo.web_from_dict(bad)
    bad = json.loads(json.dumps(doc))
    del bad["paths"][1]["vertices"]
    with pytest.raises(InputError, match=r"paths\[1\]\.vertices"):
        webgeo.web_from_dict(bad)
    bad = json.loads(json.dumps(doc))
    bad["tail"]["splittings"][1] = ["1100", "0110"]
    with pytest.raises(InputError, match=r"tail\.splittings\[1\]"):
        webgeo.web_from_dict(bad)
    bad = json.loads(json.dumps(doc))
    bad["labels"][0] = "1/3"
    with pytest.raises(InputError, match=r"labels\[0\]"):
        webgeo.web_from_dict(bad)
    with pytest.raises(InputError, match="<root>"):
        webgeo.load_web("{not json")
