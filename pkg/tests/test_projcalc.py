import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinweb import projcalc, su2rep
from spinweb.errors import DomainError, InputError, UnsupportedInputError
from spinweb.projcalc import DecaySchedule, FilterDescriptor, RepTuple
from spinweb.splitcore import Splitting, coarsen, max_splitting, project_tuple, random_splitting

HALF4 = RepTuple.parse("1/2,1/2,1/2,1/2")
V1 = Splitting.of("1100", "0011")
V2 = Splitting.of("1010", "0101")

# frozen oracle values
P1P2_ENTRY = Fraction(1, 216)
DEFLATED_POWERS = [1 / 3, 1 / 27, 1 / 243]  # ||(P1' P2')^k||, ratio 1/9 per power


def small_rep_and_splitting(draw_seed):
    rng = random.Random(draw_seed)
    n = rng.randint(1, 4)
    while True:
        ts = [rng.randint(0, 2) for _ in range(n)]
        if math.prod(t + 1 for t in ts) <= 16:
            break
    return RepTuple(tuple(su2rep.Spin(t) for t in ts)), random_splitting(n, rng), rng


def exact_pv_entry(V, i, m, j, n):
    """Entry of P_V for four spin-1/2 slots from the pair-moment closed form.

    Each block of V has two slots, so the entry is a product of one pair
    moment per block."""
    out = Fraction(1)
    for a, b in V.blocks():
        out *= su2rep.pair_moment(i[a], j[a], i[b], j[b], m[a], n[a], m[b], n[b])
    return out


def test_lemma_entry_exact_oracle():
    row = ((1, 1, 1, 1), (1, 1, 1, 1))
    col = ((1, 1, 1, 2), (1, 2, 1, 1))
    total = Fraction(0)
    for mid in itertools.product((1, 2), repeat=8):
        k, l = mid[:4], mid[4:]
        total += exact_pv_entry(V1, row[0], row[1], k, l) * exact_pv_entry(V2, k, l, col[0], col[1])
    assert total == P1P2_ENTRY


def test_lemma_entry_numeric():
    prod = projcalc.projector_PV(HALF4, V1) @ projcalc.projector_PV(HALF4, V2)
    val = prod.entry((1, 1, 1, 1), (1, 1, 1, 1), (1, 1, 1, 2), (1, 2, 1, 1))
    assert abs(val - float(P1P2_ENTRY)) < 1e-12
    assert projcalc.projector_P0(HALF4).entry((1, 1, 1, 1), (1, 1, 1, 1), (1, 1, 1, 2), (1, 2, 1, 1)) == 0


def test_projector_entries_match_closed_form():
    p = projcalc.projector_PV(HALF4, V1).matrix
    for idx in itertools.islice(itertools.product((1, 2), repeat=16), 0, None, 997):
        i, m, j, n = idx[:4], idx[4:8], idx[8:12], idx[12:]
        r = projcalc.y_index(HALF4, i, m)
        c = projcalc.y_index(HALF4, j, n)
        assert abs(p[r, c] - float(exact_pv_entry(V1, i, m, j, n))) < 1e-12


def test_two_slot_grid_oracle():
    # brute force over a product grid of two independent variables
    rep = RepTuple.parse("1/2,1")
    rule = su2rep.quadrature_rule(4)
    g = rule.elements
    r1 = su2rep.spin_rep(rep.spins[0], g)
    r2 = su2rep.spin_rep(rep.spins[1], g)
    a = np.einsum("n,nab,ncd->acbd", rule.weights, r1.conj(), r1).reshape(4, 4)
    b = np.einsum("n,nab,ncd->acbd", rule.weights, r2.conj(), r2).reshape(9, 9)
    # reorder (i1 m1)(i2 m2) -> (i1 i2)(m1 m2)
    full = np.einsum("abcd,efgh->aebfcgdh", a.reshape(2, 2, 2, 2), b.reshape(3, 3, 3, 3)).reshape(36, 36)
    got = projcalc.projector_PV(rep, max_splitting(2), "quadrature").matrix
    assert np.abs(full - got).max() < 1e-13
    # shared variable: direct integral of the tensor representation
    rr = projcalc._batch_kron([r1, r2])
    shared = np.einsum("n,nab,ncd->acbd", rule.weights, rr.conj(), rr).reshape(36, 36)
    got = projcalc.projector_PV(rep, Splitting.of("11"), "quadrature").matrix
    assert np.abs(shared - got).max() < 1e-13


def test_p0_closed_form():
    p0 = projcalc.projector_P0(HALF4)
    assert abs(np.trace(p0.matrix) - 1) < 1e-14
    for engine in ("lie_kernel", "quadrature"):
        assert np.abs(p0.matrix - projcalc.projector_PV(HALF4, max_splitting(4), engine).matrix).max() < 1e-10


def test_ranks_and_intersection():
    p1 = projcalc.projector_PV(HALF4, V1)
    p2 = projcalc.projector_PV(HALF4, V2)
    assert p1.rank == 4 and p2.rank == 4
    inter = projcalc.intersection_projector([p1, p2])
    assert inter.rank == 1
    assert np.abs(inter.matrix - projcalc.projector_P0(HALF4).matrix).max() < 1e-10
    assert projcalc.spectral_gap([p1, p2]) >= 0.1


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_projector_properties(seed):
    rep, V, _ = small_rep_and_splitting(seed)
    p = projcalc.projector_PV(rep, V).matrix
    assert np.abs(p - p.conj().T).max() < 1e-10
    assert np.abs(p @ p - p).max() < 1e-10
    assert abs(projcalc.op_norm(p) - 1) < 1e-10
    p0 = projcalc.projector_P0(rep).matrix
    assert np.abs(p0 @ p - p0).max() < 1e-9


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_engines_agree(seed):
    rep, V, _ = small_rep_and_splitting(seed)
    a = projcalc.projector_PV(rep, V, "lie_kernel").matrix
    b = projcalc.projector_PV(rep, V, "quadrature").matrix
    assert np.abs(a - b).max() < 1e-10


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_order_relation(seed):
    rep, V, rng = small_rep_and_splitting(seed)
    W = coarsen(V, rng)  # W <= V
    pv = projcalc.projector_PV(rep, V).matrix
    pw = projcalc.projector_PV(rep, W).matrix
    assert np.abs(pv @ pw - pv).max() < 1e-9
    assert np.abs(pw @ pv - pv).max() < 1e-9


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_range_is_invariant(seed):
    rep, V, rng = small_rep_and_splitting(seed)
    p = projcalc.projector_PV(rep, V).matrix
    y = p @ np.random.default_rng(seed).normal(size=p.shape[0])
    g = su2rep.sample_haar(np.random.default_rng(seed + 1), size=rep.n)
    act = projcalc.double_rep(rep, project_tuple(V, list(g))).matrix
    assert np.linalg.norm(act @ y - y) < 1e-9


def test_dimension_cap():
    rep = RepTuple.parse("3/2,3/2,3/2,1/2")  # dim X = 128
    with pytest.raises(DomainError):
        projcalc.projector_PV(rep, max_splitting(4))
    with pytest.raises(DomainError):
        projcalc.projector_P0(rep)


def test_non_separable_rejected():
    with pytest.raises(UnsupportedInputError):
        projcalc.q_operator(lambda g: g)
    with pytest.raises(UnsupportedInputError):
        projcalc.SeparableOperator(HALF4, ())


def test_zero_descriptor():
    q = projcalc.q_operator(projcalc.zero_descriptor(HALF4))
    assert np.abs(q.matrix).max() == 0


@pytest.mark.parametrize(
    "spins, V, q",
    [
        ("1/2,1/2,1/2,1/2", V1, 1),
        ("1/2,1/2,1/2,1/2", V2, 4),
        ("1,1", Splitting.of("11"), 2),
        ("1/2,1,3/2", Splitting.of("111"), 1),
        ("1/2,1/2", Splitting.of("10", "01"), 1),
    ],
)
def test_filter_norm_formula(spins, V, q):
    fd = FilterDescriptor(RepTuple.parse(spins), V, q)
    d, d0 = fd.block_dims
    expected = math.sqrt(1 - d0 / d)
    assert abs(projcalc.frobenius_norm(projcalc.filter_descriptor(fd)) - expected) < 1e-10
    c, resid = projcalc.sandwich_coefficient(projcalc.degeneracy_filter_operator(fd), fd.rep)
    assert abs(c - expected**2) < 1e-10 and resid < 1e-10


def test_sandwich_with_witness_block():
    fd = FilterDescriptor(HALF4, V1, 1)
    c, _ = projcalc.sandwich_coefficient(projcalc.degeneracy_filter_operator(fd), HALF4)
    assert abs(c - 0.75) < 1e-12


def test_filter_matches_direct_integral():
    fd = FilterDescriptor(RepTuple.parse("1/2,1/2"), Splitting.of("11"), 1)
    pi0 = projcalc.trivial_isotypic_projector(fd.rep.spins)
    rule = su2rep.quadrature_rule(4)
    d = projcalc._batch_kron([rule.elements, rule.elements]) - pi0
    direct = np.einsum("n,nab,ncd->acbd", rule.weights, d.conj(), d).reshape(16, 16)
    assert np.abs(direct - projcalc.degeneracy_filter_operator(fd).matrix).max() < 1e-13


def test_product_limit_alternating():
    p1 = projcalc.projector_PV(HALF4, V1)
    p2 = projcalc.projector_PV(HALF4, V2)
    rep = projcalc.product_limit({1: p1, 2: p2}, itertools.cycle([1, 2]), tol=1e-10, max_iter=200)
    assert rep.converged and rep.final_error < 1e-10
    assert abs(rep.contraction - 1 / 3) < 1e-10
    assert all(b <= a + 1e-12 for a, b in zip(rep.norms, rep.norms[1:]))
    assert all(n <= b + 1e-12 for n, b in zip(rep.norms, rep.bounds))
    assert np.abs(rep.limit.matrix - projcalc.projector_P0(HALF4).matrix).max() < 1e-9


def test_product_limit_trivial_cases():
    p = np.diag([1.0, 1.0, 0.0, 0.0])
    q = np.diag([1.0, 0.0, 1.0, 0.0])
    rep = projcalc.product_limit([p], itertools.repeat(0), max_iter=10)
    assert rep.converged and rep.iterations == 1 and np.allclose(rep.limit, p)
    rep = projcalc.product_limit([p, q], itertools.cycle([0, 1]), max_iter=10)
    assert rep.converged and rep.iterations == 2 and np.allclose(rep.limit, p * q)


def test_product_limit_reports_non_convergence():
    p = np.diag([1.0, 1.0, 0.0, 0.0])
    q = np.diag([1.0, 0.0, 1.0, 0.0])
    rep = projcalc.product_limit([p, q], itertools.repeat(0), max_iter=10)
    assert not rep.converged


def test_product_limit_rejects_non_projectors():
    with pytest.raises(DomainError):
        projcalc.product_limit([np.array([[1.0, 1.0], [0.0, 1.0]])], [0])


def test_deflated_powers_never_vanish():
    p1 = projcalc.projector_PV(HALF4, V1)
    p2 = projcalc.projector_PV(HALF4, V2)
    norms = projcalc.deflated_power_norms(p1, p2, 50)
    assert np.allclose(norms[:3], DEFLATED_POWERS, rtol=1e-9)
    assert all(x > 0 for x in norms)
    assert all(b <= a for a, b in zip(norms, norms[1:]))
    acc = np.eye(256)
    p0 = projcalc.projector_P0(HALF4).matrix
    step = (p1 @ p2).matrix
    for _ in range(50):
        acc = acc @ step
        assert np.abs(acc - p0).max() > 0


@settings(max_examples=20)
@given(st.integers(0, 10**6), st.integers(2, 4))
def test_deflated_running_product_monotone(seed, count):
    rng = np.random.default_rng(seed)
    projs = []
    for _ in range(count):
        a = rng.normal(size=(6, 3)) + 1j * rng.normal(size=(6, 3))
        common = np.eye(6)[:, :1]
        basis, _ = np.linalg.qr(np.hstack([common, a[:, : rng.integers(1, 3)]]))
        projs.append(basis @ basis.conj().T)
    stream = rng.integers(0, count, size=60).tolist()
    rep = projcalc.product_limit(projs, stream, tol=1e-12, max_iter=60)
    assert all(b <= a + 1e-12 for a, b in zip(rep.norms, rep.norms[1:]))


def test_ideal_decay_law():
    fd = FilterDescriptor(HALF4, V1, 1)
    res = projcalc.run_decay(DecaySchedule.ideal(fd, 6))
    for k, (s, b) in enumerate(zip(res.norms, res.bounds)):
        assert abs(s - 0.75 ** (k + 1)) < 1e-12
        assert abs(b - 0.75 ** (k + 1)) < 1e-12


def test_decay_with_alternating_gaps():
    fd = FilterDescriptor(HALF4, V1, 1)
    sched = DecaySchedule(fd, [[V2, V1] * 10 for _ in range(5)], 4)
    res = projcalc.run_decay(sched)
    for k, s in enumerate(res.norms):
        assert s <= (0.75 + 0.05) ** (k + 1)
        assert s <= res.bounds[k] + 1e-12


def test_decay_empty_gap():
    fd = FilterDescriptor(HALF4, V1, 1)
    s = projcalc.decay_experiment(DecaySchedule(fd, [[]], 0))
    assert 0 <= s[0] <= 1 + 1e-12


def test_decay_schedule_validation():
    fd = FilterDescriptor(HALF4, V1, 1)
    with pytest.raises(InputError):
        DecaySchedule(fd, [[V1]], 2)
    with pytest.raises(InputError):
        FilterDescriptor(HALF4, V1, 5)


def test_tolerance_split_product():
    eps = projcalc.tolerance_split(0.3, 30)
    assert np.prod([1 + e for e in eps]) < 1.3
    assert all(e > 0 for e in eps)


@settings(max_examples=100)
@given(st.integers(0, 10**6), st.floats(1e-3, 1.0), st.integers(1, 6))
def test_perturbed_product_inequality(seed, eps, m):
    rng = np.random.default_rng(seed)
    A, As, Bs = projcalc.random_perturbation_family(rng, dim=5, count=m, epsilon=eps)
    assert projcalc.product_deviation(A, As, Bs) < eps
