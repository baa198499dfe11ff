from fractions import Fraction as F

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import D, G2, M01, M23, POWER, U, X1234, X2044, family, instances, measurable_variables, variables
from quasisure import (
    NEG_INF,
    Closure,
    InconsistentFamilyError,
    InputError,
    MeasureFamily,
    NotIntegrableError,
    PreconditionError,
    RandomVariable,
    SublinearExpectation,
    aggregate,
    build_dominating_partition,
    check_axioms,
    check_conditional_axioms,
    check_consistency,
    check_dominance,
    classical_esssup,
    cond_exp_qs,
    cond_sublinear,
    membership,
    minimal_support,
    qs_equal,
    qs_esssup,
    stabilize,
    sublinear_expectation,
)
from quasisure import oracle
from quasisure.expectation import augmented_samples, qs_leq
from quasisure.space import polar_atoms


def rv(*values):
    return RandomVariable(values)


class TestSublinear:
    def test_examples(self):
        assert sublinear_expectation(X1234, family(*D)) == 4
        assert sublinear_expectation(X1234, family(M01, M23)) == F(7, 2)
        assert sublinear_expectation(RandomVariable.constant(4, F(-3, 7)), family(U, D[2])) == F(-3, 7)

    def test_neg_inf(self):
        fam = family(D[0], D[1])
        assert sublinear_expectation(rv(1, 2, NEG_INF, NEG_INF), fam) == 2
        with pytest.raises(NotIntegrableError, match="not integrable"):
            sublinear_expectation(rv(NEG_INF, 2, 0, 0), fam)

    def test_wrapper(self):
        E = SublinearExpectation(MeasureFamily([M01, M23], names=["a", "b"]))
        assert E(X1234) == F(7, 2) and E.argmax(X1234) == ["b"]
        assert E.conditional(X1234, G2).values == (F(3, 2), F(3, 2), F(7, 2), F(7, 2))


class TestAxioms:
    def test_pass_on_fixtures(self):
        samples = [X1234, X2044, RandomVariable.constant(4, 2)]
        for fam in (family(*D), family(M01, M23), family(U, D[0])):
            report = check_axioms(fam, samples)
            assert report.passed
            assert len(report) == 6

    def test_sublinearity_example(self):
        fam = family(D[0], D[1])
        X, Y = rv(1, 0, 0, 0), rv(0, 1, 0, 0)
        E = SublinearExpectation(fam)
        assert E(X + Y) == 1 and E(X) + E(Y) == 2

    def test_cash_additivity_example(self):
        assert sublinear_expectation(X1234 + 5, family(M01, M23)) == F(17, 2)

    def test_needs_two_samples(self):
        with pytest.raises(InputError):
            check_axioms(family(U), [X1234])


class TestEsssup:
    def test_classical(self):
        assert classical_esssup([rv(1, 0, 0, 0), rv(0, 2, 0, 5)], D[0]).values == (1, 2, 0, 5)
        assert classical_esssup([X1234], U) == X1234
        assert classical_esssup([RandomVariable.constant(4, 2), RandomVariable.constant(4, 7)], U).values == (7,) * 4

    def test_quasi_sure(self):
        fam = family(D[0], D[1])
        dp = build_dominating_partition(fam, G2)
        out = qs_esssup([rv(1, 1, 0, 0), rv(2, 2, 0, 0)], fam, dp)
        assert out[0] == out[1] == 2
        X = rv(3, 3, -1, -1)
        out = qs_esssup([X, -X], fam, dp)
        assert out[0] == out[1] == 3
        assert qs_esssup([X1234], fam, dp) == X1234


class TestAggregate:
    def test_example(self):
        fam = family(D[0], D[1])
        Y = aggregate({0: rv(7, 9, 0, 0), 1: rv(7, 9, 3, 4)}, fam, G2)
        assert Y.values == (7, 9, 3, 4)

    def test_identical(self):
        fam = family(U, D[0])
        Z = rv(1, 1, 5, 5)
        assert aggregate({0: Z, 1: Z}, fam, G2) == Z

    def test_inconsistent(self):
        fam = family(D[0], D[1])
        with pytest.raises(InconsistentFamilyError) as info:
            aggregate({0: rv(7, 9, 0, 0), 1: rv(8, 9, 0, 0)}, fam, G2)
        assert info.value.witness == (0, 1, 0)

    def test_names_and_missing(self):
        fam = MeasureFamily([D[0], D[1]], names=["a", "b"])
        assert aggregate({"a": X1234, "b": X1234}, fam, G2) == X1234
        with pytest.raises(InputError):
            aggregate({"a": X1234}, fam, G2)

    def test_measurability(self):
        with pytest.raises(PreconditionError):
            aggregate({0: X1234}, family(U), G2)


class TestConditional:
    def test_single_measure(self):
        res = cond_exp_qs(X1234, U, family(U), G2)
        assert res.values == (F(3, 2), F(3, 2), F(7, 2), F(7, 2)) and res.polar_mask == frozenset()

    def test_off_support(self):
        res = cond_exp_qs(X1234, M01, family(M01, M23), G2)
        assert res.values == (F(3, 2), F(3, 2), NEG_INF, NEG_INF)

    def test_power_set_returns_x(self):
        fam = family(U, D[0])
        assert cond_exp_qs(X1234, U, fam, POWER).value == X1234
        assert cond_sublinear(X1234, fam, POWER).value == X1234

    def test_sublinear_examples(self):
        assert cond_sublinear(X1234, family(M01, M23), G2).values == (F(3, 2), F(3, 2), F(7, 2), F(7, 2))
        res = cond_sublinear(X1234, family(D[0], D[1]), G2)
        assert res[0] == res[1] == 2
        assert res.polar_mask == {2, 3}

    def test_dominance_example(self):
        fam = family(D[0], M01)
        assert check_dominance(X1234, fam, G2).passed
        assert cond_exp_qs(X1234, D[0], fam, G2)[0] == 1
        assert -cond_sublinear(-X1234, fam, G2)[0] == 1
        assert cond_sublinear(X1234, fam, G2)[0] == F(3, 2)

    def test_dominance_degenerate(self):
        c = RandomVariable.constant(4, 3)
        fam = family(U, D[0], M23)
        assert cond_sublinear(c, fam, G2).value == c
        assert check_dominance(c, fam, G2).passed
        single = family(U)
        assert cond_sublinear(X1234, single, G2) == cond_exp_qs(X1234, U, single, G2)

    def test_membership(self):
        fam = family(D[0], D[1])
        assert membership(X1234, fam) == {"measurable": True, "H": True, "L1": True}
        assert membership(rv(1, 2, NEG_INF, 0), fam)["L1"]
        assert not membership(rv(NEG_INF, 2, 0, 0), fam)["L1"]
        assert not membership(X1234, fam, G2)["measurable"]


class TestConsistency:
    def test_point_masses(self):
        report = check_consistency(family(*D), G2, [X1234])
        assert report.passed
        assert sublinear_expectation(cond_sublinear(X1234, family(*D), G2).value, family(*D)) == 4

    def test_recursivity_failure(self):
        fam = family(U, D[0])
        assert sublinear_expectation(X2044, fam) == F(5, 2)
        assert sublinear_expectation(cond_sublinear(X2044, fam, G2).value, fam) == 3
        report = check_consistency(fam, G2, [X2044])
        w = report["recursivity"].witnesses
        assert (w["E(E_G(X))"], w["E(X)"], w["E_stabilized(X)"]) == (3, F(5, 2), 3)
        assert not report["stability"].passed
        psi = [m for m in stabilize(fam, G2).family if m.weights == (F(1, 2), 0, F(1, 4), F(1, 4))]
        assert psi and psi[0].expect(X2044) == 3

    def test_disjoint_supports(self):
        fam = family(M01, M23)
        assert check_consistency(fam, G2, augmented_samples(fam, G2, [X1234])).passed

    def test_budget_inconclusive(self):
        report = check_consistency(family(U, D[0]), G2, [X2044], budget=3)
        assert report["stability"].witnesses["reason"] == "inconclusive-stability"
        assert report["representation"].verdict.value == "inconclusive"

    def test_conditional_axioms_fixture(self):
        fam = family(U, D[0], M23)
        assert check_conditional_axioms(fam, G2, augmented_samples(fam, G2, [X1234, X2044])).passed


@given(instances(max_atoms=8, max_family=5), st.data())
def test_dual_representation(inst, data):
    sigma, fam = inst
    X = data.draw(variables(sigma.n))
    assert sublinear_expectation(X, fam) == oracle.expectation(X.values, [m.weights for m in fam])


@given(instances(max_atoms=7), st.data())
def test_axioms_hold(inst, data):
    sigma, fam = inst
    samples = [data.draw(variables(sigma.n)) for _ in range(3)]
    assert check_axioms(fam, samples).passed


def _oracle_conditional(X, fam, sigma):
    ws = [m.weights for m in fam]
    blocks = [oracle.to_mask(b) for b in sigma.blocks]
    ublocks = oracle.direct_universal_blocks(sigma.n, blocks, ws)
    supports = [oracle.direct_support(w, ublocks) for w in ws]
    return oracle.oracle_conditional(list(X.values), ws, sigma.n, blocks, supports)


@given(instances(max_atoms=8, max_family=5), st.data())
def test_conditional_equals_pointwise_sup_off_polar(inst, data):
    sigma, fam = inst
    X = data.draw(variables(sigma.n))
    got = cond_sublinear(X, fam, sigma)
    expected = _oracle_conditional(X, fam, sigma)
    polar = polar_atoms(fam)
    assert got.polar_mask >= frozenset()
    for a in range(sigma.n):
        if a not in polar:
            assert got[a] == expected[a]
    # the polar mask really is polar
    assert all(m.mass(got.polar_mask) == 0 for m in fam)


@given(instances(max_atoms=8, max_family=5), st.data())
def test_qs_esssup_minimal_among_measurable_bounds(inst, data):
    sigma, fam = inst
    n, ws = sigma.n, [m.weights for m in fam]
    dp = build_dominating_partition(fam, sigma)
    members = [data.draw(measurable_variables(dp.completion)) for _ in range(data.draw(st.integers(1, 5)))]
    xstar = qs_esssup(members, fam, dp)
    gsets = oracle.generated_sets([oracle.to_mask(b) for b in sigma.blocks])
    usets, polar = oracle.universal_sets(n, gsets, ws), oracle.polar_sets(n, ws)
    ok, why = oracle.esssup_minimal(xstar.values, [m.values for m in members], usets, polar, n, ws)
    assert ok, why


@given(instances(max_atoms=7, max_family=4), st.data())
def test_aggregation_guarantee(inst, data):
    sigma, fam = inst
    dp = build_dominating_partition(fam, sigma)
    Z = data.draw(measurable_variables(dp.completion))
    noise = data.draw(variables(sigma.n))
    indexed = {}
    for i, theta in enumerate(fam):
        S = minimal_support(theta, sigma, dp)
        indexed[i] = RandomVariable(Z[a] if a in S else noise[a] for a in range(sigma.n))
    Y = aggregate(indexed, fam, sigma, dp)
    for i, theta in enumerate(fam):
        assert all(Y[a] == indexed[i][a] for a in range(sigma.n) if theta[a])


@given(instances(max_atoms=7, max_family=4), st.data())
def test_inconsistency_witness_is_genuine(inst, data):
    sigma, fam = inst
    dp = build_dominating_partition(fam, sigma)
    supports = [minimal_support(t, sigma, dp) for t in fam]
    pairs = [(i, j, a) for i in range(len(fam)) for j in range(len(fam)) if i != j
             for a in supports[i] & supports[j] if fam[i][a] > 0]
    assume(pairs)
    i, j, a = data.draw(st.sampled_from(pairs))
    Z = data.draw(measurable_variables(dp.completion))
    block = sigma.block_of(a)
    indexed = {k: Z for k in range(len(fam))}
    indexed[j] = RandomVariable(Z[b] + 1 if b in block else Z[b] for b in range(sigma.n))
    with pytest.raises(InconsistentFamilyError) as info:
        aggregate(indexed, fam, sigma, dp)
    p, q, atom = info.value.witness
    assert atom in supports[p] & supports[q] and fam[p][atom] > 0
    assert indexed[p][atom] != indexed[q][atom]


@given(instances(max_atoms=7, max_family=4), st.data())
def test_conditional_axioms_and_dominance(inst, data):
    sigma, fam = inst
    X = data.draw(variables(sigma.n))
    samples = augmented_samples(fam, sigma, [X, data.draw(variables(sigma.n))])
    assert check_conditional_axioms(fam, sigma, samples).passed
    assert check_dominance(X, fam, sigma).passed


@given(instances(max_atoms=6, max_family=3), st.data())
def test_consistency_both_directions(inst, data):
    sigma, fam = inst
    X = data.draw(variables(sigma.n))
    closure = stabilize(fam, sigma, 500)
    assert closure.status is Closure.FIXPOINT
    E = SublinearExpectation(fam)
    lhs = E(cond_sublinear(X, fam, sigma).value)
    if len(closure.family) == len(fam):
        assert lhs == E(X)
    if lhs != E(X):
        assert len(closure.family) > len(fam)
        assert SublinearExpectation(closure.family)(X) == lhs
    # the stabilised family is recursive
    E2 = SublinearExpectation(closure.family)
    assert E2(cond_sublinear(X, closure.family, sigma).value) == E2(X)


def test_qs_leq_ignores_polar():
    fam = family(D[0], D[1])
    assert not qs_leq(rv(0, 0, 9, 9), rv(0, 0, 0, 0), fam)
    assert qs_equal(rv(1, 2, 3, 4), rv(1, 2, 0, 0), fam)
