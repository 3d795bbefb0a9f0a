import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annealdp.pbf import Poly
from annealdp.quadratize import (
    deduction_reduce,
    elc_reduce,
    min_over_aux,
    ntr_reduce,
    ptr_reduce,
    quadratize_full,
    reduce_by_substitution,
    substitution_gadget,
)

x = Poly.variable


def assignments(vars_):
    vars_ = sorted(vars_)
    for bits in itertools.product((0, 1), repeat=len(vars_)):
        yield dict(zip(vars_, bits))


def exact_min(p: Poly) -> float:
    return min(p.evaluate(a) for a in assignments(p.variables()))


def argmin_set(p: Poly) -> set[tuple[int, ...]]:
    best = exact_min(p)
    out = set()
    for a in assignments(p.variables()):
        if p.evaluate(a) == pytest.approx(best, abs=1e-9):
            out.add(tuple(a[v] for v in sorted(a)))
    return out


# Five-constraint toy problem used across the reduction examples:
# (x1+x2+x3-1)^2 + (x1 x4 + x2 x5 - x3)^2 + (x1 + 2 x2 - x3 - 2 x4)^2
def five_var_constraint_poly() -> Poly:
    c1 = x(1) + x(2) + x(3) - 1
    c2 = x(1) * x(4) + x(2) * x(5) - x(3)
    c3 = x(1) + 2 * x(2) - x(3) - 2 * x(4)
    return c1 * c1 + c2 * c2 + c3 * c3


class TestFiveVarExpansion:
    def test_multilinear_expansion_frozen(self):
        # Expanded by hand; the quartic cross term is 2 x1 x2 x4 x5 and the
        # two cubics are -2 x1 x3 x4 and -2 x2 x3 x5.
        h = five_var_constraint_poly()
        expected = Poly(
            {
                frozenset((1, 2, 4, 5)): 2.0,
                frozenset((1, 3, 4)): -2.0,
                frozenset((2, 3, 5)): -2.0,
                frozenset((2, 3)): -2.0,
                frozenset((1, 2)): 6.0,
                frozenset((1, 4)): -3.0,
                frozenset((2, 4)): -8.0,
                frozenset((2, 5)): 1.0,
                frozenset((2,)): 3.0,
                frozenset((3, 4)): 4.0,
                frozenset((3,)): 1.0,
                frozenset((4,)): 4.0,
                frozenset(): 1.0,
            }
        )
        assert h.approx_eq(expected, tol=1e-12)

    def test_ground_state(self):
        h = five_var_constraint_poly()
        assert exact_min(h) == 0.0
        assert h.evaluate({1: 0, 2: 1, 3: 0, 4: 1, 5: 0}) == 0.0

    def test_naive_global_substitution_is_invalid(self):
        # Dropping every term containing a zero pair lets some states dip
        # to -3 and -2, below the true ground energy 0.
        h = five_var_constraint_poly()
        kept = {
            k: c
            for k, c in h.terms.items()
            if not any({i, j} <= k for i, j in ((1, 2), (2, 3), (1, 3)))
        }
        naive = Poly(kept)
        energies = {naive.evaluate(a) for a in assignments(range(1, 6))}
        assert -3.0 in energies
        assert -2.0 in energies

    def test_term_by_term_deduction_preserves_ground(self):
        h = five_var_constraint_poly()
        reduced = h
        for pair in ((1, 2), (2, 3), (1, 3)):
            reduced = deduction_reduce(reduced, pair, 0)
        assert reduced.degree == 2
        # the quartic becomes its penalty form 2 x1 x2, on top of 6 x1 x2
        assert reduced.coeff(1, 2) == 8.0
        assert exact_min(reduced) == 0.0
        assert reduced.evaluate({1: 0, 2: 1, 3: 0, 4: 1, 5: 0}) == 0.0


class TestSubstitution:
    def test_worked_example(self):
        p = 2 * (x(1) * x(2) * x(3)) + 4 * (x(2) * x(3) * x(4)) - 5 * (x(2) * x(3) * x(5))
        res = reduce_by_substitution(p, (2, 3), gamma=20.0, aux=6)
        a = 6
        expected = (
            2 * (x(1) * x(a))
            + 4 * (x(a) * x(4))
            - 5 * (x(a) * x(5))
            + 20.0 * substitution_gadget(2, 3, a)
        )
        assert res.qubo_poly == expected
        assert res.qubo_poly.degree == 2
        assert res.alloc.aux_vars == (6,)
        assert res.alloc.records[0].method == "substitution"
        assert res.penalties_used == (20.0,)

    def test_argmin_preserved_with_large_gamma(self):
        p = 2 * (x(1) * x(2) * x(3)) + 4 * (x(2) * x(3) * x(4)) - 5 * (x(2) * x(3) * x(5))
        res = reduce_by_substitution(p, (2, 3), gamma=20.0)
        aux = res.alloc.aux_vars[0]
        originals = sorted(p.variables())
        best_reduced: dict[tuple[int, ...], float] = {}
        for a in assignments(originals):
            vals = []
            for bit in (0, 1):
                vals.append(res.qubo_poly.evaluate({**a, aux: bit}))
            best_reduced[tuple(a[v] for v in originals)] = min(vals)
        true_best = exact_min(p)
        reduced_best = min(best_reduced.values())
        assert reduced_best == pytest.approx(true_best)
        winners = {s for s, v in best_reduced.items() if v == pytest.approx(reduced_best)}
        assert winners == argmin_set(p)

    def test_quadratic_input_unchanged(self):
        p = x(0) * x(1) + 3 * x(0)
        with pytest.warns(UserWarning, match="nothing reduced"):
            res = reduce_by_substitution(p, (0, 1), gamma=5.0)
        assert res.qubo_poly == p
        assert res.alloc.aux_vars == ()

    def test_gamma_validation(self):
        p = x(0) * x(1) * x(2)
        with pytest.raises(ValueError):
            reduce_by_substitution(p, (0, 1), gamma=0.0)

    def test_default_gamma_dominates(self):
        p = x(0) * x(1) * x(2) * x(3) - 7 * (x(0) * x(1))
        res = reduce_by_substitution(p, (0, 1))
        assert res.penalties_used[0] == 10.0 * 8.0


class TestNtr:
    def test_cubic_form_frozen(self):
        # -x1 x2 x3 -> 2 xa - xa(x1 + x2 + x3)
        got = ntr_reduce((1, 2, 3), -1.0, aux=4)
        expected = 2 * x(4) - x(4) * (x(1) + x(2) + x(3))
        assert got == expected

    def test_min_over_aux_matches_term(self):
        reduced = ntr_reduce((1, 2, 3), -1.0, aux=4)
        for a in assignments((1, 2, 3)):
            want = -a[1] * a[2] * a[3]
            assert min_over_aux(reduced, (4,), a) == want

    def test_all_ones_needs_aux_on(self):
        reduced = ntr_reduce((1, 2, 3), -1.0, aux=4)
        assert reduced.evaluate({1: 1, 2: 1, 3: 1, 4: 1}) == -1.0
        assert reduced.evaluate({1: 1, 2: 1, 3: 1, 4: 0}) == 0.0

    def test_rejects_positive_and_low_degree(self):
        with pytest.raises(ValueError):
            ntr_reduce((1, 2, 3), 1.0, aux=4)
        with pytest.raises(ValueError):
            ntr_reduce((1, 2), -1.0, aux=4)

    def test_scaling(self):
        reduced = ntr_reduce((0, 1, 2, 3), -2.5, aux=9)
        for a in assignments(range(4)):
            want = -2.5 * a[0] * a[1] * a[2] * a[3]
            assert min_over_aux(reduced, (9,), a) == pytest.approx(want)


class TestPtr:
    def test_cubic_form_frozen(self):
        # x1 x2 x3 -> xa(1 + x1 - x2 - x3) + x2 x3
        got = ptr_reduce((1, 2, 3), 1.0, aux_ids=(4,))
        expected = x(4) * (1 + x(1) - x(2) - x(3)) + x(2) * x(3)
        assert got == expected

    def test_min_over_aux_matches_term(self):
        reduced = ptr_reduce((1, 2, 3), 1.0, aux_ids=(4,))
        for a in assignments((1, 2, 3)):
            want = a[1] * a[2] * a[3]
            assert min_over_aux(reduced, (4,), a) == want

    def test_quintic_needs_three_auxes(self):
        vars5 = (0, 1, 2, 3, 4)
        reduced = ptr_reduce(vars5, 1.5, aux_ids=(5, 6, 7))
        assert reduced.degree == 2
        for a in assignments(vars5):
            want = 1.5 * a[0] * a[1] * a[2] * a[3] * a[4]
            assert min_over_aux(reduced, (5, 6, 7), a) == pytest.approx(want)
        with pytest.raises(ValueError):
            ptr_reduce(vars5, 1.5, aux_ids=(5, 6))

    def test_all_zero_min_is_zero(self):
        reduced = ptr_reduce((1, 2, 3, 4), 3.0, aux_ids=(5, 6))
        assert min_over_aux(reduced, (5, 6), {1: 0, 2: 0, 3: 0, 4: 0}) == 0.0

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            ptr_reduce((1, 2, 3), -1.0, aux_ids=(4,))


class TestElc:
    def test_printed_example(self):
        h = x(1) * x(2) + x(2) * x(3) + x(3) * x(4) - 4 * (x(1) * x(2) * x(3))
        reduced = elc_reduce(h, {1: 1, 2: 0, 3: 0})
        expected = (
            x(1) * x(2) + x(2) * x(3) + x(3) * x(4) + 4 * x(1) - 4 * (x(1) * x(2)) - 4 * (x(1) * x(3))
        )
        assert reduced == expected
        assert reduced.degree == 2

    def test_ground_state_preserved(self):
        h = x(1) * x(2) + x(2) * x(3) + x(3) * x(4) - 4 * (x(1) * x(2) * x(3))
        reduced = elc_reduce(h, {1: 1, 2: 0, 3: 0})
        assert exact_min(h) == -2.0
        assert exact_min(reduced) == -2.0
        assert argmin_set(h) <= argmin_set(reduced) or argmin_set(h) & argmin_set(reduced)

    def test_psi_at_excluded_configuration(self):
        h = -4 * (x(1) * x(2) * x(3))
        reduced = elc_reduce(h, {1: 1, 2: 0, 3: 0})
        psi = reduced - h
        assert psi.evaluate({1: 1, 2: 0, 3: 0}) == 4.0

    def test_parity_rejection(self):
        h = -4 * (x(1) * x(2) * x(3))
        with pytest.raises(ValueError, match="parity"):
            elc_reduce(h, {1: 1, 2: 1, 3: 0})  # two ones vs size three
        h2 = 4 * (x(1) * x(2) * x(3))
        with pytest.raises(ValueError, match="parity"):
            elc_reduce(h2, {1: 1, 2: 0, 3: 0})
        # opposite parity is accepted for positive coefficients
        reduced = elc_reduce(h2, {1: 1, 2: 1, 3: 0})
        assert reduced.coeff(1, 2, 3) == 0.0

    def test_missing_term_rejected(self):
        with pytest.raises(ValueError, match="no term"):
            elc_reduce(x(1) * x(2), {1: 1, 2: 0, 3: 0})


class TestDeduction:
    def test_identity_when_pair_absent(self):
        p = x(1) * x(2) * x(3) + x(4)
        assert deduction_reduce(p, (4, 5), 0) == p

    def test_quadratic_terms_untouched(self):
        p = 6 * (x(1) * x(2)) + 2 * (x(1) * x(2) * x(4) * x(5))
        out = deduction_reduce(p, (1, 2), 0)
        assert out == 8 * (x(1) * x(2))

    def test_value_one_substitution(self):
        # x1 x2 = 1 in the ground state: positive terms just shrink
        p = 3 * (x(1) * x(2) * x(3))
        out = deduction_reduce(p, (1, 2), 1)
        assert out == 3 * x(3)
        # negative terms also need the (1 - x1 x2) penalty
        q = -2 * (x(1) * x(2) * x(3))
        out_q = deduction_reduce(q, (1, 2), 1)
        assert out_q == -2 * x(3) + 2 * (1 - x(1) * x(2))
        # no state dips below the original minimum
        assert exact_min(out_q) >= exact_min(q)

    def test_value_validation(self):
        with pytest.raises(ValueError):
            deduction_reduce(x(1) * x(2) * x(3), (1, 2), 2)


class TestQuadratizeFull:
    def test_quadratic_identity(self):
        p = x(0) * x(1) - 2 * x(2) + 1
        res = quadratize_full(p)
        assert res.qubo_poly == p
        assert res.alloc.aux_vars == ()
        assert res.penalties_used == ()

    def test_sign_driven_method_choice(self):
        p = -1 * (x(0) * x(1) * x(2)) + 2 * (x(3) * x(4) * x(5) * x(6))
        res = quadratize_full(p)
        methods = {r.term: r.method for r in res.alloc.records}
        assert methods[(0, 1, 2)] == "ntr"
        assert methods[(3, 4, 5, 6)] == "ptr"
        # one aux for the cubic, d-2 = 2 for the quartic
        assert len([r for r in res.alloc.records if r.method == "ntr"]) == 1
        assert len([r for r in res.alloc.records if r.method == "ptr"]) == 2
        assert res.qubo_poly.degree == 2

    def test_aux_ids_deterministic_and_disjoint(self):
        p = x(2) * x(5) * x(7) - 3 * (x(0) * x(1) * x(3))
        res = quadratize_full(p)
        assert res.alloc.original_n == 8
        assert res.alloc.aux_vars == (8, 9)
        assert res.alloc.records[0].term == (0, 1, 3)  # sorted term order
        res2 = quadratize_full(p, aux_start=20)
        assert res2.alloc.aux_vars == (20, 21)

    def test_min_over_aux_exactness_small(self):
        p = (
            2.5 * (x(0) * x(1) * x(2) * x(3))
            - 1.5 * (x(1) * x(2) * x(4))
            + 0.5 * x(0)
            - x(3) * x(4)
        )
        res = quadratize_full(p)
        for a in assignments(range(5)):
            assert min_over_aux(res.qubo_poly, res.alloc.aux_vars, a) == pytest.approx(
                p.evaluate(a), abs=1e-9
            )

    def test_min_over_aux_rejects_shared_auxes(self):
        bad = x(0) * x(8) * x(9)
        with pytest.raises(ValueError, match="share"):
            min_over_aux(bad, (8, 9), {0: 1})


@st.composite
def random_pbfs(draw):
    n = draw(st.integers(3, 7))
    n_terms = draw(st.integers(1, 8))
    terms = {}
    for _ in range(n_terms):
        size = draw(st.integers(1, min(5, n)))
        vars_ = draw(st.frozensets(st.integers(0, n - 1), min_size=size, max_size=size))
        coeff = draw(
            st.floats(-5, 5, allow_nan=False).filter(lambda c: abs(c) > 1e-6)
        )
        terms[vars_] = terms.get(vars_, 0.0) + coeff
    return n, Poly(terms)


@settings(max_examples=50, deadline=None)
@given(random_pbfs())
def test_quadratize_full_exact_property(case):
    n, p = case
    res = quadratize_full(p, aux_start=n)
    assert res.qubo_poly.degree <= 2
    for a in assignments(range(n)):
        assert min_over_aux(res.qubo_poly, res.alloc.aux_vars, a) == pytest.approx(
            p.evaluate(a), abs=1e-8
        )
