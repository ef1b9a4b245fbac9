"""End-to-end counting pipeline.

The worked examples have hand-computable zero sets, so the expected
count tables and weighted totals are frozen here; the full-system
solver count serves as the independent consistency oracle throughout.
"""

import warnings

import numpy as np
import pytest

from fop.errors import NumericalError, ValidationError
from fop.euler import (
    aggregate_stabilized,
    degree_stability_check,
    dimension_audit,
    enumerate_zero_orbits,
    euler_counts,
    invariance_check,
    make_problem,
    make_section,
    perturb,
    section_from_basis,
    validate_properness,
)
from fop.groups import make_group
from fop.reps import make_rep


def _cyclic(n):
    return make_group({"kind": "cyclic", "n": n})


def _weights(group, ws):
    return make_rep(group, {"kind": "weights", "weights": list(ws)})


def _sign_problem(degree=3):
    c2 = _cyclic(2)
    v = _weights(c2, [1])
    return make_problem(c2, v, v, degree)


class TestProblemValidation:
    def test_positive_dimensional_stratum_rejected(self):
        klein = make_group({"kind": "product", "orders": [2, 2]})
        v = _weights(klein, [(1, 0), (0, 1)])
        w = _weights(klein, [(1, 0), (1, 1)])
        with pytest.raises(ValidationError):
            make_problem(klein, v, w, 4)

    def test_low_degree_warns(self):
        c3 = _cyclic(3)
        v = _weights(c3, [1])
        with pytest.warns(UserWarning):
            make_problem(c3, v, v, 2)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            make_problem(c3, v, v, 2, allow_low_degree=True)

    def test_ineffective_action_warns(self):
        c4 = _cyclic(4)
        v = _weights(c4, [2])
        with pytest.warns(UserWarning):
            make_problem(c4, v, v, 4)

    def test_section_must_be_equivariant(self):
        prob = _sign_problem()
        with pytest.raises(ValidationError):
            make_section(prob, [((2,), 0, 1.0)])


class TestWorkedExamples:
    def test_sign_cubic(self):
        prob = _sign_problem()
        sec = make_section(prob, [((1,), 0, 1.0), ((3,), 0, -1.0)])
        rep = euler_counts(prob, sec)
        assert rep.chi([0]) == 1
        assert rep.chi([0, 1]) == 1
        assert rep.total_weighted == 3
        assert rep.oracle_distinct == 3 and rep.consistent
        assert rep.attempts == 0 and not rep.section.perturbed
        assert rep.all_signs_positive

    def test_cyclic_three_quartic(self):
        c3 = _cyclic(3)
        v = _weights(c3, [1])
        prob = make_problem(c3, v, v, 4)
        sec = make_section(prob, [((1,), 0, 1.0), ((4,), 0, -1.0)])
        rep = euler_counts(prob, sec)
        assert rep.chi([0]) == 1
        assert rep.chi([0, 1, 2]) == 1
        assert rep.total_weighted == 4
        assert rep.oracle_distinct == 4 and rep.consistent

    def test_degenerate_cubic_needs_perturbation(self):
        prob = _sign_problem()
        sec = make_section(prob, [((3,), 0, 1.0)])
        counts, degeneracies = enumerate_zero_orbits(prob, sec)
        assert degeneracies and "certificate failed" in degeneracies[0]
        rep = euler_counts(prob, sec)
        assert rep.section.perturbed and rep.attempts >= 1
        assert rep.chi([0]) == 1 and rep.chi([0, 1]) == 1
        assert rep.total_weighted == 3 == rep.oracle_distinct

    def test_fta_counts(self):
        c1 = _cyclic(1)
        v = _weights(c1, [0])
        rng = np.random.Generator(np.random.Philox(key=99))
        for d in (1, 2, 5, 8):
            prob = make_problem(c1, v, v, d)
            terms = [((k,), 0, complex(rng.normal(), rng.normal())) for k in range(d + 1)]
            rep = euler_counts(prob, make_section(prob, terms))
            assert rep.count_table()[0][2] == d
            assert rep.oracle_distinct == d

    def test_orbit_structure(self):
        c3 = _cyclic(3)
        v = _weights(c3, [1])
        prob = make_problem(c3, v, v, 4)
        sec = make_section(prob, [((1,), 0, 1.0), ((4,), 0, -1.0)])
        rep = euler_counts(prob, sec)
        free = next(c for c in rep.strata if c.members == (0,))
        assert len(free.orbits) == 1
        orb = free.orbits[0]
        assert orb.size == 3
        assert orb.sign == 1
        # cube roots of unity; the representative is the lex-smallest
        assert all(abs(abs(p[0]) - 1.0) < 1e-9 for p in orb.points)
        assert min(p[0].real for p in orb.points) == pytest.approx(
            orb.representative[0].real
        )


class TestNegativeStrata:
    def test_overdetermined_stratum_reports_zero(self):
        c2 = _cyclic(2)
        v = _weights(c2, [1])
        w = _weights(c2, [0])
        prob = make_problem(c2, v, w, 2)
        sec = make_section(prob, [((0,), 0, 1.0), ((2,), 0, -1.0)])
        rep = euler_counts(prob, sec)
        full = next(c for c in rep.strata if c.members == (0, 1))
        assert full.zero_dim == -2 and full.chi == 0
        free = next(c for c in rep.strata if c.members == (0,))
        assert free.chi == 1
        assert rep.total_weighted == 2 == rep.oracle_distinct

    def test_zero_on_negative_stratum_is_degenerate(self):
        c2 = _cyclic(2)
        v = _weights(c2, [1])
        w = _weights(c2, [0])
        prob = make_problem(c2, v, w, 2)
        # vanishes at the origin, where the stratum is overdetermined
        sec = make_section(prob, [((2,), 0, 1.0)])
        counts, degeneracies = enumerate_zero_orbits(prob, sec)
        assert any("overdetermined" in d for d in degeneracies)


class TestDegeneracyDetection:
    def test_tangential_pair_flagged(self):
        prob = _sign_problem(5)
        # z (1 - z^2)^2 has double zeros at +1 and -1
        sec = make_section(
            prob, [((1,), 0, 1.0), ((3,), 0, -2.0), ((5,), 0, 1.0)]
        )
        counts, degeneracies = enumerate_zero_orbits(prob, sec)
        assert any("multiplicity" in d for d in degeneracies)
        rep = euler_counts(prob, sec)
        assert rep.section.perturbed
        assert rep.total_weighted == rep.oracle_distinct == 5

    def test_identically_zero_equation_flagged(self):
        klein = make_group({"kind": "product", "orders": [2, 2]})
        v = _weights(klein, [(1, 0), (0, 1)])
        prob = make_problem(klein, v, v, 3, allow_low_degree=True)
        sec = make_section(prob, [((0, 1), 1, 1.0), ((0, 3), 1, -1.0)])
        counts, degeneracies = enumerate_zero_orbits(prob, sec)
        assert any("vanishes identically" in d for d in degeneracies)

    def test_persistent_degeneracy_raises(self):
        prob = _sign_problem()
        sec = make_section(prob, [((3,), 0, 1.0)])
        with pytest.raises(NumericalError):
            euler_counts(prob, sec, auto_perturb=False)


class TestPerturbation:
    def test_deterministic_in_seed(self):
        prob = _sign_problem()
        sec = make_section(prob, [((3,), 0, 1.0)])
        a = perturb(sec, seed=7)
        b = perturb(sec, seed=7)
        c = perturb(sec, seed=8)
        assert np.array_equal(a.poly.coeffs, b.poly.coeffs)
        assert not np.array_equal(a.poly.coeffs, c.poly.coeffs)

    def test_relative_magnitude(self):
        prob = _sign_problem()
        sec = make_section(prob, [((3,), 0, 100.0)])
        p = perturb(sec, seed=3, magnitude=1e-2)
        delta = p.poly - sec.poly
        assert 0 < delta.coeff_norm() < 100.0 * 1e-2 * 10


class TestAggregation:
    def test_sign_cubic_aggregates_are_singletons(self):
        prob = _sign_problem()
        sec = make_section(prob, [((1,), 0, 1.0), ((3,), 0, -1.0)])
        rep = euler_counts(prob, sec)
        assert len(rep.aggregates) == 2
        assert sorted(a.chi_total for a in rep.aggregates) == [1, 1]

    def test_klein_conjugate_axes_merge(self):
        klein = make_group({"kind": "product", "orders": [2, 2]})
        v = _weights(klein, [(1, 0), (0, 1)])
        prob = make_problem(klein, v, v, 3, allow_low_degree=True)
        sec = make_section(
            prob,
            [
                ((1, 0), 0, 1.0),
                ((3, 0), 0, -1.0),
                ((1, 2), 0, -0.3),
                ((0, 1), 1, 1.0),
                ((0, 3), 1, -1.0),
                ((2, 1), 1, 0.2),
            ],
        )
        rep = euler_counts(prob, sec)
        assert rep.chi([0]) == 1
        assert rep.chi([0, 1]) == 1 and rep.chi([0, 2]) == 1
        assert rep.chi([0, 1, 2, 3]) == 1
        assert rep.total_weighted == 9 == rep.oracle_distinct
        # the two axis stabilizers are abstractly the same stabilized type
        merged = [a for a in rep.aggregates if len(a.class_ids) == 2]
        assert len(merged) == 1 and merged[0].chi_total == 2
        assert len(rep.aggregates) == 3


class TestAudits:
    def test_properness_of_sign_cubic(self):
        prob = _sign_problem()
        sec = make_section(prob, [((1,), 0, 1.0), ((3,), 0, -1.0)])
        recs = validate_properness(prob, sec)
        assert recs and all(r.proper for r in recs)

    def test_improper_top_form_detected(self):
        klein = make_group({"kind": "product", "orders": [2, 2]})
        v = _weights(klein, [(1, 0), (0, 1)])
        prob = make_problem(klein, v, v, 3, allow_low_degree=True)
        # second coordinate w - z^2 w: its top form z^2 w shares the
        # zero direction z = 0 with the first equation's top form z^3
        sec = make_section(
            prob,
            [((1, 0), 0, 1.0), ((3, 0), 0, -1.0), ((0, 1), 1, 1.0), ((2, 1), 1, -1.0)],
        )
        recs = validate_properness(prob, sec)
        free = next(r for r in recs if r.members == (0,))
        assert not free.proper

    def test_dimension_audit_passes_and_vacuous_case(self):
        prob = _sign_problem()
        records, ok = dimension_audit(prob)
        assert ok and len(records) == 1
        c1 = _cyclic(1)
        v1 = _weights(c1, [0])
        trivial_prob = make_problem(c1, v1, v1, 2)
        records, ok = dimension_audit(trivial_prob)
        assert ok and records == ()


class TestInvariance:
    def test_seed_independence_and_homotopy(self):
        prob = _sign_problem()
        sec = make_section(prob, [((1,), 0, 1.0), ((3,), 0, -1.0)])
        inv = invariance_check(prob, sec, seeds=range(4))
        assert inv.invariant
        assert inv.tables[0] == ((0, 1), (1, 1))
        assert inv.homotopy_failures == 0
        assert inv.max_match_distance < 0.5

    def test_forced_perturbation_deterministic(self):
        prob = _sign_problem()
        sec = make_section(prob, [((3,), 0, 1.0)])
        a = euler_counts(prob, sec, always_perturb=True, perturb_seed=42)
        b = euler_counts(prob, sec, always_perturb=True, perturb_seed=42)
        assert a.count_table() == b.count_table()
        ra = a.strata[0].orbits[0].representative
        rb = b.strata[0].orbits[0].representative
        assert np.array_equal(ra, rb)


class TestDegreeStability:
    def test_worked_examples_stable(self):
        prob = _sign_problem()
        sec = make_section(prob, [((1,), 0, 1.0), ((3,), 0, -1.0)])
        ok, rd, rd1 = degree_stability_check(prob, sec)
        assert ok
        assert rd.total_weighted == rd1.total_weighted == 3

    def test_degenerate_start_stable(self):
        prob = _sign_problem()
        sec = make_section(prob, [((3,), 0, 1.0)])
        ok, rd, rd1 = degree_stability_check(prob, sec)
        assert ok
        assert rd.total_weighted == rd1.total_weighted == 3


class TestSectionFromBasis:
    def test_generic_combination_counts(self):
        c3 = _cyclic(3)
        v = _weights(c3, [1])
        prob = make_problem(c3, v, v, 4)
        # basis of equivariant maps has degrees 1 and 4
        sec = section_from_basis(prob, [1.0, -1.0])
        rep = euler_counts(prob, sec)
        assert rep.total_weighted == rep.oracle_distinct == 4

    def test_wrong_length_rejected(self):
        prob = _sign_problem()
        with pytest.raises(ValidationError):
            section_from_basis(prob, [1.0, 2.0, 3.0])
