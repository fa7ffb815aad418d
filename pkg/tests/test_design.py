"""Inductance-constraint and critical-current sizing checks."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import squidfan as sf
from squidfan.constants import PHI0


def make_design(**overrides) -> sf.CollectionLoopDesign:
    base = dict(ic=300e-6, n=10)
    base.update(overrides)
    return sf.CollectionLoopDesign(**base)


class TestSizeSquid:
    def test_washer_at_unity_screening(self):
        spec = sf.size_squid(300e-6)
        assert spec.l_washer == pytest.approx(3.446389746666667e-12, rel=1e-12)

    def test_total_includes_junction_inductances(self):
        spec = sf.size_squid(300e-6)
        expected = (PHI0 / 300e-6) * (3 * math.pi + 2) / (4 * math.pi)
        assert spec.l_total == pytest.approx(expected, rel=1e-12)
        assert spec.l_total == pytest.approx(6.27e-12, abs=0.01e-12)

    def test_inverse_proportionality(self):
        one = sf.size_squid(150e-6)
        two = sf.size_squid(300e-6)
        assert one.l_washer == pytest.approx(2 * two.l_washer, rel=1e-14)
        assert one.l_total == pytest.approx(2 * two.l_total, rel=1e-14)

    def test_rejects_nonpositive_current(self):
        with pytest.raises(ValueError):
            sf.size_squid(0.0)


class TestAppliedFluxCollection:
    def test_quiet_inputs_apply_nothing(self):
        design = make_design().with_designed_coil()
        assert sf.applied_flux_collection(design, [0.0] * 10) == 0.0

    def test_all_saturated_hits_budget_exactly(self):
        design = make_design().with_designed_coil()
        flux = sf.applied_flux_collection(design, [design.i_sat] * 10)
        assert flux == pytest.approx(0.5, rel=1e-12)

    def test_linear_in_currents(self):
        design = make_design().with_designed_coil()
        half = [design.i_sat] * 5 + [0.0] * 5
        assert sf.applied_flux_collection(design, half) == pytest.approx(0.25, rel=1e-12)

    def test_rejects_oversaturated_input(self):
        design = make_design().with_designed_coil()
        currents = [0.0] * 10
        currents[3] = design.i_sat * 1.01
        with pytest.raises(sf.SaturationError):
            sf.applied_flux_collection(design, currents)

    def test_rejects_wrong_arity(self):
        design = make_design().with_designed_coil()
        with pytest.raises(ValueError):
            sf.applied_flux_collection(design, [0.0] * 9)

    def test_requires_designed_coil(self):
        with pytest.raises(ValueError):
            sf.applied_flux_collection(make_design(), [0.0] * 10)


class TestDesignLdi2Collection:
    def test_round_trip_is_algebraic_identity(self):
        for n in (2, 7, 50):
            design = make_design(n=n).with_designed_coil()
            assert sf.verify_collection_design(design) == pytest.approx(0.5, rel=1e-12)

    def test_reference_sweep_is_strictly_decreasing(self):
        # 300 uA junctions, 10 pH input washers, k = 0.5, saturation at I_c.
        values = [
            sf.design_ldi2_collection(make_design(n=n)) for n in range(2, 101)
        ]
        assert all(b < a for a, b in zip(values, values[1:]))
        assert all(v > 0.0 for v in values)

    def test_large_fan_in_asymptote(self):
        design = make_design(n=10**6)
        asymptote = (
            (0.5 * PHI0 / (design.k1 * design.k2 * design.i_sat)) ** 2
            * (design.l_dc1 / design.l_dc3) / design.l_washer
        )
        assert sf.design_ldi2_collection(design) == pytest.approx(asymptote, rel=1e-3)

    @given(
        st.integers(2, 128),
        st.floats(0.3, 0.9),
        st.floats(50e-6, 500e-6),
        st.floats(0.0, 0.2),
        st.floats(1e-12, 100e-12),
        st.floats(10e-12, 1000e-12),
        st.floats(0.5, 2.0),
    )
    @settings(max_examples=200)
    def test_round_trip_property(self, n, k, ic, alpha, l_dc1, l_dc3, gamma):
        design = sf.CollectionLoopDesign(
            ic=ic, n=n, l_dc1=l_dc1, l_dc3=l_dc3, alpha=alpha,
            k1=k, k2=k, gamma=gamma,
        ).with_designed_coil()
        flux = sf.applied_flux_collection(design, [design.i_sat] * n)
        assert flux == pytest.approx(design.phi_max, rel=1e-12)


class TestThresholdFractionCircuit:
    def test_matches_circuit_free_fraction(self):
        design = make_design().with_designed_coil()
        for bias in (0.5, 0.7, 0.9, 0.99):
            assert sf.threshold_fraction_circuit(design, bias) == pytest.approx(
                sf.point_activity_fraction(bias), rel=1e-9
            )

    def test_independent_of_fan_in(self):
        values = {
            n: sf.threshold_fraction_circuit(make_design(n=n).with_designed_coil(), 0.7)
            for n in (2, 11, 64)
        }
        baseline = values[2]
        assert all(v == pytest.approx(baseline, rel=1e-12) for v in values.values())

    def test_vanishes_at_critical_bias(self):
        design = make_design().with_designed_coil()
        assert sf.threshold_fraction_circuit(design, 1.0 - 1e-12) == pytest.approx(0.0, abs=1e-9)

    def test_rejects_unconstrained_design(self):
        design = make_design().with_designed_coil()
        broken = sf.CollectionLoopDesign(
            ic=design.ic, n=design.n, l_dc1=design.l_dc1, l_dc3=design.l_dc3,
            alpha=design.alpha, k1=design.k1, k2=design.k2,
            l_di1=design.l_di1, l_di2=design.l_di2 * 1.1, gamma=design.gamma,
        )
        with pytest.raises(sf.ConstraintViolationError):
            sf.threshold_fraction_circuit(broken, 0.7)


class TestCrosstalk:
    def test_no_activity_no_crosstalk(self):
        design = make_design().with_designed_coil()
        assert sf.crosstalk_current(design, 0) == 0.0

    def test_exactly_linear_in_active_count(self):
        design = make_design().with_designed_coil()
        single = sf.crosstalk_current(design, 1)
        for p in (2, 3, 7, 10):
            assert sf.crosstalk_current(design, p) == p * single

    def test_against_independent_substitution(self):
        # Oracle: rebuild the induced-current expression step by step
        # from the mutual inductances and loop totals.
        design = make_design(
            ic=300e-6, n=10, l_dc1=10e-12, l_dc3=100e-12, alpha=0.05,
            k1=0.5, k2=0.5, l_di1=1e-9,
        ).with_designed_coil()
        p = 10
        l_dc_tot = 10 * 10e-12 + 1.05 * 100e-12
        l_di_tot = 1e-9 + design.l_di2
        i_sat = 300e-6
        expected = p * (0.5**2 * design.l_di2 * 10e-12) / (l_dc_tot * l_di_tot) * i_sat
        assert sf.crosstalk_current(design, p) == pytest.approx(expected, rel=1e-12)

    def test_rejects_bad_count(self):
        design = make_design().with_designed_coil()
        with pytest.raises(ValueError):
            sf.crosstalk_current(design, 11)
        with pytest.raises(ValueError):
            sf.crosstalk_current(design, -1)


class TestNoCollection:
    def test_single_input_full_coupling(self):
        design = sf.NoCollectionDesign(n=1, k=1.0, ic_dr=300e-6)
        assert sf.design_no_collection(design) == pytest.approx(
            PHI0 / (2 * 300e-6), rel=1e-12
        )

    def test_inverse_in_fan_in(self):
        for n in (1, 3, 17):
            a = sf.design_no_collection(sf.NoCollectionDesign(n=n, k=0.5, ic_dr=300e-6))
            b = sf.design_no_collection(sf.NoCollectionDesign(n=2 * n, k=0.5, ic_dr=300e-6))
            assert b == pytest.approx(a / 2, rel=1e-14)

    def test_matches_shared_current_reduction(self):
        # Segment rule l_dr1 = Phi0/(2 n Ic) makes the general expression
        # collapse to Phi0/(2 n k^2 Ic).
        for n in (1, 2, 10, 100, 1000):
            for k in (0.3, 0.5, 0.7, 1.0):
                for ic in (50e-6, 300e-6, 500e-6):
                    general = sf.design_no_collection(
                        sf.NoCollectionDesign(n=n, k=k, ic_dr=ic)
                    )
                    reduced = PHI0 / (2 * n * k**2 * ic)
                    assert general == pytest.approx(reduced, rel=1e-12)

    def test_smaller_with_higher_current_and_coupling(self):
        lo = sf.design_no_collection(sf.NoCollectionDesign(n=4, k=0.9, ic_dr=500e-6))
        hi = sf.design_no_collection(sf.NoCollectionDesign(n=4, k=0.3, ic_dr=50e-6))
        assert lo < hi


class TestSfqCoupling:
    def test_reference_values(self):
        assert sf.sfq_coupling(2) == 0.5
        assert sf.sfq_coupling(1) == pytest.approx(0.7071067811865476, rel=1e-15)
        assert sf.sfq_coupling(50) == pytest.approx(0.1, rel=1e-15)

    def test_reproduces_single_flux_inductance(self):
        ic = 300e-6
        for n in (1, 2, 5, 17, 100, 1234, 10000):
            k = sf.sfq_coupling(n)
            design = sf.NoCollectionDesign(n=n, k=k, ic_dr=ic, sfq_mode=True)
            assert sf.design_no_collection(design) == pytest.approx(PHI0 / ic, rel=1e-12)


class TestVaryIc:
    def test_sfq_rule_reference_points(self):
        l_di2, ic_di = sf.vary_ic_no_collection(4, 0.5, 300e-6, sfq_mode=True)
        assert ic_di == 300e-6
        assert l_di2 == pytest.approx(PHI0 / 300e-6, rel=1e-14)
        _, ic_di_100 = sf.vary_ic_no_collection(100, 0.5, 300e-6, sfq_mode=True)
        assert ic_di_100 == pytest.approx(300e-6 / 25, rel=1e-14)

    def test_budget_rule_halves_when_fan_in_doubles(self):
        a, _ = sf.vary_ic_no_collection(8, 0.5, 300e-6, ic_di=100e-6)
        b, _ = sf.vary_ic_no_collection(16, 0.5, 300e-6, ic_di=100e-6)
        assert b == pytest.approx(a / 2, rel=1e-15)

    def test_requires_input_current_without_sfq(self):
        with pytest.raises(ValueError):
            sf.vary_ic_no_collection(4, 0.5, 300e-6)

    def test_consistency_report_quantifies_factor_two(self):
        report = sf.sfq_ic_consistency(10, 0.5, 300e-6)
        assert report["ic_di_ratio"] == pytest.approx(2.0, rel=1e-12)
        assert report["ic_di_single_flux_rule"] == pytest.approx(
            2 * report["ic_di_flux_budget_rule"], rel=1e-12
        )
        # The single-flux rule overshoots the half-quantum budget by sqrt(2).
        assert report["achieved_flux_phi0"] == pytest.approx(2**-0.5, rel=1e-12)
        assert report["flux_budget_phi0"] == 0.5


class TestFeasibility:
    def test_flags_sub_tenth_picohenry(self):
        assert sf.check_feasibility(0.05e-12)
        assert not sf.check_feasibility(5e-12)


class TestJsonConfigs:
    def test_collection_round_trip(self):
        design = make_design(n=7).with_designed_coil()
        obj = sf.design_to_json(design)
        assert obj["units"] == "SI"
        rebuilt = sf.collection_design_from_json(obj)
        assert rebuilt == design

    def test_no_collection_round_trip(self):
        design = sf.NoCollectionDesign(n=5, k=0.4, ic_dr=100e-6)
        rebuilt = sf.no_collection_design_from_json(sf.design_to_json(design))
        assert rebuilt == design

    def test_requires_units_tag(self):
        obj = sf.design_to_json(make_design())
        del obj["units"]
        with pytest.raises(ValueError):
            sf.collection_design_from_json(obj)
        obj["units"] = "imperial"
        with pytest.raises(ValueError):
            sf.collection_design_from_json(obj)

    def test_rejects_unknown_fields(self):
        obj = sf.design_to_json(make_design())
        obj["mystery"] = 42
        with pytest.raises(ValueError):
            sf.collection_design_from_json(obj)


class TestValidation:
    def test_collection_design_bounds(self):
        with pytest.raises(ValueError):
            make_design(k1=0.0)
        with pytest.raises(ValueError):
            make_design(k2=1.5)
        with pytest.raises(ValueError):
            make_design(phi_max=0.6)
        with pytest.raises(ValueError):
            make_design(n=0)
        with pytest.raises(ValueError):
            make_design(l_dc1=-1e-12)
        with pytest.raises(ValueError):
            make_design(gamma=0.0)

    def test_no_collection_bounds(self):
        with pytest.raises(ValueError):
            sf.NoCollectionDesign(n=0, k=0.5, ic_dr=300e-6)
        with pytest.raises(ValueError):
            sf.NoCollectionDesign(n=2, k=0.0, ic_dr=300e-6)
        with pytest.raises(ValueError):
            sf.NoCollectionDesign(n=2, k=0.5, ic_dr=-1e-6)

    def test_saturation_current_identity(self):
        design = make_design(gamma=1.5)
        assert design.i_sat == pytest.approx(1.5 * design.ic, rel=1e-15)
