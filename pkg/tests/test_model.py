import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from usc_lab.model import (
    PolicySpec,
    Scenario,
    Storage,
    Technology,
    annualize,
    default_demand,
    default_scenario,
    parse_variant,
    synth_profiles,
    validate_scenario,
    variant_label,
)

from conftest import small_scenario


def amortization_payment(principal, lifetime, rate):
    """Spreadsheet-style oracle: the constant payment that pays off the loan."""
    if rate == 0:
        return principal / lifetime
    lo, hi = 0.0, principal * (1 + rate)
    for _ in range(200):  # bisection on the remaining balance after `lifetime` years
        payment = 0.5 * (lo + hi)
        balance = principal
        for _ in range(int(lifetime)):
            balance = balance * (1 + rate) - payment
        if balance > 0:
            lo = payment
        else:
            hi = payment
    return payment


class TestValidation:
    def test_well_formed_scenario_has_no_violations(self):
        assert validate_scenario(small_scenario(T=24)) == []

    def test_two_hour_scenario_is_valid(self):
        s = Scenario(
            horizon=2,
            demand=[1.0, 2.0],
            technologies=(Technology("gen", "conventional", capacity_cost=10.0),),
        )
        assert validate_scenario(s) == []

    def test_availability_above_one_is_flagged(self):
        s = small_scenario(T=24)
        bad = dataclasses.replace(s.technologies[1], availability=np.full(24, 1.3))
        s = dataclasses.replace(s, technologies=(s.technologies[0], bad))
        codes = [v.code for v in validate_scenario(s)]
        assert codes == ["availability_out_of_range"]

    def test_demand_length_mismatch(self):
        s = Scenario(
            horizon=8,
            demand=np.ones(5),
            technologies=(Technology("gen", "conventional", capacity_cost=10.0),),
        )
        codes = [v.code for v in validate_scenario(s)]
        assert "series_length_mismatch" in codes

    def test_availability_length_mismatch(self):
        s = small_scenario(T=24)
        bad = dataclasses.replace(s.technologies[1], availability=np.full(7, 0.5))
        s = dataclasses.replace(s, technologies=(s.technologies[0], bad))
        assert "series_length_mismatch" in [v.code for v in validate_scenario(s)]

    def test_negative_cost_and_bad_eta(self):
        s = small_scenario(T=24)
        bad_sto = dataclasses.replace(s.storages[0], eta_in=1.4, charge_cost=-1.0)
        s = dataclasses.replace(s, storages=(bad_sto,))
        codes = {v.code for v in validate_scenario(s)}
        assert {"eta_out_of_range", "cost_negative"} <= codes

    def test_policy_phi_out_of_range(self):
        s = small_scenario(T=24, policy=PolicySpec.renewable_share(1, "complete", 1.2))
        assert "phi_out_of_range" in [v.code for v in validate_scenario(s)]

    def test_capacity_target_on_conventional_is_flagged(self):
        s = small_scenario(T=24, policy=PolicySpec.capacity_target({"gas": 10.0}))
        assert "unknown_target_technology" in [v.code for v in validate_scenario(s)]

    def test_validation_is_pure(self):
        s = small_scenario(T=24)
        assert validate_scenario(s) == validate_scenario(s)


class TestAnnualize:
    def test_rate_zero_matches_straight_line(self):
        assert annualize(1300, 25, 0.0, 25) == pytest.approx(77_000.0, abs=1e-9)

    def test_one_year_full_recovery(self):
        assert annualize(400, 1, 0.0, 0.0) == pytest.approx(400_000.0, abs=1e-9)

    def test_five_percent_twenty_years_against_amortization_oracle(self):
        got = annualize(1000, 20, 0.05, 20)
        oracle = 1000.0 * (amortization_payment(1000, 20, 0.05) + 20)
        assert got == pytest.approx(oracle, rel=1e-9)
        assert got == pytest.approx(100_242.59, abs=0.5)

    def test_non_positive_lifetime_rejected(self):
        with pytest.raises(ValueError):
            annualize(100, 0, 0.05)

    @given(
        overnight=st.floats(0, 5000),
        rate=st.floats(0, 0.2),
        fixed_om=st.floats(0, 100),
        lifetime=st.integers(1, 60),
    )
    @settings(max_examples=80, deadline=None)
    def test_monotone_in_overnight_rate_and_fom(self, overnight, rate, fixed_om, lifetime):
        base = annualize(overnight, lifetime, rate, fixed_om)
        assert annualize(overnight + 10, lifetime, rate, fixed_om) >= base - 1e-9
        assert annualize(overnight, lifetime, rate + 0.01, fixed_om) >= base - 1e-9
        assert annualize(overnight, lifetime, rate, fixed_om + 1) >= base - 1e-9


class TestProfiles:
    def test_night_hours_are_zero(self):
        pv = synth_profiles(42, 48)["pv"]
        hod = np.arange(48) % 24
        night = (hod < 6) | (hod > 18)
        assert np.all(pv[night] == 0.0)

    def test_range_and_determinism(self):
        a = synth_profiles(42, 8760)
        b = synth_profiles(42, 8760)
        for key in ("pv", "wind"):
            assert a[key].min() >= 0.0 and a[key].max() <= 1.0
            assert np.array_equal(a[key], b[key])

    def test_different_seeds_differ(self):
        a = synth_profiles(1, 240)
        b = synth_profiles(2, 240)
        assert not np.array_equal(a["wind"], b["wind"])

    def test_short_horizon_rejected(self):
        with pytest.raises(ValueError):
            synth_profiles(1, 12)

    @given(seed=st.integers(0, 2**31 - 1), horizon=st.sampled_from([24, 72, 200, 700]))
    @settings(max_examples=30, deadline=None)
    def test_profiles_always_in_unit_interval(self, seed, horizon):
        p = synth_profiles(seed, horizon)
        assert 0.0 <= p["pv"].min() and p["pv"].max() <= 1.0
        assert 0.0 <= p["wind"].min() and p["wind"].max() <= 1.0


class TestDefaults:
    def test_demand_scales_with_horizon(self):
        d = default_demand(672)
        assert d.sum() == pytest.approx(520e6 * 672 / 8760, rel=1e-12)
        assert d.min() > 0

    def test_default_scenario_validates(self):
        s = default_scenario(horizon=48)
        assert validate_scenario(s) == []
        assert {t.name for t in s.technologies} == {"coal", "ocgt", "pv", "wind"}
        assert s.storages[0].eta_roundtrip == pytest.approx(0.8)

    def test_variant_labels_round_trip(self):
        for family in (1, 2, 3, 4):
            for slcr in ("zero", "proportionate", "complete"):
                assert parse_variant(variant_label(family, slcr)) == (family, slcr)
