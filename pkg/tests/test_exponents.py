from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aolab.errors import DomainError
from aolab.exponents import (
    THRESHOLDS,
    fractional_onsager_exponent,
    mhd_tradeoff_check,
    onsager_besov_threshold,
    onsager_sobolev_threshold,
    threshold_entry,
)
from aolab.models import ModelKind

BESOV = {
    "euler": F(1, 3),
    "leray_alpha": F(0),
    "euler_alpha": F(1),
    "modified_leray_alpha": F(1),
    "clark_alpha": F(1),
    "mhd_leray_alpha": F(0),
}
SOBOLEV = {
    "euler": (None, F(5, 6)),
    "leray_alpha": (F(5, 2), F(1, 2)),
    "euler_alpha": (F(3, 2), F(-1, 2)),
    "modified_leray_alpha": (F(3, 2), F(-1, 2)),
    "clark_alpha": (F(3, 2), F(-1, 2)),
}


@pytest.mark.parametrize("model", list(BESOV))
def test_besov_table(model):
    b = onsager_besov_threshold(model)
    assert isinstance(b.s, F) and b.s == BESOV[model] and b.strict


@pytest.mark.parametrize("model", list(SOBOLEV))
def test_sobolev_table(model):
    s = onsager_sobolev_threshold(model)
    assert (s.u, s.v) == SOBOLEV[model]
    assert s.strict


def test_mhd_entries():
    b = onsager_besov_threshold("mhd_leray_alpha")
    assert (b.s, b.r) == (0, 0) and str(b.pair) == "s + 2r > 1"
    s = onsager_sobolev_threshold("mhd_leray_alpha")
    assert (s.s, s.r) == (F(1, 2), F(1, 2)) and str(s.pair) == "s + 2r > 5/2"


def test_summary_strings():
    assert threshold_entry("leray_alpha").summary() == "besov: s > 0; sobolev: u H^{5/2}, v H^{1/2}"
    assert threshold_entry("euler").summary() == "besov: s > 1/3; sobolev: v H^{5/6}"


def test_table_covers_every_model():
    assert set(THRESHOLDS) == set(ModelKind)
    with pytest.raises(DomainError):
        threshold_entry("navier_stokes")


def test_leray_gap_between_tables():
    # the H^{1/2} bound on v sits exactly half a derivative above the Besov index 0
    assert onsager_sobolev_threshold("leray_alpha").v - onsager_besov_threshold("leray_alpha").s \
        == F(1, 2)


@pytest.mark.parametrize("theta,gamma,at_most", [
    (F(1, 4), F(1, 6), False),
    (0.25, F(1, 6), False),
    (F(1, 2), F(0), False),
    (F(3, 4), F(0), True),
    (1, F(0), True),
])
def test_fractional_exponent(theta, gamma, at_most):
    e = fractional_onsager_exponent(theta)
    assert e.gamma == gamma and isinstance(e.gamma, F)
    assert e.at_most is at_most


def test_fractional_limit_is_one_third():
    gaps = [F(1, 3) - fractional_onsager_exponent(F(1, 10**k)).gamma for k in range(1, 8)]
    assert all(a > b > 0 for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] == F(2, 3 * 10**7)


@pytest.mark.parametrize("theta", [0, -1, F(-1, 2), float("nan"), float("inf")])
def test_fractional_domain(theta):
    with pytest.raises(DomainError):
        fractional_onsager_exponent(theta)


@given(a=st.fractions(F(1, 1000), 1), b=st.fractions(F(1, 1000), 1))
def test_gamma_nonincreasing(a, b):
    lo, hi = sorted((a, b))
    assert fractional_onsager_exponent(lo).gamma >= fractional_onsager_exponent(hi).gamma


@given(t=st.fractions(F(1, 1000), F(1, 2)))
def test_gamma_satisfies_relation(t):
    assert 3 * fractional_onsager_exponent(t).gamma + 2 * t == 1


def test_gamma_continuous_at_one_half():
    below = fractional_onsager_exponent(F(1, 2) - F(1, 10**9)).gamma
    above = fractional_onsager_exponent(F(1, 2) + F(1, 10**9)).gamma
    assert abs(below - above) < F(1, 10**9)


def test_tradeoff_truth_table():
    s_vals = [F(0), F(1, 4), F(1, 2), F(3, 4), F(1)]
    r_vals = [F(0), F(1, 4), F(1, 2), F(1)]
    for s in s_vals:
        for r in r_vals:
            assert mhd_tradeoff_check(s, r) == (s > 0 and r > 0 and s + 2 * r > 1)
    # equality on the line is excluded
    assert not mhd_tradeoff_check(F(1, 2), F(1, 4))
    assert mhd_tradeoff_check(0.5, 0.25 + 1e-15)
    with pytest.raises(DomainError):
        onsager_besov_threshold("mhd_leray_alpha").admits(F(1))
