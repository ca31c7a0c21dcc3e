import math

import pytest
from hypothesis import assume, given, strategies as st

from tfiv.errors import DegenerateCase, DomainError
from tfiv.statistics import (
    CoreStats,
    IVSummary,
    core_stats_from_summary,
    t_squared_identity,
)

# A summary whose var_beta is the delta-method value
# (var_rf - 2 b cov + b^2 var_pi) / pi^2 at b = beta_iv_hat, so the
# t^2 identity is exact algebra on it.
WORKED = IVSummary(
    beta_iv_hat=3.2,
    var_beta=18.56 / 9.0,
    pi_hat=3.0,
    var_pi=1.0,
    var_rf=16.0,
    cov_rf_fs=1.2,
)


def test_worked_example_core_stats():
    cs = core_stats_from_summary(WORKED)
    assert math.isclose(cs.t, 2.2283440581246223, rel_tol=1e-14)
    assert math.isclose(cs.t_ar, 2.4, rel_tol=1e-14)
    assert cs.f == 3.0
    assert math.isclose(cs.rho_hat, 0.3, rel_tol=1e-14)
    assert cs.F == 9.0
    rhs = t_squared_identity(cs.t_ar, cs.f, cs.rho_hat)
    assert math.isclose(cs.t * cs.t, rhs, rel_tol=1e-12)
    # 5.76 / 1.16 by hand
    assert math.isclose(rhs, 4.9655172413793105, rel_tol=1e-12)


def test_worked_example_nonzero_null():
    # Shifting the null changes t_ar and rho_hat but var_beta stays pinned to
    # beta_iv_hat, so the identity must still close.  This null makes
    # cov_rf_fs - b0 var_pi vanish, so rho_hat = 0.
    s = IVSummary(
        beta_iv_hat=3.2,
        var_beta=18.56 / 9.0,
        pi_hat=3.0,
        var_pi=1.0,
        var_rf=16.0,
        cov_rf_fs=1.2,
        beta_null=1.2,
    )
    cs = core_stats_from_summary(s)
    assert cs.rho_hat == 0.0
    assert math.isclose(cs.t_ar, 6.0 / math.sqrt(14.56), rel_tol=1e-14)
    rhs = t_squared_identity(cs.t_ar, cs.f, cs.rho_hat)
    assert math.isclose(cs.t * cs.t, rhs, rel_tol=1e-12)


summaries = st.tuples(
    st.floats(-5.0, 5.0),              # beta_iv_hat
    st.floats(-3.0, 3.0),              # beta_null
    st.floats(0.1, 10.0),              # pi_hat magnitude
    st.floats(0.05, 4.0),              # var_pi
    st.floats(0.05, 4.0),              # var_rf
    st.floats(-0.99, 0.99),            # cov as a fraction of the PSD bound
    st.booleans(),                     # sign of pi_hat
)


@given(summaries)
def test_identity_exact_for_delta_method_variance(params):
    b_hat, b0, pi_mag, var_pi, var_rf, cov_frac, flip = params
    pi_hat = -pi_mag if flip else pi_mag
    cov = cov_frac * math.sqrt(var_rf * var_pi)
    var_beta = (var_rf - 2.0 * b_hat * cov + b_hat * b_hat * var_pi) / (
        pi_hat * pi_hat
    )
    assume(var_beta > 1e-8)
    var_ar = var_rf - 2.0 * b0 * cov + b0 * b0 * var_pi
    assume(var_ar > 1e-8)
    s = IVSummary(
        beta_iv_hat=b_hat,
        var_beta=var_beta,
        pi_hat=pi_hat,
        var_pi=var_pi,
        var_rf=var_rf,
        cov_rf_fs=cov,
        beta_null=b0,
    )
    cs = core_stats_from_summary(s)
    denom = (cs.f - cs.rho_hat * cs.t_ar) ** 2 + (
        1.0 - cs.rho_hat * cs.rho_hat
    ) * cs.t_ar * cs.t_ar
    assume(denom > 1e-8 * cs.F)
    rhs = t_squared_identity(cs.t_ar, cs.f, cs.rho_hat)
    assert math.isclose(cs.t * cs.t, rhs, rel_tol=1e-10, abs_tol=1e-12)


@given(st.floats(-8.0, 8.0), st.floats(-8.0, 8.0), st.floats(-1.0, 1.0))
def test_identity_sign_invariances(t_ar, f, rho):
    assume(abs(f) > 1e-3)
    denom = (f - rho * t_ar) ** 2 + (1.0 - rho * rho) * t_ar * t_ar
    assume(denom > 1e-10)
    base = t_squared_identity(t_ar, f, rho)
    # (t_ar, f) -> (-t_ar, -f) and (t_ar, rho) -> (-t_ar, -rho) both preserve
    # t^2; composing them flips f and rho together.
    assert t_squared_identity(-t_ar, -f, rho) == base
    assert t_squared_identity(-t_ar, f, -rho) == base
    assert t_squared_identity(t_ar, -f, -rho) == base


def test_identity_rejects_bad_arguments():
    for bad in (math.nan, math.inf, -math.inf):
        with pytest.raises(DomainError):
            t_squared_identity(bad, 2.0, 0.1)
        with pytest.raises(DomainError):
            t_squared_identity(1.0, bad, 0.1)
    with pytest.raises(DomainError):
        t_squared_identity(1.0, 2.0, 1.5)
    with pytest.raises(DomainError):
        t_squared_identity(1.0, 0.0, 0.1)


def test_identity_vanishing_denominator():
    # At rho = 1 and f = t_ar the denominator is exactly zero: infinite t.
    with pytest.raises(DegenerateCase):
        t_squared_identity(2.0, 2.0, 1.0)


def test_summary_validates_covariance_matrix():
    with pytest.raises(DomainError):
        IVSummary(
            beta_iv_hat=1.0,
            var_beta=1.0,
            pi_hat=1.0,
            var_pi=1.0,
            var_rf=4.0,
            cov_rf_fs=2.1,
        )
    for field, value in (
        ("var_beta", 0.0),
        ("var_pi", -1.0),
        ("var_rf", 0.0),
    ):
        kwargs = dict(
            beta_iv_hat=1.0,
            var_beta=1.0,
            pi_hat=1.0,
            var_pi=1.0,
            var_rf=1.0,
            cov_rf_fs=0.0,
        )
        kwargs[field] = value
        with pytest.raises(DegenerateCase):
            IVSummary(**kwargs)
    with pytest.raises(DomainError):
        IVSummary(
            beta_iv_hat=math.nan,
            var_beta=1.0,
            pi_hat=1.0,
            var_pi=1.0,
            var_rf=1.0,
            cov_rf_fs=0.0,
        )


def test_core_stats_degenerate_cases():
    with pytest.raises(DegenerateCase):
        core_stats_from_summary(
            IVSummary(
                beta_iv_hat=1.0,
                var_beta=1.0,
                pi_hat=0.0,
                var_pi=1.0,
                var_rf=1.0,
                cov_rf_fs=0.0,
            )
        )
    # On the PSD boundary the null b0 = 2 zeroes the AR contrast variance.
    with pytest.raises(DegenerateCase):
        core_stats_from_summary(
            IVSummary(
                beta_iv_hat=1.0,
                var_beta=1.0,
                pi_hat=1.0,
                var_pi=1.0,
                var_rf=4.0,
                cov_rf_fs=2.0,
                beta_null=2.0,
            )
        )


def test_core_stats_boundary_rho_is_clamped_not_rejected():
    # Same boundary matrix, but a null that keeps var_ar positive; the
    # implied correlation is exactly +-1 and must survive the clamp.
    cs = core_stats_from_summary(
        IVSummary(
            beta_iv_hat=1.0,
            var_beta=1.0,
            pi_hat=1.0,
            var_pi=1.0,
            var_rf=4.0,
            cov_rf_fs=2.0,
            beta_null=1.0,
        )
    )
    assert cs.rho_hat == 1.0


def test_core_stats_container_validation():
    with pytest.raises(DomainError):
        CoreStats(t=1.0, t_ar=1.0, f=2.0, rho_hat=1.5, F=4.0)
    with pytest.raises(DomainError):
        CoreStats(t=1.0, t_ar=1.0, f=2.0, rho_hat=0.5, F=4.0001)
