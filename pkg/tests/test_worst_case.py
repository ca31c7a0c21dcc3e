import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfiv.errors import DomainError
from tfiv.gaussian import std_normal_cdf
from tfiv.size_engine import ThresholdTF, rejection_prob_rho1
from tfiv.worst_case import (
    GridSpec,
    HybridBoundRow,
    WorstCase,
    hybrid_nonexistence_certificate,
    local_max_size,
)

Q95 = 3.8414588206941254
SQRT_Q95 = 1.959963984540054


def test_local_max_size_anchor():
    assert math.isclose(
        local_max_size(10.0, Q95), 0.11313818286955638, rel_tol=1e-12
    )


def test_local_max_size_matches_ridge_evaluator():
    # The closed form is the rho = 1 rejection probability at
    # f0* = F_bar / (sqrt(F_bar) + sqrt(crit)).
    for f_threshold, crit in ((10.0, Q95), (30.0, Q95), (10.0, 2.5)):
        f0_star = f_threshold / (math.sqrt(f_threshold) + math.sqrt(crit))
        direct = rejection_prob_rho1(
            ThresholdTF(crit=crit, f_threshold=f_threshold), f0_star
        )
        assert math.isclose(local_max_size(f_threshold, crit), direct, rel_tol=1e-12)


@given(st.floats(1.0, 200.0), st.floats(0.5, 15.0))
@settings(max_examples=60, deadline=None)
def test_local_max_size_monotone(f_threshold, crit):
    base = local_max_size(f_threshold, crit)
    assert local_max_size(f_threshold * 1.1, crit) < base
    assert local_max_size(f_threshold, crit * 1.1) < base


def test_local_max_size_limits():
    # f_threshold -> infinity: one-sided tail 1 - Phi(sqrt(crit))
    assert math.isclose(
        local_max_size(1e8, Q95), 1.0 - std_normal_cdf(SQRT_Q95), rel_tol=1e-3
    )
    # crit -> infinity: both terms become the F-screen tail
    assert math.isclose(
        local_max_size(10.0, 1e6),
        2.0 * (1.0 - std_normal_cdf(math.sqrt(10.0))),
        rel_tol=1e-2,
    )
    with pytest.raises(DomainError):
        local_max_size(0.0, Q95)
    with pytest.raises(DomainError):
        local_max_size(10.0, -1.0)


def test_grid_spec_validation():
    GridSpec()  # defaults are valid
    with pytest.raises(DomainError):
        GridSpec(n_rho=99, n_ef=201)
    with pytest.raises(DomainError):
        GridSpec(n_rho=201, n_ef=50)
    with pytest.raises(DomainError):
        GridSpec(ef_min=5.0, ef_max=2.0)
    with pytest.raises(DomainError):
        GridSpec(ef_min=0.5, ef_max=400.0)


def test_worst_case_container_fields():
    wc = WorstCase(max_prob=0.1, arg_rho=1.0, arg_f0=2.0, certified_tol=1e-4)
    assert wc.max_prob == 0.1 and wc.arg_rho == 1.0


def test_hybrid_certificate_rows():
    rows = hybrid_nonexistence_certificate(Q95, [2.0, 10.0, 100.0, 1e4])
    assert [r.f_threshold for r in rows] == [2.0, 10.0, 100.0, 1e4]
    alpha = 2.0 * std_normal_cdf(-SQRT_Q95)
    for row in rows:
        assert isinstance(row, HybridBoundRow)
        assert math.isclose(row.alpha, alpha, rel_tol=1e-12)
        assert row.bound > alpha
        assert row.exceeds
        # the bound is itself a lower bound on the hybrid's ridge size
        direct = rejection_prob_rho1(
            ThresholdTF(crit=Q95, f_threshold=row.f_threshold), row.f0_star
        )
        assert row.bound <= direct + row.alpha + 1e-12


def test_hybrid_certificate_bound_decreases_to_alpha():
    rows = hybrid_nonexistence_certificate(Q95, list(np.geomspace(2.0, 1e6, 30)))
    bounds = [r.bound for r in rows]
    assert all(b1 > b2 for b1, b2 in zip(bounds, bounds[1:]))
    assert bounds[-1] - rows[-1].alpha < 1e-3


def test_hybrid_certificate_validation():
    with pytest.raises(DomainError):
        hybrid_nonexistence_certificate(2.5, [10.0])  # not the 5% case
    with pytest.raises(DomainError):
        hybrid_nonexistence_certificate(Q95, [])
    with pytest.raises(DomainError):
        hybrid_nonexistence_certificate(Q95, [1.0])  # below the validity cut
    with pytest.raises(DomainError):
        hybrid_nonexistence_certificate(Q95, [10.0, math.inf])
