import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from s4rg.exponents import (
    ComplexEigenvalueError,
    MarginalEigenvalueError,
    exponent_set,
    identity_residuals,
    scale_powers,
)


def test_scale_power_examples():
    p, q = scale_powers(4.663, 2.875)
    assert p == pytest.approx(1.110, abs=2e-3)
    assert q == pytest.approx(0.762, abs=5e-4)
    assert scale_powers(4.0) == (1.0, None)
    # ln(4.643)/ln 4 = 1.10753; the quoted 1.107 is a truncation
    assert scale_powers(4.643)[0] == pytest.approx(math.log(4.643) / math.log(4), rel=1e-15)


@pytest.mark.xfail(strict=True, reason="ln(4.663)/ln 4 = 1.11063, 1.3e-4 outside the quoted 1.110 +/- 5e-4")
def test_scale_power_p_tight():
    assert scale_powers(4.663)[0] == pytest.approx(1.110, abs=5e-4)


@pytest.mark.xfail(strict=True, reason="ln(4.643)/ln 4 = 1.10753, 2.9e-5 outside the quoted 1.107 +/- 5e-4")
def test_scale_power_p_nn_tight():
    assert scale_powers(4.643)[0] == pytest.approx(1.107, abs=5e-4)


def test_scale_power_errors():
    for bad in (1.0, 0.5, -3.0):
        with pytest.raises(MarginalEigenvalueError):
            scale_powers(bad)
    with pytest.raises(MarginalEigenvalueError):
        scale_powers(4.0, 0.9)
    with pytest.raises(ComplexEigenvalueError):
        scale_powers(complex(4.0, 0.5))
    assert scale_powers(complex(4.0, 0.0))[0] == 1.0


def test_exponent_set_field_example():
    p, q = scale_powers(4.663, 2.875)
    e = exponent_set(p, q)
    expected = dict(alpha=1.099, beta=0.215, gamma=0.471, delta=3.197, eta=0.953, nu=0.450)
    for k, v in expected.items():
        assert getattr(e, k) == pytest.approx(v, abs=2e-3), k


def test_exponent_set_nu_only():
    e = exponent_set(1.107)
    assert e.nu == pytest.approx(1 / 2.214, rel=1e-15)
    assert e.q is None and e.beta is None and e.delta is None


@pytest.mark.xfail(strict=True, reason="1/(2 * 1.107) = 0.45167, 1.7e-4 outside 0.451 +/- 5e-4")
def test_exponent_set_nu_only_tight():
    assert exponent_set(1.107).nu == pytest.approx(0.451, abs=5e-4)


def test_exponent_set_rationals():
    e = exponent_set(1.0, 0.75)
    assert (e.alpha, e.beta, e.gamma, e.delta, e.eta, e.nu) == (1.0, 0.25, 0.5, 3.0, 1.0, 0.5)


def test_exponent_set_errors():
    with pytest.raises(ValueError):
        exponent_set(0.0)
    with pytest.raises(ValueError):
        exponent_set(1.0, 1.0)


def test_identity_residuals_examples():
    assert np.all(np.abs(identity_residuals(exponent_set(1.110, 0.762))) < 1e-12)
    from dataclasses import replace

    e = exponent_set(1.110, 0.762)
    r = identity_residuals(replace(e, beta=e.beta + 0.01))
    assert r[0] == pytest.approx(0.02, abs=1e-12)
    with pytest.raises(ValueError):
        identity_residuals(exponent_set(1.1))


@settings(max_examples=1000, deadline=None)
@given(st.floats(0.5, 2.0), st.floats(0.3, 0.95))
def test_identities_property(p, q):
    assert np.all(np.abs(identity_residuals(exponent_set(p, q))) < 1e-12)


def test_nu_monotone_in_lambda():
    lam = np.linspace(1.01, 20, 200)
    nu = [exponent_set(scale_powers(x)[0]).nu for x in lam]
    assert all(a > b for a, b in zip(nu, nu[1:]))


def test_to_dict_round_trip():
    d = exponent_set(1.0, 0.75).to_dict()
    assert d["d"] == 2 and d["L"] == 2 and d["delta"] == 3.0
