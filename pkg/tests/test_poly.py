import pytest
from hypothesis import given, settings, strategies as st

from s4rg.poly import (
    AsymmetryError,
    SpinPolynomial,
    add,
    coeff,
    const,
    monomial,
    mul,
    pow,
    project_basis,
    var,
)

sa, sb, s1 = var("s_a"), var("s_b"), var("s_1")


def test_add_examples():
    assert add(sa, -sa).is_zero()
    assert add(sa * sb, sa * sb) == SpinPolynomial({monomial(s_a=1, s_b=1): 2})
    p = add(2 * sa**2 + sb, sa**2)
    assert p.coeff(monomial(s_a=2)) == 3 and p.coeff(monomial(s_b=1)) == 1 and len(p) == 2


def test_mul_examples():
    sq = mul(sa + sb, sa + sb)
    assert sq == sa**2 + 2 * sa * sb + sb**2
    q = (sa + sb) ** 4
    assert q.coeff(monomial(s_a=4)) == 1
    assert q.coeff(monomial(s_a=2, s_b=2)) == 6
    assert mul(const(0), sa + sb).is_zero()


def test_pow_examples():
    assert pow(s1, 2) == SpinPolynomial({monomial(s_1=2): 1})
    assert pow(-4 * s1**4, 2) == SpinPolynomial({monomial(s_1=8): 16})
    assert pow(sa + sb, 0) == const(1)
    with pytest.raises(ValueError):
        pow(sa, -1)


def test_coeff_examples():
    assert coeff(sa**2 + 2 * sa * sb, monomial(s_a=1, s_b=1)) == 2
    assert coeff(sa**2, monomial(s_b=2)) == 0
    assert coeff((sa + sb) ** 4, {"s_a": 3, "s_b": 1}) == 4


def test_canonical_keys_and_zero_removal():
    p = SpinPolynomial({(("s_b", 1), ("s_a", 2)): 1.0, monomial(s_a=0, s_b=1): 0.0})
    assert list(p.terms) == [(("s_a", 2), ("s_b", 1))]
    assert all(c != 0 for c in (sa - sa + sb).terms.values())


def test_project_basis_examples():
    bc = project_basis(3 * sa**2 + 3 * sb**2 + 5 * sa * sb)
    assert (bc.c_s2, bc.c_ss, bc.c_s4, bc.c_s, bc.residual_norm) == (3, 5, 0, 0, 0)
    bc = project_basis((sa + sb) ** 4)
    assert bc.c_s4 == 1 and bc.residual_norm == 14


def test_project_basis_counts_constants_in_residual():
    assert project_basis(sa * sb + 2.5).residual_norm == 2.5


def test_project_basis_rejects_asymmetry_and_foreign_vars():
    with pytest.raises(AsymmetryError):
        project_basis(sa**2 + 2 * sb**2)
    with pytest.raises(ValueError):
        project_basis(sa * s1)


names = ["s_a", "s_b", "s_1", "s_2", "s_3", "s_4"]


@st.composite
def polys(draw):
    n = draw(st.integers(0, 5))
    terms = {}
    for _ in range(n):
        exps = {v: draw(st.integers(0, 2)) for v in draw(st.lists(st.sampled_from(names), max_size=4, unique=True))}
        if sum(exps.values()) > 8:
            continue
        terms[monomial(exps)] = draw(st.floats(-10, 10, allow_nan=False).filter(lambda x: abs(x) > 1e-3))
    return SpinPolynomial(terms)


@settings(max_examples=200, deadline=None)
@given(polys(), polys(), polys())
def test_ring_laws(p, q, r):
    assert ((p + q) + r).allclose(p + (q + r), rtol=1e-12)
    assert (p * (q + r)).allclose(p * q + p * r, rtol=1e-12, atol=1e-9)
    assert (p * q).allclose(q * p, rtol=1e-12)
    assert (p + q).allclose(q + p, rtol=1e-12)


@st.composite
def boundary_polys(draw):
    terms = {}
    for i, j in draw(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), max_size=6)):
        c = draw(st.floats(-5, 5, allow_nan=False))
        terms[monomial(s_a=i, s_b=j)] = terms.get(monomial(s_a=i, s_b=j), 0) + c
        terms[monomial(s_a=j, s_b=i)] = terms.get(monomial(s_a=j, s_b=i), 0) + (c if i != j else 0)
    return SpinPolynomial(terms)


@settings(max_examples=200, deadline=None)
@given(boundary_polys(), boundary_polys())
def test_projection_is_linear(p, q):
    a, b, s = project_basis(p), project_basis(q), project_basis(p + q)
    for x, y, z in zip(a.as_tuple(), b.as_tuple(), s.as_tuple()):
        assert z == pytest.approx(x + y, abs=1e-9)
    assert s.residual_norm <= a.residual_norm + b.residual_norm + 1e-9


def test_mul_is_exponent_convolution():
    p = 2 * sa * sb**2 - 3 * s1
    q = sa**3 + 0.5 * s1 * sb
    prod = p * q
    assert prod.coeff(monomial(s_a=4, s_b=2)) == 2
    assert prod.coeff(monomial(s_a=1, s_b=3, s_1=1)) == 1
    assert prod.coeff(monomial(s_a=3, s_1=1)) == -3
    assert prod.coeff(monomial(s_1=2, s_b=1)) == -1.5
    assert len(prod) == 4
