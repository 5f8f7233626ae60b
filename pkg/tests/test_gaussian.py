import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from ptrdual.errors import CutoffError, ParameterError
from ptrdual.fock import Cutoff, TwoModeState
from ptrdual.gaussian import (
    BS,
    PDC,
    apply,
    bs_element,
    dense_oracle,
    expm,
    generator,
    heisenberg_residual,
    pdc_element,
)

counts = st.integers(min_value=0, max_value=8)
etas = st.floats(min_value=0.0, max_value=1.0)
gains = st.floats(min_value=1.0, max_value=6.0)


def test_parameter_conversions_and_clamping():
    assert BS.from_theta(math.pi / 3).eta == pytest.approx(0.25)
    assert PDC.from_r(0.5).gain == pytest.approx(math.cosh(0.5) ** 2)
    assert BS(1 + 5e-13).eta == 1.0
    assert PDC(1 - 5e-13).gain == 1.0
    with pytest.raises(ParameterError):
        BS(1.1)
    with pytest.raises(ParameterError):
        PDC(0.9)
    assert BS(0.25).partner() == PDC(4.0)
    assert PDC(4.0).partner() == BS(0.25)


def test_bs_golden_values():
    assert bs_element(1, 1, 1, 1, 0.5) == pytest.approx(0.0, abs=1e-15)
    for eta in (0.1, 0.3, 0.9):
        assert bs_element(0, 1, 1, 0, eta) == pytest.approx(-math.sqrt(1 - eta), abs=1e-15)
        assert bs_element(1, 0, 0, 1, eta) == pytest.approx(math.sqrt(1 - eta), abs=1e-15)
    assert bs_element(2, 3, 2, 3, 1.0) == 1.0


@pytest.mark.parametrize("n", [1, 2, 5])
@pytest.mark.parametrize("eta", [0.2, 0.5, 0.75])
def test_bs_single_port_binomial(n, eta):
    s, c = math.sqrt(1 - eta), math.sqrt(eta)
    for k in range(n + 1):
        expected = math.sqrt(math.comb(n, k)) * s ** k * c ** (n - k)
        assert bs_element(k, n - k, 0, n, eta) == pytest.approx(expected, abs=1e-14)


def test_pdc_golden_values():
    g = 3.0
    r = PDC(g).r
    assert pdc_element(0, 0, 0, 0, g) == pytest.approx(1 / math.sqrt(g))
    assert pdc_element(0, 0, 1, 1, g) == pytest.approx(-math.sqrt(g - 1) / g)
    for n in range(6):
        assert pdc_element(n, n, 0, 0, g) == pytest.approx(math.tanh(r) ** n / math.cosh(r))
    # stimulated emission from |1,0> at g = 2; cross-checked against the oracle below
    assert pdc_element(2, 1, 1, 0, 2.0) == pytest.approx(0.5, abs=1e-15)
    assert dense_oracle(PDC(2.0), 16).element(2, 1, 1, 0).real == pytest.approx(0.5, abs=1e-12)


@given(counts, counts, counts, counts, etas)
def test_bs_conservation_is_bitwise(n, m, i, j, eta):
    if n + m != i + j:
        assert bs_element(n, m, i, j, eta) == 0.0


@given(counts, counts, counts, counts, gains)
def test_pdc_conservation_is_bitwise(n, m, i, j, g):
    if n - m != i - j:
        assert pdc_element(n, m, i, j, g) == 0.0


@given(counts, counts, etas)
def test_bs_columns_are_normalised(i, j, eta):
    tot = i + j
    s = math.fsum(bs_element(n, tot - n, i, j, eta) ** 2 for n in range(tot + 1))
    assert s == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("i,j", [(0, 0), (1, 1), (2, 0), (3, 1)])
@pytest.mark.parametrize("g", [1.5, 2.0, 3.0])
def test_pdc_columns_are_normalised(i, j, g):
    # the geometric tail beyond w_max is below (pair_ratio)^w_max * poly
    s = math.fsum(pdc_element(w + max(i - j, 0), w + max(j - i, 0), i, j, g) ** 2
                  for w in range(400))
    assert s == pytest.approx(1.0, abs=1e-12)


@given(st.floats(min_value=0.0, max_value=1.0))
def test_hom_probability_shape(eta):
    assert bs_element(1, 1, 1, 1, eta) ** 2 == pytest.approx((2 * eta - 1) ** 2, abs=1e-14)


@pytest.mark.parametrize("eta", [0.1, 0.25, 0.5, 1 / 3, 0.9])
def test_bs_closed_form_matches_oracle(eta):
    u = dense_oracle(BS(eta), 24)
    worst = 0.0
    for n in range(9):
        for m in range(9):
            for i in range(9):
                for j in range(9):
                    worst = max(worst, abs(bs_element(n, m, i, j, eta) - u.element(n, m, i, j)))
    assert worst <= 1e-9


@pytest.mark.parametrize("g", [1.5, 2.0, 3.0, 4.2])
def test_pdc_closed_form_matches_oracle(g):
    u = dense_oracle(PDC(g), 40)
    worst = 0.0
    for n in range(9):
        for m in range(9):
            for i in range(9):
                for j in range(9):
                    worst = max(worst, abs(pdc_element(n, m, i, j, g) - u.element(n, m, i, j)))
    assert worst <= 1e-9


@pytest.mark.parametrize("coupler", [BS(0.3), PDC(2.0)])
def test_oracle_is_real(coupler):
    assert np.abs(dense_oracle(coupler, 10).mat.imag).max() <= 1e-12


def test_oracle_endpoints():
    assert np.allclose(dense_oracle(BS(1.0), 6).mat, np.eye(49), atol=1e-12)
    assert np.allclose(dense_oracle(PDC(1.0), 6).mat, np.eye(49), atol=1e-12)
    assert dense_oracle(BS(0.7), 4).element(1, 0, 1, 0).real == pytest.approx(math.sqrt(0.7), abs=1e-10)
    assert abs(dense_oracle(PDC(2.0), 30).element(1, 1, 1, 1)) <= 1e-9


def test_oracle_returns_independent_copies():
    u = dense_oracle(BS(0.4), 3)
    u.mat[0, 0] = 99
    assert dense_oracle(BS(0.4), 3).mat[0, 0] == 1


def test_taylor_expm_matches_scipy():
    gen = generator(PDC(2.5), 6).toarray()
    assert np.abs(expm(gen) - scipy.linalg.expm(gen)).max() <= 1e-12
    rng = np.random.default_rng(5)
    a = rng.normal(size=(12, 12)) * 3
    ref = scipy.linalg.expm(a)
    assert np.abs(expm(a) - ref).max() <= 1e-10 * np.abs(ref).max()


def test_heisenberg_residuals():
    assert heisenberg_residual(BS(0.3), 12) < 1e-10
    assert heisenberg_residual(PDC(2.0), 30, inside=10) < 1e-8
    assert heisenberg_residual(BS(1.0), 7) <= 1e-13


def test_apply_bs_hom_state():
    y = apply(BS(0.5), TwoModeState.basis(1, 1, 4))
    assert y[2, 0] == pytest.approx(1 / math.sqrt(2))
    assert y[0, 2] == pytest.approx(-1 / math.sqrt(2))
    assert abs(y[1, 1]) <= 1e-15


def test_apply_pdc_vacuum_is_squeezed_vacuum():
    g = 1.5
    pdc = PDC(g)
    y = apply(pdc, TwoModeState.vacuum(60))
    for n in range(10):
        assert y[n, n].real == pytest.approx(pdc.tanh ** n * pdc.sech, abs=1e-14)
    assert y.leaked < 1e-12


def test_apply_matches_oracle_on_random_state():
    rng = np.random.default_rng(3)
    c = Cutoff(45)
    grid = np.zeros((46, 46), dtype=complex)
    grid[:4, :4] = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    x = TwoModeState.from_grid(grid / np.linalg.norm(grid))
    for coupler in (BS(0.35), PDC(1.4)):
        y = apply(coupler, x)
        ref = dense_oracle(coupler, c) @ x
        assert np.abs(y.amp - ref.amp).max() <= 1e-10


def test_apply_rejects_small_cutoff():
    with pytest.raises(CutoffError) as info:
        apply(PDC(3.0), TwoModeState.basis(1, 1, 8))
    assert info.value.tail > 1e-12
