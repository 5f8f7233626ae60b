import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ptrdual.errors import NoSolutionError, ParameterError
from ptrdual.gaussian import BS, PDC, bs_element, pdc_element
from ptrdual.interference import (
    PathAmplitudes,
    classical_bs,
    classical_pdc,
    coincidence_bs,
    coincidence_pdc,
    duality_consistency,
    extended_bs_probability,
    pair_distribution,
    pair_probability,
    partial_coincidence,
    threshold_gain,
)

etas = st.floats(min_value=0.0, max_value=1.0)
gains = st.floats(min_value=1.0, max_value=50.0)
overlaps = st.floats(min_value=0.0, max_value=1.0)


def test_coincidence_endpoints():
    assert coincidence_bs(0.5) == 0.0
    assert coincidence_bs(1.0) == 1.0
    assert coincidence_bs(0.25) == pytest.approx(0.25)
    assert coincidence_pdc(2.0) == 0.0
    assert coincidence_pdc(1.0) == 1.0
    assert coincidence_pdc(4.0) == pytest.approx(0.0625)
    with pytest.raises(ParameterError):
        coincidence_bs(-0.2)
    with pytest.raises(ParameterError):
        coincidence_pdc(0.5)


@given(etas)
def test_bs_coincidence_matches_amplitudes(eta):
    p = PathAmplitudes.of(BS(eta))
    assert coincidence_bs(eta) == pytest.approx(p.quantum, abs=1e-14)
    assert coincidence_bs(eta) == pytest.approx(bs_element(1, 1, 1, 1, eta) ** 2, abs=1e-14)


@given(gains)
def test_pdc_coincidence_matches_amplitudes_and_partner(g):
    p = PathAmplitudes.of(PDC(g))
    assert coincidence_pdc(g) == pytest.approx(p.quantum, abs=1e-14)
    assert coincidence_pdc(g) == pytest.approx(pdc_element(1, 1, 1, 1, g) ** 2, abs=1e-14)
    assert coincidence_pdc(g) * g == pytest.approx(coincidence_bs(1 / g), abs=1e-13)


def test_path_amplitude_partners():
    g = 3.0
    bs = PathAmplitudes.of(BS(1 / g))
    pdc = PathAmplitudes.of(PDC(g))
    assert pdc.a_dt == pytest.approx(bs.a_dt / math.sqrt(g))
    assert pdc.a_alt == pytest.approx(bs.a_alt / math.sqrt(g))


def test_classical_baselines():
    assert classical_bs(0.5) == 0.5
    assert classical_pdc(2.0) == 0.25
    assert classical_pdc(1.0) == 1.0


@given(etas)
def test_bs_quantum_classical_gap(eta):
    assert classical_bs(eta) - coincidence_bs(eta) == pytest.approx(2 * eta * (1 - eta), abs=1e-14)


@given(gains)
def test_pdc_quantum_classical_gap(g):
    assert classical_pdc(g) - coincidence_pdc(g) == pytest.approx(2 * (g - 1) / g ** 3, abs=1e-14)


def test_partial_coincidence_examples():
    assert partial_coincidence(BS(0.5), 1.0) == 0.0
    assert partial_coincidence(PDC(2.0), 0.0) == pytest.approx(0.25)
    assert partial_coincidence(PDC(2.0), 0.5) == pytest.approx(0.125)
    with pytest.raises(ParameterError):
        partial_coincidence(BS(0.5), 1.5)


@given(st.one_of(etas.map(BS), gains.map(PDC)), overlaps, overlaps)
def test_partial_coincidence_affine_and_monotone(coupler, s1, s2):
    lo, hi = sorted((s1, s2))
    p_lo, p_hi = partial_coincidence(coupler, lo), partial_coincidence(coupler, hi)
    assert p_hi <= p_lo + 1e-15
    mid = partial_coincidence(coupler, 0.5 * (lo + hi))
    assert mid == pytest.approx(0.5 * (p_lo + p_hi), abs=1e-14)


def test_pair_distribution_examples():
    d2 = pair_distribution(2.0, 12)
    assert d2.probs[0] == pytest.approx(0.25)
    assert d2.probs[1] == 0.0
    assert d2.probs[2] == pytest.approx(1 / 16)
    for n in range(13):
        amp = 0.5 * (n - 1) / 2 ** (n / 2)
        assert d2.probs[n] == pytest.approx(amp ** 2, abs=1e-15)
    assert pair_distribution(3.0, 5).probs[2] == 0.0
    assert pair_distribution(4.0, 5).probs[3] == 0.0


def test_pair_distribution_identity_gain_and_small_range():
    d = pair_distribution(1.0, 4)
    assert list(d.probs) == [0.0, 1.0, 0.0, 0.0, 0.0]
    assert d.tail == 0.0
    d0 = pair_distribution(2.0, 0)
    assert len(d0.probs) == 1 and d0.total() == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("g", [1.5, 2.0, 3.0, 4.0, 7.5])
@pytest.mark.parametrize("n_max", [0, 3, 20, 200])
def test_pair_distribution_normalised(g, n_max):
    assert abs(pair_distribution(g, n_max).total() - 1.0) <= 1e-12


@pytest.mark.parametrize("g", [2.0, 3.0, 4.0, 5.0])
def test_integer_gain_zero_is_exact(g):
    assert pair_probability(int(g) - 1, g) == 0.0


@pytest.mark.parametrize("g", [1.5, 2.0, 3.3])
def test_pair_probabilities_match_fock_elements(g):
    for n in range(8):
        assert pair_probability(n, g) == pytest.approx(pdc_element(n, n, 1, 1, g) ** 2, abs=1e-14)


def test_extended_bs_probability():
    eta = 0.37
    assert extended_bs_probability(1, eta) == pytest.approx(coincidence_bs(eta))
    assert extended_bs_probability(3, 0.25) == 0.0
    assert extended_bs_probability(2, 0.5) == pytest.approx(0.125)
    assert extended_bs_probability(2, 0.5) == pytest.approx(bs_element(2, 1, 1, 2, 0.5) ** 2)
    with pytest.raises(ParameterError):
        extended_bs_probability(0, 0.5)


@pytest.mark.parametrize("g", [1.25, 1.5, 2.0, 3.0, math.e, 4.0])
def test_duality_consistency(g):
    assert max(duality_consistency(n, g) for n in range(1, 11)) <= 1e-12


def test_threshold_gain():
    g = threshold_gain(0.25)
    assert g == pytest.approx(1.28, abs=0.005)
    assert coincidence_pdc(g) == pytest.approx(0.25, abs=1e-9)
    assert threshold_gain(1.0) == 1.0
    assert threshold_gain(0.0) == 2.0
    with pytest.raises(NoSolutionError):
        threshold_gain(1.2)
    with pytest.raises(ParameterError):
        threshold_gain(-0.1)


@given(st.floats(min_value=1e-6, max_value=0.999))
def test_threshold_gain_inverts(target):
    g = threshold_gain(target)
    assert 1.0 <= g <= 2.0
    assert coincidence_pdc(g) == pytest.approx(target, abs=1e-8)
