"""Scalar coincidence predictions for one photon per input port.

Beam splitter quantities are functions of the transmittance ``eta``; the
down-converter ones are functions of the gain ``g``.  Each closed form here is
independently cross-checked against the Fock matrix elements in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .errors import NoSolutionError, ParameterError
from .gaussian import BS, PDC, CouplerSpec, _clamp

THRESHOLD_XTOL = 1e-10


def _unit(value: float, name: str) -> float:
    return _clamp(value, 0.0, 1.0, name)


@dataclass(frozen=True)
class PathAmplitudes:
    """Amplitudes of the two paths leading to one photon in each output.

    ``a_dt`` is double transmission.  ``a_alt`` is double reflection for a
    beam splitter and double stimulated emission for a down-converter.
    """

    a_dt: float
    a_alt: float

    @classmethod
    def of(cls, coupler: CouplerSpec) -> "PathAmplitudes":
        if isinstance(coupler, BS):
            return cls(coupler.eta, -(1.0 - coupler.eta))
        g = coupler.gain
        return cls(g ** -1.5, -(g - 1.0) * g ** -1.5)

    @property
    def quantum(self) -> float:
        return (self.a_dt + self.a_alt) ** 2

    @property
    def classical(self) -> float:
        return self.a_dt ** 2 + self.a_alt ** 2


@dataclass(frozen=True)
class PairCountDistribution:
    gain: float
    probs: np.ndarray
    tail: float

    def __post_init__(self):
        self.probs.setflags(write=False)

    @property
    def n_max(self) -> int:
        return len(self.probs) - 1

    def total(self) -> float:
        return float(math.fsum(self.probs)) + self.tail


def coincidence_bs(eta: float) -> float:
    eta = BS(eta).eta
    return (2.0 * eta - 1.0) ** 2


def coincidence_pdc(gain: float) -> float:
    g = PDC(gain).gain
    return (2.0 - g) ** 2 / g ** 3


def classical_bs(eta: float) -> float:
    eta = BS(eta).eta
    return eta ** 2 + (1.0 - eta) ** 2


def classical_pdc(gain: float) -> float:
    g = PDC(gain).gain
    return (1.0 + (g - 1.0) ** 2) / g ** 3


def partial_coincidence(coupler: CouplerSpec, s: float) -> float:
    """Coincidence probability with path overlap ``s``: ``s = 1`` adds the
    two amplitudes coherently, ``s = 0`` adds their probabilities."""
    s = _unit(s, "indistinguishability s")
    p = PathAmplitudes.of(coupler)
    return p.a_dt ** 2 + p.a_alt ** 2 + 2.0 * s * p.a_dt * p.a_alt


def pair_probability(n: int, gain: float) -> float:
    """Probability of ``n`` pairs when ``|1,1>`` is amplified with gain ``g``."""
    if int(n) != n or n < 0:
        raise ParameterError(f"pair number must be a non-negative integer, got {n!r}")
    g = PDC(gain).gain
    if g == 1.0:
        return 1.0 if n == 1 else 0.0
    lam = (g - 1.0) / g
    return lam ** (n - 1) * (n + 1.0 - g) ** 2 / g ** 3


def _pair_tail(first: int, g: float) -> float:
    # sum_{n >= first} lam^(n-1) (n + 1 - g)^2 / g^3 in closed form
    lam = (g - 1.0) / g
    b = first + 1.0 - g
    q = 1.0 - lam
    s0 = 1.0 / q
    s1 = lam / q ** 2
    s2 = lam * (1.0 + lam) / q ** 3
    return lam ** (first - 1) / g ** 3 * (b * b * s0 + 2.0 * b * s1 + s2)


def pair_distribution(gain: float, n_max: int) -> PairCountDistribution:
    if int(n_max) != n_max or n_max < 0:
        raise ParameterError(f"n_max must be a non-negative integer, got {n_max!r}")
    g = PDC(gain).gain
    probs = np.array([pair_probability(n, g) for n in range(int(n_max) + 1)])
    if g == 1.0:
        tail = 0.0 if n_max >= 1 else 1.0
    else:
        tail = _pair_tail(int(n_max) + 1, g)
    return PairCountDistribution(gain=g, probs=probs, tail=tail)


def extended_bs_probability(n: int, eta: float) -> float:
    """``|<n,1|U_BS(eta)|1,n>|^2``, which vanishes at ``eta = 1/(n+1)``."""
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")
    eta = BS(eta).eta
    return (1.0 - eta) ** (n - 1) * ((n + 1) * eta - 1.0) ** 2


def duality_consistency(n: int, gain: float) -> float:
    """``|P_n(g) - extended_bs_probability(n, 1/g) / g|``."""
    g = PDC(gain).gain
    return abs(pair_probability(n, g) - extended_bs_probability(n, 1.0 / g) / g)


def threshold_gain(target: float) -> float:
    """Smallest ``g`` in ``[1, 2]`` where the down-converter coincidence
    probability equals ``target``."""
    target = float(target)
    if not math.isfinite(target) or target < 0.0:
        raise ParameterError(f"target probability must be non-negative, got {target}")
    if target > 1.0:
        raise NoSolutionError(f"coincidence probability never exceeds 1 (target {target})")
    if target == 1.0:
        return 1.0
    if target == 0.0:
        return 2.0
    # (2-g)^2/g^3 decreases strictly from 1 to 0 on [1, 2]
    return bisect(lambda g: coincidence_pdc(g) - target, 1.0, 2.0, xtol=THRESHOLD_XTOL)
