"""Predictive, retrodictive and intermediate probabilities for a two-mode
down-converter.

The intermediate probability ``P(n, j | i, m)`` (prepared ``i`` on mode a,
observed ``m`` on mode b; inferred outcome ``n`` on a and preparation ``j`` on
b) is computed twice:

* by Bayes inversion of the predictive law over the mode-b preparation, and
* by propagating ``rho_i (x) sigma_m`` through ``V = U_BS(1/g) / sqrt(g)`` and
  measuring ``Pi_n (x) Theta_j``, where ``sigma_m`` is the retrodicted state
  of ``Pi_m`` and ``Theta_j = p_j rho_j^T``.

Both routes evolve pure components with oracle columns that keep every output
row up to the working cutoff, so no probability is lost to cropping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CutoffError, ParameterError, UnreachableOutcomeError
from .fock import DEFAULT_TAIL_BOUND, Cutoff, as_cutoff
from .gaussian import BS, PDC, oracle_columns

ENSEMBLE_TOL = 1e-10
PSD_TOL = 1e-12
# Denominators at or below this are treated as an unreachable outcome.
REACHABLE_FLOOR = 1e-15
CANCELLATION_TOL = 1e-10


def _square(mat, levels: int | None, what: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ParameterError(f"{what} must be a square matrix, got shape {mat.shape}")
    if levels is not None and mat.shape[0] != levels:
        raise ParameterError(f"{what} has size {mat.shape[0]}, expected {levels}")
    if np.abs(mat - mat.conj().T).max(initial=0.0) > PSD_TOL:
        raise ParameterError(f"{what} is not Hermitian")
    return mat


def _pure_components(rho: np.ndarray) -> list[tuple[float, np.ndarray]]:
    w, v = np.linalg.eigh(rho)
    return [(float(w[k]), v[:, k]) for k in range(len(w)) if w[k] > PSD_TOL]


@dataclass(frozen=True)
class PreparationEnsemble:
    """Single-mode states ``rho_j`` with priors ``p_j`` whose mixture is
    proportional to the identity on the inside block."""

    states: tuple
    priors: np.ndarray
    _components: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.states) == 0:
            raise ParameterError("ensemble needs at least one state")
        levels = np.asarray(self.states[0]).shape[0]
        states = tuple(_square(s, levels, f"state {k}") for k, s in enumerate(self.states))
        priors = np.asarray(self.priors, dtype=float)
        if priors.shape != (len(states),):
            raise ParameterError("one prior per state is required")
        if priors.min() < 0.0 or abs(priors.sum() - 1.0) > ENSEMBLE_TOL:
            raise ParameterError("priors must be non-negative and sum to 1")
        comps = []
        for k, s in enumerate(states):
            if abs(np.trace(s).real - 1.0) > ENSEMBLE_TOL or np.linalg.eigvalsh(s).min() < -PSD_TOL:
                raise ParameterError(f"state {k} is not a density matrix")
            comps.append(tuple(_pure_components(s)))
        mix = sum(p * s for p, s in zip(priors, states))
        inside = levels // 2 + 1
        c = mix[0, 0].real
        if np.abs(mix[:inside, :inside] - c * np.eye(inside)).max() > ENSEMBLE_TOL:
            raise ParameterError("prior mixture is not proportional to the identity")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "_components", tuple(comps))

    @property
    def levels(self) -> int:
        return self.states[0].shape[0]

    @property
    def mixture_constant(self) -> float:
        """``c`` in ``sum_j p_j rho_j = c * 1``."""
        return float(sum(p * s[0, 0].real for p, s in zip(self.priors, self.states)))

    def components(self, j: int) -> tuple:
        return self._components[j]


@dataclass(frozen=True)
class MeasurementModel:
    """Positive effects ``Pi_m`` resolving the identity."""

    effects: tuple
    _stack: np.ndarray = field(init=False, repr=False, compare=False)
    _diag: np.ndarray | None = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.effects) == 0:
            raise ParameterError("measurement needs at least one effect")
        levels = np.asarray(self.effects[0]).shape[0]
        effects = tuple(_square(e, levels, f"effect {k}") for k, e in enumerate(self.effects))
        for k, e in enumerate(effects):
            if np.linalg.eigvalsh(e).min() < -PSD_TOL:
                raise ParameterError(f"effect {k} is not positive semidefinite")
        if np.abs(sum(effects) - np.eye(levels)).max() > ENSEMBLE_TOL:
            raise ParameterError("effects do not sum to the identity")
        stack, diag = _stack_of(effects)
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "_stack", stack)
        object.__setattr__(self, "_diag", diag)

    @property
    def levels(self) -> int:
        return self.effects[0].shape[0]

    def __len__(self) -> int:
        return len(self.effects)


def fock_ensemble(cutoff: Cutoff | int) -> PreparationEnsemble:
    """Uniform prior over the Fock states ``0..n_max``."""
    d = as_cutoff(cutoff).levels
    states = tuple(np.diag(np.eye(d)[k]) for k in range(d))
    return PreparationEnsemble(states, np.full(d, 1.0 / d))


def fock_measurement(cutoff: Cutoff | int) -> MeasurementModel:
    d = as_cutoff(cutoff).levels
    return MeasurementModel(tuple(np.diag(np.eye(d)[k]) for k in range(d)))


def retrodicted_state(effect) -> np.ndarray:
    """``Pi^T / Tr[Pi]`` in the Fock basis."""
    effect = np.asarray(effect, dtype=np.complex128)
    if effect.ndim != 2 or effect.shape[0] != effect.shape[1]:
        raise ParameterError("effect must be a square matrix")
    tr = np.trace(effect).real
    if tr <= 0.0:
        raise UnreachableOutcomeError("effect has zero trace; no state can be retrodicted")
    return effect.T / tr


def _stack_of(ops):
    """Stacked operators plus their diagonals when all are diagonal."""
    stack = np.stack([np.asarray(o, dtype=np.complex128) for o in ops])
    offdiag = stack * (1.0 - np.eye(stack.shape[1]))
    diag = np.einsum("kii->ki", stack).real.copy() if not offdiag.any() else None
    return stack, diag


def _joint(y: np.ndarray, d: int, a_ops, b_ops) -> np.ndarray:
    """``<y| A_k (x) B_l |y>`` for operators on the first ``d`` levels."""
    (sa, da), (sb, db) = a_ops, b_ops
    block = y[:d, :d]
    if da is not None and db is not None:
        return da @ (np.abs(block) ** 2) @ db.T
    return np.einsum("ab,kac,cd,lbd->kl", block.conj(), sa, block, sb, optimize=True).real


def _b_marginal(y: np.ndarray, d: int, b_ops) -> np.ndarray:
    """``<y| 1 (x) B_l |y>`` with the identity on every working level of mode a."""
    sb, db = b_ops
    cols = y[:, :d]
    if db is not None:
        return db @ (np.abs(cols) ** 2).sum(axis=0)
    return np.einsum("ab,lbc,ac->l", cols.conj(), sb, cols, optimize=True).real


def _evolve(cols, ket_a: np.ndarray, ket_b: np.ndarray, tail_bound: float) -> np.ndarray:
    # Only working-edge entries that a measurement reads (b <= n_max for the
    # marginal, a <= n_max for the joint) can spoil a probability.
    wl, d = cols.working_levels, cols.n_max + 1
    y = (cols.matrix @ np.kron(ket_a, ket_b)).reshape(wl, wl)
    if cols.working == cols.n_max:
        return y
    edge = float((np.abs(y[-1, :d]) ** 2).sum() + (np.abs(y[:d, -1]) ** 2).sum())
    if edge > tail_bound:
        raise CutoffError(f"evolution reaches the working cutoff {cols.working}", tail=edge)
    return y


def _defaults(cutoff, ensemble, measurement):
    cutoff = as_cutoff(cutoff)
    ensemble = fock_ensemble(cutoff) if ensemble is None else ensemble
    measurement = fock_measurement(cutoff) if measurement is None else measurement
    if ensemble.levels != cutoff.levels or measurement.levels != cutoff.levels:
        raise ParameterError("ensemble and measurement must live on the cutoff's levels")
    return cutoff, ensemble, measurement


def _product_components(rho_a_comps, rho_b_comps):
    for wa, va in rho_a_comps:
        for wb, vb in rho_b_comps:
            yield wa * wb, va, vb


def predictive_table(i: int, j: int, gain: float, cutoff: Cutoff | int,
                     ensemble: PreparationEnsemble | None = None,
                     measurement: MeasurementModel | None = None,
                     tail_bound: float = DEFAULT_TAIL_BOUND) -> np.ndarray:
    """``P(n, m | i, j)`` for every outcome pair, indexed ``[n, m]``."""
    cutoff, ensemble, measurement = _defaults(cutoff, ensemble, measurement)
    cols = oracle_columns(PDC(gain), cutoff)
    ops = (measurement._stack, measurement._diag)
    out = np.zeros((len(measurement), len(measurement)))
    for w, va, vb in _product_components(ensemble.components(i), ensemble.components(j)):
        out += w * _joint(_evolve(cols, va, vb, tail_bound), cutoff.levels, ops, ops)
    return out


def predictive_prob(i: int, j: int, n: int, m: int, gain: float, cutoff: Cutoff | int,
                    ensemble: PreparationEnsemble | None = None,
                    measurement: MeasurementModel | None = None) -> float:
    """Born probability of outcome ``(n, m)`` after preparing ``(i, j)``."""
    return float(predictive_table(i, j, gain, cutoff, ensemble, measurement)[n, m])


def intermediate_table_bayes(i: int, m: int, gain: float, cutoff: Cutoff | int,
                             ensemble: PreparationEnsemble | None = None,
                             measurement: MeasurementModel | None = None,
                             tail_bound: float = DEFAULT_TAIL_BOUND) -> np.ndarray:
    """``P(n, j | i, m)`` indexed ``[n, j]`` by inverting the predictive law
    over the mode-b preparation."""
    cutoff, ensemble, measurement = _defaults(cutoff, ensemble, measurement)
    cols = oracle_columns(PDC(gain), cutoff)
    a_ops = (measurement._stack, measurement._diag)
    b_ops = _stack_of([measurement.effects[m]])
    d = cutoff.levels
    num = np.zeros((len(measurement), len(ensemble.priors)))
    den = 0.0
    for jp, p in enumerate(ensemble.priors):
        if p == 0.0:
            continue
        for w, va, vb in _product_components(ensemble.components(i), ensemble.components(jp)):
            y = _evolve(cols, va, vb, tail_bound)
            num[:, jp] += p * w * _joint(y, d, a_ops, b_ops)[:, 0]
            den += p * w * _b_marginal(y, d, b_ops)[0]
    if den <= REACHABLE_FLOOR:
        raise UnreachableOutcomeError(f"outcome m={m} cannot follow preparation i={i}")
    return num / den


def intermediate_table_ptr(i: int, m: int, gain: float, cutoff: Cutoff | int,
                           ensemble: PreparationEnsemble | None = None,
                           measurement: MeasurementModel | None = None,
                           tail_bound: float = DEFAULT_TAIL_BOUND) -> np.ndarray:
    """``P(n, j | i, m)`` indexed ``[n, j]`` from the retrodicted evolution
    through ``V = U_BS(1/g) / sqrt(g)``.

    The normalisation ``Tr[V (rho_i (x) sigma_m) V^dag (1 (x) sum_j Theta_j)]``
    must equal ``c / g`` (``c`` the prior mixture constant); a mismatch means
    the truncated space does not hold the evolution and raises
    :class:`CutoffError`.
    """
    cutoff, ensemble, measurement = _defaults(cutoff, ensemble, measurement)
    pdc = PDC(gain)
    effect = measurement.effects[m]
    if np.trace(effect).real <= REACHABLE_FLOOR:
        raise UnreachableOutcomeError(f"outcome m={m} has a zero effect")
    sigma = retrodicted_state(effect)
    sigma_comps = _pure_components(sigma)
    cols = oracle_columns(BS(1.0 / pdc.gain), cutoff)
    thetas = [p * s.T for p, s in zip(ensemble.priors, ensemble.states)]
    a_ops = (measurement._stack, measurement._diag)
    b_ops = _stack_of(thetas)
    b_total = _stack_of([sum(thetas)])
    d = cutoff.levels
    num = np.zeros((len(measurement), len(thetas)))
    den = 0.0
    for w, va, vb in _product_components(ensemble.components(i), sigma_comps):
        y = _evolve(cols, va, vb, tail_bound)
        num += w * _joint(y, d, a_ops, b_ops)
        den += w * _b_marginal(y, d, b_total)[0]
    num /= pdc.gain
    den /= pdc.gain
    expected = ensemble.mixture_constant / pdc.gain
    if abs(den - expected) > CANCELLATION_TOL * expected:
        raise CutoffError(
            f"retrodicted normalisation {den:.15g} differs from c/g = {expected:.15g}",
            tail=abs(den - expected) / expected)
    return num / den


def intermediate_prob_bayes(n: int, j: int, i: int, m: int, gain: float, cutoff: Cutoff | int,
                            ensemble: PreparationEnsemble | None = None,
                            measurement: MeasurementModel | None = None) -> float:
    return float(intermediate_table_bayes(i, m, gain, cutoff, ensemble, measurement)[n, j])


def intermediate_prob_ptr(n: int, j: int, i: int, m: int, gain: float, cutoff: Cutoff | int,
                          ensemble: PreparationEnsemble | None = None,
                          measurement: MeasurementModel | None = None) -> float:
    return float(intermediate_table_ptr(i, m, gain, cutoff, ensemble, measurement)[n, j])


@dataclass(frozen=True)
class RetroCheck:
    max_discrepancy: float
    compared: int
    unreachable: int
    rows: tuple = ()


def retro_check(gain: float, max_photons: int, cutoff: Cutoff | int,
                ensemble: PreparationEnsemble | None = None,
                measurement: MeasurementModel | None = None) -> RetroCheck:
    """Largest ``|bayes - ptr|`` over every ``(i, m) <= max_photons`` and all
    inferred ``(n, j)``.  Unreachable ``(i, m)`` pairs are counted and left
    out of ``rows``, which holds ``(i, m, discrepancy)``."""
    rows, unreachable = [], 0
    for i in range(max_photons + 1):
        for m in range(max_photons + 1):
            try:
                bayes = intermediate_table_bayes(i, m, gain, cutoff, ensemble, measurement)
            except UnreachableOutcomeError:
                unreachable += 1
                continue
            ptr = intermediate_table_ptr(i, m, gain, cutoff, ensemble, measurement)
            diff = float(np.abs(bayes - ptr).max())
            if math.isnan(diff):
                raise ArithmeticError(f"retrodiction comparison produced NaN at i={i}, m={m}")
            rows.append((i, m, diff))
    worst = max((r[2] for r in rows), default=0.0)
    return RetroCheck(worst, len(rows), unreachable, tuple(rows))
