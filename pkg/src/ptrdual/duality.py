"""Partial transpose on mode b and checks of the down-converter / beam-splitter
duality ``(U_PDC(g))^{T_b} = U_BS(1/g) / sqrt(g)``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CutoffError, ParameterError
from .fock import (
    DEFAULT_TAIL_BOUND,
    Cutoff,
    FockOperator,
    TwoModeState,
    as_cutoff,
    basis_counts,
)
from .gaussian import PDC, bs_element, default_working_cutoff, dense_oracle, pdc_element


@dataclass(frozen=True)
class DualityResidual:
    lhs: float
    rhs: float

    @property
    def abs_err(self) -> float:
        return abs(self.lhs - self.rhs)


def _transpose_b(mat: np.ndarray, levels: int) -> np.ndarray:
    t = mat.reshape(levels, levels, levels, levels)  # [n, m, i, j]
    return t.transpose(0, 3, 2, 1).reshape(levels ** 2, levels ** 2)


def partial_transpose_b(op: FockOperator) -> FockOperator:
    """``(M^{T_b})[(n,m),(i,j)] = M[(n,j),(i,m)]``."""
    return FockOperator(op.cutoff, _transpose_b(op.mat, op.cutoff.levels))


def check_duality(i: int, j: int, n: int, m: int, gain: float) -> DualityResidual:
    """Both sides of ``<n,j|U_PDC(g)|i,m> = g^{-1/2} <n,m|U_BS(1/g)|i,j>`` from
    the closed forms."""
    pdc = PDC(gain)
    lhs = pdc_element(n, j, i, m, pdc.gain)
    rhs = bs_element(n, m, i, j, 1.0 / pdc.gain) / math.sqrt(pdc.gain)
    return DualityResidual(lhs, rhs)


def duality_sweep(max_photons: int, gains) -> float:
    """Largest closed-form duality residual over all counts ``<= max_photons``."""
    worst = 0.0
    rng = range(max_photons + 1)
    for g in gains:
        for i in rng:
            for j in rng:
                for n in rng:
                    for m in rng:
                        worst = max(worst, check_duality(i, j, n, m, g).abs_err)
    return worst


def dense_duality_residual(gain: float, cutoff: Cutoff | int, inside: int | None = None) -> float:
    """Oracle witness: max ``|(U_PDC)^{T_b} - U_BS(1/g)/sqrt(g)|`` on the block
    of states with ``n_a, n_b <= inside`` (default ``cutoff.inside``)."""
    cutoff = as_cutoff(cutoff)
    inside = cutoff.inside if inside is None else inside
    pdc = PDC(gain)
    lhs = partial_transpose_b(dense_oracle(pdc, cutoff)).mat
    rhs = dense_oracle(pdc.partner(), cutoff).mat / math.sqrt(pdc.gain)
    n_a, n_b = basis_counts(cutoff)
    blk = np.flatnonzero((n_a <= inside) & (n_b <= inside))
    return float(np.abs(lhs[np.ix_(blk, blk)] - rhs[np.ix_(blk, blk)]).max())


@dataclass(frozen=True)
class WScalar:
    value: float
    off_diagonal: float
    diagonal_spread: float
    block: int


def w_scalar(gain: float, cutoff: Cutoff | int, block: int | None = None,
             tail_bound: float = DEFAULT_TAIL_BOUND) -> WScalar:
    """``W = (V^dag)^{T_b} V^{T_b}`` for ``V = U_PDC(g)`` on the block
    ``n_a, n_b <= block`` (default ``n_max // 2``).

    ``value`` is ``<0,0|W|0,0>``; ``off_diagonal`` and ``diagonal_spread``
    measure how far the block is from a multiple of the identity.
    """
    cutoff = as_cutoff(cutoff)
    block = cutoff.n_max // 2 if block is None else block
    pdc = PDC(gain)
    # Intermediate states of the block product have n_a + n_b <= 2 * block,
    # so they fit; what can spoil W is the oracle's own truncation.
    working = default_working_cutoff(pdc, cutoff.n_max)
    tail = pdc.pair_ratio ** (working - cutoff.n_max + 1)
    if tail > tail_bound:
        raise CutoffError(f"working cutoff {working} too small for g={gain}", tail=tail)
    v = dense_oracle(pdc, cutoff).mat
    levels = cutoff.levels
    n_a, n_b = basis_counts(cutoff)
    blk = np.flatnonzero((n_a <= block) & (n_b <= block))
    vtb = _transpose_b(v, levels)
    vdag_tb = _transpose_b(v.conj().T, levels)
    w = vdag_tb[blk] @ vtb[:, blk]
    value = float(w[0, 0].real)
    diag = np.diag(w).real
    off = w - np.diag(np.diag(w))
    return WScalar(value=value,
                   off_diagonal=float(np.abs(off).max(initial=0.0)),
                   diagonal_spread=float(np.abs(diag - value).max()),
                   block=block)


def _two_mode(xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
    return np.kron(xa, xb)


def check_trace_identity(xa, xb, ya, yb, gain: float, cutoff: Cutoff | int) -> float:
    """``|Tr[U (Xa x Xb) U^dag (Ya x Yb)] - Tr[B (Xa x Yb^T) B^dag (Ya x Xb^T)] / g|``
    with ``U = U_PDC(g)``, ``B = U_BS(1/g)`` from the dense oracles.

    Factors are single-mode matrices of size ``n_max + 1``; they must vanish
    outside the levels ``<= cutoff.inside``.
    """
    cutoff = as_cutoff(cutoff)
    factors = [np.asarray(f, dtype=np.complex128) for f in (xa, xb, ya, yb)]
    for f in factors:
        if f.shape != (cutoff.levels, cutoff.levels):
            raise ParameterError(f"single-mode factor has shape {f.shape}, expected {(cutoff.levels,) * 2}")
        outer = f.copy()
        outer[: cutoff.inside + 1, : cutoff.inside + 1] = 0.0
        if np.abs(outer).max(initial=0.0) > 0.0:
            raise CutoffError(f"factor supported above level {cutoff.inside} of n_max={cutoff.n_max}")
    xa, xb, ya, yb = factors
    pdc = PDC(gain)
    u = dense_oracle(pdc, cutoff).mat
    bs = dense_oracle(pdc.partner(), cutoff).mat
    lhs = np.trace(u @ _two_mode(xa, xb) @ u.conj().T @ _two_mode(ya, yb))
    rhs = np.trace(bs @ _two_mode(xa, yb.T) @ bs.conj().T @ _two_mode(ya, xb.T)) / pdc.gain
    return float(abs(lhs - rhs))


def epr_probe_state(theta: float, cutoff: Cutoff | int,
                    tail_bound: float = DEFAULT_TAIL_BOUND) -> TwoModeState:
    """Normalised ``cos(theta) * sum_n sin(theta)^n |n, n>`` truncated at the cutoff."""
    cutoff = as_cutoff(cutoff)
    if not 0.0 <= theta < math.pi / 2:
        raise ParameterError(f"theta={theta} outside [0, pi/2)")
    s, c = math.sin(theta), math.cos(theta)
    n = np.arange(cutoff.levels)
    grid = np.zeros((cutoff.levels, cutoff.levels), dtype=np.complex128)
    grid[n, n] = c * s ** n
    state = TwoModeState.from_grid(grid, leaked=s ** (2 * cutoff.levels))
    tail = state.leaked + abs(grid[-1, -1]) ** 2
    if tail > tail_bound:
        raise CutoffError(f"n_max={cutoff.n_max} too small for theta={theta}: tail {tail:.3e}", tail=tail)
    return state


# (BS counts <n,m|.|i,j>, BS value at eta), (PDC counts, PDC value at g);
# each PDC entry is the BS entry with mode b time-reversed and eta = 1/g.
FEW_PHOTON_ROWS = (
    ((0, 0, 0, 0), lambda eta: 1.0, (0, 0, 0, 0), lambda g: 1.0 / math.sqrt(g)),
    ((1, 0, 1, 0), lambda eta: math.sqrt(eta), (1, 0, 1, 0), lambda g: 1.0 / g),
    ((0, 1, 0, 1), lambda eta: math.sqrt(eta), (0, 1, 0, 1), lambda g: 1.0 / g),
    ((0, 1, 1, 0), lambda eta: -math.sqrt(1.0 - eta), (0, 0, 1, 1), lambda g: -math.sqrt(g - 1.0) / g),
    ((1, 0, 0, 1), lambda eta: math.sqrt(1.0 - eta), (1, 1, 0, 0), lambda g: math.sqrt(g - 1.0) / g),
)


@dataclass(frozen=True)
class FewPhotonRow:
    bs_counts: tuple
    bs_expected: float
    bs_closed: float
    bs_oracle: float
    pdc_counts: tuple
    pdc_expected: float
    pdc_closed: float
    pdc_oracle: float

    @property
    def closed_err(self) -> float:
        return max(abs(self.bs_closed - self.bs_expected), abs(self.pdc_closed - self.pdc_expected))

    @property
    def oracle_err(self) -> float:
        return max(abs(self.bs_oracle - self.bs_expected), abs(self.pdc_oracle - self.pdc_expected))


def few_photon_table(gain: float, cutoff: Cutoff | int = 12) -> list[FewPhotonRow]:
    """The five one- and two-photon elements of a beam splitter with
    ``eta = 1/g`` next to their down-converter partners, each from the
    explicit formula, the closed form and the dense oracle."""
    pdc = PDC(gain)
    bs = pdc.partner()
    u_bs = dense_oracle(bs, cutoff)
    u_pdc = dense_oracle(pdc, cutoff)
    rows = []
    for bs_counts, bs_value, pdc_counts, pdc_value in FEW_PHOTON_ROWS:
        rows.append(FewPhotonRow(
            bs_counts=bs_counts,
            bs_expected=bs_value(bs.eta),
            bs_closed=bs_element(*bs_counts, bs.eta),
            bs_oracle=float(u_bs.element(*bs_counts).real),
            pdc_counts=pdc_counts,
            pdc_expected=pdc_value(pdc.gain),
            pdc_closed=pdc_element(*pdc_counts, pdc.gain),
            pdc_oracle=float(u_pdc.element(*pdc_counts).real),
        ))
    return rows
