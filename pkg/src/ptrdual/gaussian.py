"""Beam-splitter and down-converter unitaries.

Two independent routes to the same matrix elements:

* closed forms (:func:`bs_element`, :func:`pdc_element`) -- finite sums, no cutoff;
* :func:`dense_oracle` -- scaling-and-squaring exponential of the truncated
  generator assembled from ladder matrices.

Sign convention: ``U_BS^dag b U_BS = -a sin(theta) + b cos(theta)``, hence
``<0,1|U_BS|1,0> = -sqrt(1 - eta)``.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .errors import CutoffError, ParameterError
from .fock import (
    DEFAULT_TAIL_BOUND,
    Cutoff,
    FockOperator,
    LadderKind,
    TwoModeState,
    as_cutoff,
    basis_counts,
    ladder_sparse,
    tail_mass,
)

log = logging.getLogger(__name__)

ROUNDING_SLACK = 1e-12
# Oracle padding targets this truncation tail; see default_working_cutoff.
ORACLE_TAIL = 1e-30
MAX_PADDING = 400


def _clamp(value: float, lo: float, hi: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value}")
    if lo - ROUNDING_SLACK <= value < lo:
        return lo
    if hi < value <= hi + ROUNDING_SLACK:
        return hi
    if not lo <= value <= hi:
        raise ParameterError(f"{name}={value} outside [{lo}, {hi}]")
    return value


@dataclass(frozen=True)
class BS:
    """Beam splitter of transmittance ``eta = cos^2 theta``."""

    eta: float

    def __post_init__(self):
        object.__setattr__(self, "eta", _clamp(self.eta, 0.0, 1.0, "eta"))

    @classmethod
    def from_theta(cls, theta: float) -> "BS":
        theta = _clamp(theta, 0.0, math.pi / 2, "theta")
        return cls(math.cos(theta) ** 2)

    @property
    def theta(self) -> float:
        return math.acos(math.sqrt(self.eta))

    @property
    def cos(self) -> float:
        return math.sqrt(self.eta)

    @property
    def sin(self) -> float:
        return math.sqrt(1.0 - self.eta)

    def partner(self) -> "PDC":
        if self.eta == 0.0:
            raise ParameterError("a fully reflecting beam splitter has no finite-gain partner")
        return PDC(1.0 / self.eta)


@dataclass(frozen=True)
class PDC:
    """Parametric down-converter of gain ``g = cosh^2 r``."""

    gain: float

    def __post_init__(self):
        object.__setattr__(self, "gain", _clamp(self.gain, 1.0, math.inf, "gain"))

    @classmethod
    def from_r(cls, r: float) -> "PDC":
        r = _clamp(r, 0.0, math.inf, "r")
        return cls(math.cosh(r) ** 2)

    @classmethod
    def from_db(cls, db: float) -> "PDC":
        db = _clamp(db, 0.0, math.inf, "squeezing dB")
        return cls.from_r(db * math.log(10.0) / 20.0)

    @property
    def r(self) -> float:
        return math.acosh(math.sqrt(self.gain))

    @property
    def tanh(self) -> float:
        return math.sqrt((self.gain - 1.0) / self.gain)

    @property
    def sech(self) -> float:
        return 1.0 / math.sqrt(self.gain)

    @property
    def pair_ratio(self) -> float:
        """``tanh^2 r``: geometric ratio of the two-mode squeezed vacuum."""
        return (self.gain - 1.0) / self.gain

    def partner(self) -> BS:
        return BS(1.0 / self.gain)


CouplerSpec = Union[BS, PDC]


def _check_counts(*counts: int) -> None:
    for c in counts:
        if int(c) != c or c < 0:
            raise ParameterError(f"photon counts must be non-negative integers, got {c!r}")


def bs_element(n: int, m: int, i: int, j: int, eta: float) -> float:
    """``<n, m| U_BS(eta) |i, j>``; exactly 0.0 unless ``n + m == i + j``."""
    _check_counts(n, m, i, j)
    bs = BS(eta)
    return _kernels.bs_amp(int(n), int(m), int(i), int(j), bs.cos, bs.sin)


def pdc_element(n: int, m: int, i: int, j: int, gain: float) -> float:
    """``<n, m| U_PDC(g) |i, j>``; exactly 0.0 unless ``n - m == i - j``."""
    _check_counts(n, m, i, j)
    pdc = PDC(gain)
    return _kernels.pdc_amp(int(n), int(m), int(i), int(j), pdc.tanh, pdc.sech)


def element(coupler: CouplerSpec, n: int, m: int, i: int, j: int) -> float:
    if isinstance(coupler, BS):
        return bs_element(n, m, i, j, coupler.eta)
    return pdc_element(n, m, i, j, coupler.gain)


def apply(coupler: CouplerSpec, x: TwoModeState,
          tail_bound: float = DEFAULT_TAIL_BOUND) -> TwoModeState:
    """Closed-form action of the coupler on ``x``.

    Probability pushed past the cutoff is recorded in ``leaked``; the result
    is rejected with :class:`CutoffError` when ``tail_mass`` exceeds
    ``tail_bound``.
    """
    grid = np.ascontiguousarray(x.grid)
    if isinstance(coupler, BS):
        y = _kernels.apply_bs(grid, coupler.cos, coupler.sin)
    else:
        y = _kernels.apply_pdc(grid, coupler.tanh, coupler.sech)
    lost = max(0.0, float(np.vdot(x.amp, x.amp).real - np.vdot(y, y).real))
    out = TwoModeState.from_grid(y, leaked=x.leaked + lost)
    tail = tail_mass(out)
    log.debug("apply %s n_max=%d tail=%.3e", coupler, x.cutoff.n_max, tail)
    if tail > tail_bound:
        raise CutoffError(
            f"n_max={x.cutoff.n_max} too small for {coupler}: tail mass {tail:.3e} > {tail_bound:.1e}",
            tail=tail)
    return out


def expm(a: np.ndarray, order: int = 18) -> np.ndarray:
    """Matrix exponential by scaling and squaring around a Taylor core.

    The matrix is scaled by ``2**-s`` until its 1-norm is at most 1/2, where
    the order-18 remainder is below 1e-22.
    """
    a = np.asarray(a)
    eye = np.eye(a.shape[0], dtype=a.dtype)
    norm = np.linalg.norm(a, 1) if a.size else 0.0
    squarings = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    x = a / 2.0 ** squarings
    result = eye.copy()
    for k in range(order, 0, -1):
        result = eye + (x @ result) / k
    for _ in range(squarings):
        result = result @ result
    return result


def generator(coupler: CouplerSpec, cutoff: Cutoff | int) -> sp.csr_matrix:
    """Real antisymmetric generator ``log U`` on the truncated space."""
    cutoff = as_cutoff(cutoff)
    a = ladder_sparse(LadderKind.A, cutoff)
    ad = ladder_sparse(LadderKind.A_DAG, cutoff)
    b = ladder_sparse(LadderKind.B, cutoff)
    bd = ladder_sparse(LadderKind.B_DAG, cutoff)
    if isinstance(coupler, BS):
        return sp.csr_matrix(coupler.theta * (ad @ b - a @ bd))
    return sp.csr_matrix(coupler.r * (ad @ bd - a @ b))


def default_working_cutoff(coupler: CouplerSpec, n_max: int) -> int:
    """Cutoff on which the oracle exponentiates before cropping to ``n_max``.

    Beam-splitter sectors (fixed total photon number) of every state inside
    ``n_max`` fit completely in ``2 n_max``.  Down-converter sectors are
    infinite; they are padded until the squeezed-vacuum ratio raised to the
    padding falls below ``ORACLE_TAIL``.
    """
    if isinstance(coupler, BS):
        return n_max if coupler.eta == 1.0 else 2 * n_max
    if coupler.gain == 1.0:
        return n_max
    pad = math.ceil(math.log(ORACLE_TAIL) / math.log(coupler.pair_ratio))
    return n_max + min(pad, MAX_PADDING)


def sector_unitary(coupler: CouplerSpec, working: int, keep: np.ndarray) -> sp.csr_matrix:
    """Exponential of the generator on the working cutoff, restricted to the
    conserved sectors that contain at least one state flagged in ``keep``.

    Sectors are found as connected components of the generator's sparsity
    graph and exponentiated one dense block at a time.
    """
    gen = generator(coupler, working)
    n_comp, labels = connected_components(gen != 0, directed=False)
    wanted = np.unique(labels[keep])
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(n_comp + 1))
    rows, cols, vals = [], [], []
    for lab in wanted:
        idx = order[bounds[lab]:bounds[lab + 1]]
        block = expm(gen[idx][:, idx].toarray())
        rr, cc = np.meshgrid(idx, idx, indexing="ij")
        rows.append(rr.ravel())
        cols.append(cc.ravel())
        vals.append(block.ravel())
    dim = gen.shape[0]
    if not rows:
        return sp.csr_matrix((dim, dim))
    u = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(dim, dim))
    return u.tocsr()


@dataclass(frozen=True)
class OracleColumns:
    """Columns of the oracle for every input inside ``n_max``, with rows on
    the full working cutoff so that no output probability is cropped.

    ``matrix`` has shape ``((working+1)**2, (n_max+1)**2)``; input columns use
    the ``n_max`` flat index, output rows the ``working`` one.
    """

    n_max: int
    working: int
    matrix: sp.csr_matrix

    @property
    def working_levels(self) -> int:
        return self.working + 1


@functools.lru_cache(maxsize=32)
def _oracle_columns(coupler: CouplerSpec, n_max: int, working: int) -> OracleColumns:
    wa, wb = basis_counts(working)
    keep = (wa <= n_max) & (wb <= n_max)
    u = sector_unitary(coupler, working, keep)
    return OracleColumns(n_max, working, sp.csr_matrix(u[:, np.flatnonzero(keep)]))


def oracle_columns(coupler: CouplerSpec, cutoff: Cutoff | int) -> OracleColumns:
    n_max = as_cutoff(cutoff).n_max
    return _oracle_columns(coupler, n_max, default_working_cutoff(coupler, n_max))


@functools.lru_cache(maxsize=32)
def _oracle_matrix(coupler: CouplerSpec, n_max: int, working: int) -> np.ndarray:
    wa, wb = basis_counts(working)
    keep = (wa <= n_max) & (wb <= n_max)
    src = np.flatnonzero(keep)
    dst = wa[src] * (n_max + 1) + wb[src]
    sub = _oracle_columns(coupler, n_max, working).matrix[src].toarray()
    mat = np.zeros(((n_max + 1) ** 2,) * 2, dtype=np.complex128)
    mat[np.ix_(dst, dst)] = sub
    mat.setflags(write=False)
    return mat


def dense_oracle(coupler: CouplerSpec, cutoff: Cutoff | int,
                 working_cutoff: int | None = None) -> FockOperator:
    """Dense matrix of the coupler on ``cutoff`` from the exponentiated generator.

    ``working_cutoff`` (default :func:`default_working_cutoff`) sets where the
    generator is truncated; pass ``cutoff.n_max`` for the bare truncated
    exponential, which is exactly unitary but only accurate well inside.
    """
    cutoff = as_cutoff(cutoff)
    working = default_working_cutoff(coupler, cutoff.n_max) if working_cutoff is None else working_cutoff
    if working < cutoff.n_max:
        raise ParameterError("working cutoff must not be below the requested cutoff")
    return FockOperator(cutoff, _oracle_matrix(coupler, cutoff.n_max, int(working)).copy())


def heisenberg_residual(coupler: CouplerSpec, cutoff: Cutoff | int,
                        inside: int | None = None) -> float:
    """Max deviation of ``U^dag a U`` and ``U^dag b U`` from their linear
    (beam splitter) or Bogoliubov (down-converter) images.

    Rows and columns are restricted to ``n_a + n_b <= inside`` (default
    ``n_max - 2``); the products are formed on the oracle's working cutoff.
    """
    cutoff = as_cutoff(cutoff)
    inside = max(cutoff.n_max - 2, 0) if inside is None else inside
    working = default_working_cutoff(coupler, cutoff.n_max)
    wa, wb = basis_counts(working)
    u = sector_unitary(coupler, working, wa + wb <= inside + 1)
    sub = np.flatnonzero(wa + wb <= inside)
    a = ladder_sparse(LadderKind.A, working)
    b = ladder_sparse(LadderKind.B, working)
    if isinstance(coupler, BS):
        c, s = coupler.cos, coupler.sin
        expected = (c * a + s * b, -s * a + c * b)
    else:
        ch, sh = math.cosh(coupler.r), math.sinh(coupler.r)
        expected = (ch * a + sh * b.T, sh * a.T + ch * b)
    ucols = u[:, sub]
    worst = 0.0
    for op, target in zip((a, b), expected):
        got = (u.T @ (op @ ucols))[sub].toarray()
        want = target[sub][:, sub].toarray()
        worst = max(worst, float(np.abs(got - want).max(initial=0.0)))
    return worst
