"""Truncated two-mode Fock space.

The basis is ``{|n_a, n_b> : 0 <= n_a, n_b <= n_max}``, flattened row-major on
``(n_a, n_b)``.  Creation past ``n_max`` maps to zero, so every operator is an
ordinary square matrix; whether a computation stayed clear of that boundary
is certified after the fact with :func:`tail_mass`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import CutoffMismatchError, ParameterError

DEFAULT_TAIL_BOUND = 1e-12


@dataclass(frozen=True)
class Cutoff:
    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise ParameterError(f"n_max must be a non-negative integer, got {self.n_max!r}")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def levels(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return self.levels ** 2

    @property
    def inside(self) -> int:
        """Highest level treated as well inside the cutoff by
        cutoff-sensitive checks."""
        return self.n_max // 2


def as_cutoff(cutoff: Cutoff | int) -> Cutoff:
    return cutoff if isinstance(cutoff, Cutoff) else Cutoff(cutoff)


def flat_index(n_a: int, n_b: int, cutoff: Cutoff | int) -> int:
    cutoff = as_cutoff(cutoff)
    if not (0 <= n_a <= cutoff.n_max and 0 <= n_b <= cutoff.n_max):
        raise IndexError(f"({n_a}, {n_b}) outside cutoff n_max={cutoff.n_max}")
    return n_a * cutoff.levels + n_b


def decode_index(index: int, cutoff: Cutoff | int) -> tuple[int, int]:
    cutoff = as_cutoff(cutoff)
    if not 0 <= index < cutoff.dim:
        raise IndexError(f"index {index} outside basis of dimension {cutoff.dim}")
    return divmod(index, cutoff.levels)


def basis_counts(cutoff: Cutoff | int) -> tuple[np.ndarray, np.ndarray]:
    """Photon counts ``(n_a, n_b)`` of every flat basis index."""
    cutoff = as_cutoff(cutoff)
    k = np.arange(cutoff.dim)
    return k // cutoff.levels, k % cutoff.levels


@dataclass
class TwoModeState:
    """Ket on the truncated two-mode space.

    ``leaked`` records probability that an operation pushed past the cutoff
    and therefore no longer appears in ``amp``.
    """

    cutoff: Cutoff
    amp: np.ndarray
    leaked: float = 0.0

    def __post_init__(self):
        self.cutoff = as_cutoff(self.cutoff)
        self.amp = np.asarray(self.amp, dtype=np.complex128).reshape(-1)
        if self.amp.shape[0] != self.cutoff.dim:
            raise ParameterError(
                f"amplitude vector has length {self.amp.shape[0]}, expected {self.cutoff.dim}")

    @classmethod
    def basis(cls, n_a: int, n_b: int, cutoff: Cutoff | int) -> "TwoModeState":
        cutoff = as_cutoff(cutoff)
        amp = np.zeros(cutoff.dim, dtype=np.complex128)
        amp[flat_index(n_a, n_b, cutoff)] = 1.0
        return cls(cutoff, amp)

    @classmethod
    def vacuum(cls, cutoff: Cutoff | int) -> "TwoModeState":
        return cls.basis(0, 0, cutoff)

    @classmethod
    def from_grid(cls, grid, leaked: float = 0.0) -> "TwoModeState":
        grid = np.asarray(grid, dtype=np.complex128)
        if grid.ndim != 2 or grid.shape[0] != grid.shape[1]:
            raise ParameterError("grid must be square (n_max+1, n_max+1)")
        return cls(Cutoff(grid.shape[0] - 1), grid.reshape(-1), leaked)

    @property
    def grid(self) -> np.ndarray:
        return self.amp.reshape(self.cutoff.levels, self.cutoff.levels)

    def __getitem__(self, counts: tuple[int, int]) -> complex:
        return self.amp[flat_index(counts[0], counts[1], self.cutoff)]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amp))

    def normalized(self) -> "TwoModeState":
        return TwoModeState(self.cutoff, self.amp / self.norm(), self.leaked)


@dataclass
class FockOperator:
    cutoff: Cutoff
    mat: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.cutoff = as_cutoff(self.cutoff)
        self.mat = np.asarray(self.mat, dtype=np.complex128)
        if self.mat.shape != (self.cutoff.dim, self.cutoff.dim):
            raise ParameterError(
                f"matrix shape {self.mat.shape} does not match cutoff n_max={self.cutoff.n_max}")

    @classmethod
    def identity(cls, cutoff: Cutoff | int) -> "FockOperator":
        cutoff = as_cutoff(cutoff)
        return cls(cutoff, np.eye(cutoff.dim))

    def element(self, n: int, m: int, i: int, j: int) -> complex:
        """``<n, m| op |i, j>``."""
        return self.mat[flat_index(n, m, self.cutoff), flat_index(i, j, self.cutoff)]

    def dag(self) -> "FockOperator":
        return FockOperator(self.cutoff, self.mat.conj().T)

    def __matmul__(self, other):
        _check_same(self.cutoff, other.cutoff)
        if isinstance(other, FockOperator):
            return FockOperator(self.cutoff, self.mat @ other.mat)
        if isinstance(other, TwoModeState):
            return TwoModeState(self.cutoff, self.mat @ other.amp, other.leaked)
        return NotImplemented

    def __mul__(self, scalar) -> "FockOperator":
        return FockOperator(self.cutoff, self.mat * scalar)

    __rmul__ = __mul__

    def __add__(self, other: "FockOperator") -> "FockOperator":
        _check_same(self.cutoff, other.cutoff)
        return FockOperator(self.cutoff, self.mat + other.mat)

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        _check_same(self.cutoff, other.cutoff)
        return FockOperator(self.cutoff, self.mat - other.mat)


class LadderKind(enum.Enum):
    A_DAG = ("a", True)
    A = ("a", False)
    B_DAG = ("b", True)
    B = ("b", False)

    @property
    def mode(self) -> str:
        return self.value[0]

    @property
    def creates(self) -> bool:
        return self.value[1]


def single_mode_lowering(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1)


def ladder_sparse(kind: LadderKind, cutoff: Cutoff | int) -> sp.csr_matrix:
    """Real sparse ladder matrix; :func:`ladder_matrix` is its dense wrapper."""
    cutoff = as_cutoff(cutoff)
    low = sp.diags(np.sqrt(np.arange(1, cutoff.levels, dtype=float)), 1,
                   shape=(cutoff.levels, cutoff.levels))
    one_mode = low.T if kind.creates else low
    eye = sp.identity(cutoff.levels)
    op = sp.kron(one_mode, eye) if kind.mode == "a" else sp.kron(eye, one_mode)
    return sp.csr_matrix(op)


def ladder_matrix(kind: LadderKind, cutoff: Cutoff | int) -> FockOperator:
    cutoff = as_cutoff(cutoff)
    return FockOperator(cutoff, ladder_sparse(kind, cutoff).toarray())


def inner_product(x: TwoModeState, y: TwoModeState) -> complex:
    """``<x|y>``, conjugate-linear in ``x``."""
    _check_same(x.cutoff, y.cutoff)
    return complex(np.vdot(x.amp, y.amp))


def tail_mass(x: TwoModeState) -> float:
    """Probability on the boundary ``n_a == n_max or n_b == n_max`` plus any
    probability already lost past the cutoff."""
    g = np.abs(x.grid) ** 2
    edge = g[-1, :].sum() + g[:-1, -1].sum()
    return float(edge + x.leaked)


def _check_same(c1: Cutoff, c2: Cutoff) -> None:
    if c1 != c2:
        raise CutoffMismatchError(f"cutoff mismatch: n_max={c1.n_max} vs n_max={c2.n_max}")
