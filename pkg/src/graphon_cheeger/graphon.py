"""Discrete step-graphon model: kernel, measures, expansion, Rayleigh quotient.

A step graphon is a symmetric kernel constant on the cells of a uniform
n-grid of the unit interval, with every cell carrying Lebesgue measure 1/n.
It is itself a graphon, so all integral quantities below are *exact* finite
sums, not quadratures:

    degree        d_i        = (1/n) * sum_j K[i,j]
    vertex measure nu(A)     = (1/n) * sum_{i in A} d_i
    pair measure  eta(A x B) = (1/n^2) * sum_{i in A, j in B} K[i,j]
    expansion     h(A)       = eta(A x A^c) / nu(A)
    Rayleigh      R(f)       = (1/(2 n^2)) sum_{i,j} (f_i - f_j)^2 K[i,j]
                               / ((1/n) sum_i f_i^2 d_i)

All sums go through ``math.fsum`` (exactly rounded), which makes the key
identity R(1_A) = h(A) hold to a few ulp and makes every result independent
of accumulation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

from .errors import (
    AsymmetricError,
    DimensionMismatchError,
    DisconnectedError,
    EmptySetError,
    IndexOutOfRangeError,
    NonSquareError,
    ValueOutOfRangeError,
    ZeroDegreeCellError,
    ZeroFunctionError,
    ZeroVolumeError,
)

SYMMETRY_TOL = 1e-12


def _fsum(values) -> float:
    if isinstance(values, np.ndarray):
        values = values.ravel().tolist()
    return math.fsum(values)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class StepGraphon:
    """Immutable n-cell step graphon with cached degrees.

    ``kernel`` is symmetric with entries in [0,1]; ``connected`` records
    whether the positive-weight cell graph is connected (computed once at
    construction, independent of whether connectivity was *required*).
    """

    n: int
    kernel: np.ndarray
    degrees: np.ndarray
    connected: bool

    def complement(self, A: "CellSet") -> "CellSet":
        present = set(A.members)
        return CellSet(self.n, tuple(i for i in range(self.n) if i not in present))


@dataclass(frozen=True)
class CellSet:
    """Subset of the n grid cells; members kept sorted and deduplicated."""

    n: int
    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted(set(int(i) for i in self.members)))
        if members and (members[0] < 0 or members[-1] >= self.n):
            raise IndexOutOfRangeError(
                f"cell indices must lie in [0, {self.n}); got {members[0]}..{members[-1]}"
            )
        object.__setattr__(self, "members", members)

    @cached_property
    def _member_set(self) -> frozenset:
        return frozenset(self.members)

    def __contains__(self, i) -> bool:
        return i in self._member_set

    def __len__(self) -> int:
        return len(self.members)

    @property
    def indices(self) -> np.ndarray:
        return np.asarray(self.members, dtype=np.intp)

    def lebesgue(self) -> float:
        """mu_L(A) = |A| / n."""
        return len(self.members) / self.n

    @staticmethod
    def from_indices(n: int, indices: Iterable[int]) -> "CellSet":
        return CellSet(n, tuple(indices))


@dataclass(frozen=True)
class VertexFunction:
    """Real-valued step function on the n cells (finite entries only)."""

    n: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.n,):
            raise DimensionMismatchError(
                f"expected {self.n} values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueOutOfRangeError("function values must be finite")
        object.__setattr__(self, "values", _frozen(vals.copy()))


def _as_values(f, n: int) -> np.ndarray:
    if isinstance(f, VertexFunction):
        if f.n != n:
            raise DimensionMismatchError(f"function on {f.n} cells, graphon has {n}")
        return f.values
    return VertexFunction(n, np.asarray(f, dtype=float)).values


def indicator(A: CellSet) -> VertexFunction:
    """Indicator step function 1_A."""
    v = np.zeros(A.n)
    v[A.indices] = 1.0
    return VertexFunction(A.n, v)


def _is_connected(kernel: np.ndarray) -> bool:
    n = kernel.shape[0]
    adj = kernel > 0.0
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    frontier = np.zeros(n, dtype=bool)
    frontier[0] = True
    while frontier.any():
        reach = adj[frontier].any(axis=0) & ~seen
        seen |= reach
        frontier = reach
    return bool(seen.all())


def new_graphon(kernel, require_connected: bool = True) -> StepGraphon:
    """Validate a kernel table and build a :class:`StepGraphon`.

    The table must be square with entries in [0,1] and symmetric within
    1e-12 (it is then exactly symmetrized by averaging, tolerating
    serialization round-trip noise). With ``require_connected`` the
    positive-weight cell graph must be connected and all degrees positive.
    """
    K = np.asarray(kernel, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] == 0:
        raise NonSquareError(f"kernel must be a nonempty square matrix, got shape {K.shape}")
    n = K.shape[0]
    if not np.all(np.isfinite(K)):
        raise ValueOutOfRangeError("kernel entries must be finite")
    if K.min() < 0.0 or K.max() > 1.0:
        bad = np.unravel_index(int(np.argmax((K < 0.0) | (K > 1.0))), K.shape)
        raise ValueOutOfRangeError(
            f"kernel entry {K[bad]!r} at {tuple(int(b) for b in bad)} outside [0, 1]"
        )
    gap = float(np.abs(K - K.T).max())
    if gap > SYMMETRY_TOL:
        raise AsymmetricError(f"kernel asymmetric by {gap:.3e} (> {SYMMETRY_TOL:.0e})")
    K = (K + K.T) / 2.0

    degrees = np.array([_fsum(K[i]) / n for i in range(n)])
    connected = bool(np.all(degrees > 0.0)) and _is_connected(K)
    if require_connected:
        if np.any(degrees == 0.0):
            i = int(np.argmax(degrees == 0.0))
            raise ZeroDegreeCellError(f"cell {i} has zero degree")
        if not connected:
            raise DisconnectedError("positive-weight cell graph is not connected")
    return StepGraphon(n=n, kernel=_frozen(K), degrees=_frozen(degrees), connected=connected)


def _check_set(W: StepGraphon, A: CellSet) -> None:
    if A.n != W.n:
        raise DimensionMismatchError(f"cell set on {A.n} cells, graphon has {W.n}")


def nu(W: StepGraphon, A: CellSet) -> float:
    """Vertex measure nu(A) = (1/n) * sum_{i in A} d_i."""
    _check_set(W, A)
    return _fsum(W.degrees[A.indices]) / W.n


def eta(W: StepGraphon, A: CellSet, B: CellSet) -> float:
    """Pair measure eta(A x B) = (1/n^2) * sum over the A x B kernel block."""
    _check_set(W, A)
    _check_set(W, B)
    if len(A) == 0 or len(B) == 0:
        return 0.0
    block = W.kernel[np.ix_(A.indices, B.indices)]
    return _fsum(block) / (W.n * W.n)


def expansion(W: StepGraphon, A: CellSet) -> float:
    """Expansion h(A) = eta(A x A^c) / nu(A) of a nonempty set."""
    _check_set(W, A)
    if len(A) == 0:
        raise EmptySetError("expansion of the empty set is undefined")
    vol = nu(W, A)
    if vol == 0.0:
        raise ZeroVolumeError("set has zero vertex measure")
    return eta(W, A, W.complement(A)) / vol


def inner_v(W: StepGraphon, f, g) -> float:
    """Degree-weighted inner product <f,g>_v = (1/n) * sum_i f_i g_i d_i."""
    fv = _as_values(f, W.n)
    gv = _as_values(g, W.n)
    return _fsum(fv * gv * W.degrees) / W.n


def rayleigh(W: StepGraphon, f) -> float:
    """Rayleigh quotient of f: Dirichlet energy over <f,f>_v; lies in [0,2]."""
    fv = _as_values(f, W.n)
    den = _fsum(fv * fv * W.degrees) / W.n
    if den == 0.0:
        raise ZeroFunctionError("function is zero in the degree-weighted norm")
    diff = fv[:, None] - fv[None, :]
    num = _fsum(diff * diff * W.kernel) / (2.0 * W.n * W.n)
    return num / den
