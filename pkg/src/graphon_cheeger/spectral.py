"""Eigenpairs of the step-graphon Laplacian and the spectral embedding.

The degree-weighted Rayleigh problem reduces to a standard symmetric
eigenproblem: substituting u_i = f_i * sqrt(d_i / n) turns the quotient
into u'Lu / u'u for

    L = I - D^{-1/2} (K/n) D^{-1/2},

whose spectrum lies in [0, 2] with a zero eigenvalue at u = sqrt(d/n).
The k smallest eigenpairs give an orthonormal family under the
degree-weighted inner product; stacking the eigenfunctions row-wise
yields the embedding F(x) in R^k used by the partitioning stage.

For a step graphon the orthogonal complement of the step space satisfies
Delta f = f, so the graphon-level k-th minimax value is min(lambda_k, 1)
where lambda_k is the k-th discrete eigenvalue. Both are reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DisconnectedError,
    KTooLargeError,
    NonUnitVectorError,
    ZeroDegreeCellError,
)
from .graphon import StepGraphon, VertexFunction, _frozen, _fsum

# Rows with norm at or below this are treated as the zero vector; anything
# larger is a genuine direction and safe to normalize.
ZERO_ROW_THRESHOLD = 1e-300


@dataclass(frozen=True)
class SpectralBasis:
    """Ascending eigenvalues with eigenfunctions orthonormal under <.,.>_v."""

    k: int
    eigenvalues: np.ndarray
    table: np.ndarray = field(repr=False)  # n x k, column j = f_j
    degrees: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.table.shape[0]

    def function(self, j: int) -> VertexFunction:
        return VertexFunction(self.n, self.table[:, j].copy())

    @property
    def functions(self) -> tuple[VertexFunction, ...]:
        return tuple(self.function(j) for j in range(self.k))


@dataclass(frozen=True)
class Embedding:
    """Row table of F(x) = (f_1(x), ..., f_k(x)) with cached radial data.

    ``unit_table`` holds F(x)/||F(x)|| for nonzero rows and zeros where
    ``zero_mask`` is set; ``degrees`` references the owning graphon's d.
    """

    n: int
    k: int
    table: np.ndarray = field(repr=False)
    norms: np.ndarray = field(repr=False)
    unit_table: np.ndarray = field(repr=False)
    zero_mask: np.ndarray = field(repr=False)
    degrees: np.ndarray = field(repr=False)


def normalized_operator(W: StepGraphon) -> np.ndarray:
    """Symmetric operator L = I - D^{-1/2} (K/n) D^{-1/2}; spectrum in [0,2]."""
    if np.any(W.degrees <= 0.0):
        raise ZeroDegreeCellError("normalized operator needs all degrees positive")
    scale = np.sqrt(np.outer(W.degrees, W.degrees)) * W.n
    return np.eye(W.n) - W.kernel / scale


def _fix_signs(U: np.ndarray) -> np.ndarray:
    # Deterministic orientation: first nonzero coordinate of each column positive.
    U = U.copy()
    for j in range(U.shape[1]):
        col = U[:, j]
        nz = np.nonzero(col)[0]
        if nz.size and col[nz[0]] < 0.0:
            U[:, j] = -col
    return U


def eigen_k(W: StepGraphon, k: int) -> SpectralBasis:
    """k smallest eigenpairs, mapped back to degree-orthonormal functions.

    Output is deterministic for a fixed input: the dense symmetric solver
    is deterministic and each eigenvector's sign is fixed afterwards.
    """
    if k < 1:
        raise KTooLargeError(f"k must be >= 1, got {k}")
    if k > W.n:
        raise KTooLargeError(f"k = {k} exceeds the cell count n = {W.n}")
    if not W.connected:
        raise DisconnectedError("spectral basis requires a connected graphon")
    L = normalized_operator(W)
    vals, vecs = np.linalg.eigh(L)
    U = _fix_signs(vecs[:, :k])
    F = U / np.sqrt(W.degrees / W.n)[:, None]
    return SpectralBasis(
        k=k,
        eigenvalues=_frozen(vals[:k].copy()),
        table=_frozen(F),
        degrees=W.degrees,
    )


def lambda_k_graphon(W: StepGraphon, k: int) -> float:
    """Graphon-level k-th minimax value: min(discrete lambda_k, 1); 1 for k > n.

    The complement of the step space contributes eigenvalue 1 with infinite
    multiplicity, so merging it into the discrete spectrum caps every value
    at 1 and pads beyond k = n.
    """
    if k < 1:
        raise KTooLargeError(f"k must be >= 1, got {k}")
    if not W.connected:
        raise DisconnectedError("lambda_k requires a connected graphon")
    if k > W.n:
        return 1.0
    return min(float(eigen_k(W, k).eigenvalues[k - 1]), 1.0)


def build_embedding(basis: SpectralBasis) -> Embedding:
    """Materialize F, row norms and the radial projection for a basis."""
    table = basis.table.copy()
    norms = np.sqrt((table * table).sum(axis=1))
    zero_mask = norms <= ZERO_ROW_THRESHOLD
    safe = np.where(zero_mask, 1.0, norms)
    unit = table / safe[:, None]
    unit[zero_mask] = 0.0
    return Embedding(
        n=basis.n,
        k=basis.k,
        table=_frozen(table),
        norms=_frozen(norms),
        unit_table=_frozen(unit),
        zero_mask=_frozen(zero_mask),
        degrees=basis.degrees,
    )


def spread_check(W: StepGraphon, emb: Embedding, v) -> float:
    """Directional second moment (1/n) sum_x <F(x),v>^2 d_x; equals 1.

    For any unit direction v this is exactly 1 when the embedding comes
    from an orthonormal basis; the return value is the computed sum so the
    caller can assert the identity at its own tolerance.
    """
    vv = np.asarray(v, dtype=float)
    if vv.shape != (emb.k,):
        raise NonUnitVectorError(f"expected a vector in R^{emb.k}, got shape {vv.shape}")
    norm = float(np.sqrt((vv * vv).sum()))
    if abs(norm - 1.0) > 1e-12:
        raise NonUnitVectorError(f"direction must be unit length, got norm {norm!r}")
    proj = emb.table @ vv
    return _fsum(proj * proj * emb.degrees) / emb.n
