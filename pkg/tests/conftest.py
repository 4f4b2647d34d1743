"""Shared generators for randomized property tests (all seeded)."""

import numpy as np
import pytest

from graphon_cheeger import CellSet, new_graphon
from graphon_cheeger.errors import DisconnectedError, ZeroDegreeCellError

STYLES = ("uniform", "blocks", "banded", "sparse")


def random_kernel(rng, n, style):
    if style == "uniform":
        A = rng.random((n, n))
    elif style == "blocks":
        b = max(2, n // 4)
        labels = rng.integers(0, b, size=n)
        p_in, p_out = 0.6 + 0.4 * rng.random(), 0.05 + 0.2 * rng.random()
        A = np.where(labels[:, None] == labels[None, :], p_in, p_out)
        A = A * (0.75 + 0.25 * rng.random((n, n)))
    elif style == "banded":
        idx = np.arange(n)
        width = max(1, n // 3)
        A = np.clip(1.0 - np.abs(idx[:, None] - idx[None, :]) / width, 0.0, 1.0)
        A = np.maximum(A, 0.02)  # keep it connected
    else:  # sparse
        A = rng.random((n, n)) * (rng.random((n, n)) < 0.6)
        A = A + 0.01 * (np.abs(np.arange(n)[:, None] - np.arange(n)[None, :]) == 1)
    return np.clip((A + A.T) / 2.0, 0.0, 1.0)


def random_connected_graphon(rng, n, style=None):
    """Random connected step graphon on n cells."""
    for _ in range(64):
        s = style if style is not None else STYLES[rng.integers(0, len(STYLES))]
        try:
            return new_graphon(random_kernel(rng, n, s))
        except (DisconnectedError, ZeroDegreeCellError):
            continue
    raise RuntimeError("could not draw a connected kernel")


def random_nonempty_cellset(rng, n):
    size = int(rng.integers(1, n + 1))
    members = rng.choice(n, size=size, replace=False)
    return CellSet(n, tuple(int(i) for i in members))


def random_disjoint_tuple(rng, n, k):
    """k disjoint nonempty cell sets (not necessarily covering)."""
    perm = rng.permutation(n)
    used = int(rng.integers(k, n + 1))
    cells = perm[:used]
    cuts = np.sort(rng.choice(np.arange(1, used), size=k - 1, replace=False)) if k > 1 else []
    parts = np.split(cells, cuts)
    return tuple(CellSet(n, tuple(int(i) for i in part)) for part in parts)


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
