"""Analytic kernel presets and their discretization to step graphons.

Presets are test-corpus generators: constant(p), sbm(blocks, p, q),
product (x*y), mean ((x+y)/2) and min. Discretization averages the kernel
over a subsample x subsample midpoint grid inside each cell pair; that is
exact for kernels constant on cells (constant, and sbm whose blocks align
with the grid). No continuum error bound is claimed - every certified
quantity refers to the resulting step graphon itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BlockMisalignmentError, ParseError, ValueOutOfRangeError
from .graphon import StepGraphon, _fsum, new_graphon

PRESET_NAMES = ("constant", "sbm", "product", "mean", "min")


@dataclass(frozen=True)
class KernelPreset:
    """Named analytic kernel with parameters in [0,1]."""

    name: str
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.name not in PRESET_NAMES:
            raise ParseError(f"unknown preset {self.name!r}; choose from {PRESET_NAMES}")
        if self.name == "constant":
            if len(self.params) != 1:
                raise ParseError("constant preset takes one parameter p")
            if not 0.0 <= self.params[0] <= 1.0:
                raise ValueOutOfRangeError(f"constant level {self.params[0]!r} outside [0, 1]")
        elif self.name == "sbm":
            if len(self.params) != 3:
                raise ParseError("sbm preset takes parameters blocks, p, q")
            blocks = self.params[0]
            if blocks != int(blocks) or int(blocks) < 1:
                raise ParseError(f"sbm block count must be a positive integer, got {blocks!r}")
            for v in self.params[1:]:
                if not 0.0 <= v <= 1.0:
                    raise ValueOutOfRangeError(f"sbm rate {v!r} outside [0, 1]")
        elif self.params:
            raise ParseError(f"preset {self.name!r} takes no parameters")

    def evaluate(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Kernel values on a broadcastable grid of points in [0,1]."""
        if self.name == "constant":
            return np.broadcast_to(self.params[0], np.broadcast_shapes(x.shape, y.shape)).copy()
        if self.name == "sbm":
            blocks = int(self.params[0])
            p, q = self.params[1], self.params[2]
            bx = np.minimum((x * blocks).astype(int), blocks - 1)
            by = np.minimum((y * blocks).astype(int), blocks - 1)
            return np.where(bx == by, p, q)
        if self.name == "product":
            return x * y
        if self.name == "mean":
            return (x + y) / 2.0
        return np.minimum(x, y)  # min


def parse_preset(spec: str) -> KernelPreset:
    """Parse 'name' or 'name:p1,p2,...' into a preset."""
    name, _, rest = spec.partition(":")
    name = name.strip()
    params: tuple[float, ...] = ()
    if rest:
        try:
            params = tuple(float(tok) for tok in rest.split(","))
        except ValueError as exc:
            raise ParseError(f"bad preset parameters in {spec!r}: {exc}") from None
    return KernelPreset(name=name, params=params)


def discretize_preset(
    preset: KernelPreset, n: int, subsample: int = 8, require_connected: bool = True
) -> StepGraphon:
    """Cell-average a preset on the uniform n-grid via midpoint subsampling.

    kernel[i][j] is the mean of the preset over a subsample x subsample
    midpoint grid inside cell (i,j); block averages use exact summation so
    the result is symmetric to the bit.
    """
    if n < 1:
        raise ValueOutOfRangeError(f"cell count must be >= 1, got {n}")
    if subsample < 1:
        raise ValueOutOfRangeError(f"subsample must be >= 1, got {subsample}")
    if preset.name == "sbm":
        blocks = int(preset.params[0])
        if n % blocks != 0:
            raise BlockMisalignmentError(f"{blocks} blocks do not divide n = {n} cells")

    ss = subsample
    # Midpoints: cell i holds points (i + (a + 1/2)/ss)/n for a = 0..ss-1.
    pts = (np.repeat(np.arange(n), ss) + (np.tile(np.arange(ss), n) + 0.5) / ss) / n
    fine = preset.evaluate(pts[:, None], pts[None, :])
    kernel = np.empty((n, n))
    denom = ss * ss
    for i in range(n):
        for j in range(i, n):
            block = fine[i * ss : (i + 1) * ss, j * ss : (j + 1) * ss]
            kernel[i, j] = kernel[j, i] = _fsum(block) / denom
    return new_graphon(kernel, require_connected=require_connected)
