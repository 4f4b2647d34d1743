"""Randomized geometric rounding of the spectral embedding into k separated sets.

The constructive chain, with every step certified on its actual output:

1. Radial pseudo-metric. Rows of the embedding are radially projected to
   the unit sphere; d_F(x,y) is the distance of the projections, 0 if both
   rows vanish and infinity if exactly one does.
2. Shifted shrunk grid. A uniformly shifted axis grid of side s = 1/(sqrt5 k)
   is intersected with the sphere; points keep their grid cell only if every
   coordinate clears a margin of s/(8k^2), which forces distinct groups at
   least 1/(4 sqrt5 k^3) apart and caps each group's embedding mass at
   1 + 1/(4k). A shift retains expected mass >= k - 1/4, so retrying seeds
   quickly finds an acceptable one.
3. Greedy merging. Groups of mass < 1/2 are merged pairwise (smallest two
   first) until at least k survivors of mass >= 1/2 remain; separation is
   inherited.
4. Localization. Ramp functions tau_i = max(0, 1 - (2/delta) d_F(., A_i))
   scaled by the row norms give disjointly supported functions g_i with
   squared norm >= 1/2 and Rayleigh quotient <= 4000 k^7 times the basis
   maximum.
5. Sweep cut. Thresholding g^2 and taking the best prefix yields a set with
   expansion at most sqrt(2 R(g)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    CertificateError,
    DimensionMismatchError,
    EmptySetError,
    IndexOutOfRangeError,
    InsufficientSetsError,
    MassError,
    MassShortfallError,
    SeparationError,
    ValueOutOfRangeError,
    ZeroFunctionError,
)
from .graphon import CellSet, StepGraphon, VertexFunction, _as_values, _frozen, _fsum, expansion, inner_v, rayleigh
from .spectral import Embedding, SpectralBasis

_CHUNK = 512


def grid_side(k: int) -> float:
    """Side length s = 1/(sqrt5 k) of the rounding grid."""
    return 1.0 / (math.sqrt(5.0) * k)


def separation_threshold(k: int) -> float:
    """Guaranteed gap delta = 1/(4 sqrt5 k^3) between distinct groups."""
    return 1.0 / (4.0 * math.sqrt(5.0) * k**3)


@dataclass(frozen=True)
class GridShift:
    """One sampled shift of the rounding grid, with derived constants."""

    k: int
    s: float
    w: np.ndarray = field(repr=False)
    margin: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class SeparatedFamily:
    """Disjoint groups from one grid shift, with their certificate data.

    ``accepted`` records whether the retained ``total_mass`` reached the
    k - 1/4 (minus slack) threshold; separation and per-set mass bounds hold
    for every shift regardless.
    """

    sets: tuple[CellSet, ...]
    masses: tuple[float, ...]
    total_mass: float
    min_separation: float
    shift: GridShift
    accepted: bool = False
    tries_used: int = 0


@dataclass(frozen=True)
class LocalizedFamily:
    """Disjointly supported ramp-localized functions g_i around the anchors."""

    delta: float
    supports: tuple[CellSet, ...]
    functions: tuple[VertexFunction, ...]
    anchors: tuple[CellSet, ...]


@dataclass(frozen=True)
class LocalizationReport:
    """Per-function Rayleigh certificate for a localized family."""

    k: int
    lambda_discrete: float
    bound: float
    rayleigh_values: tuple[float, ...]
    norm_sq: tuple[float, ...]
    lipschitz_scale: float
    lipschitz_slack: tuple[float, ...]


@dataclass(frozen=True)
class SweepStep:
    """One threshold level of a sweep: the prefix {x : g(x)^2 >= threshold}."""

    threshold: float
    size: int
    volume: float
    cut: float
    expansion: float


def set_mass(emb: Embedding, A: CellSet) -> float:
    """Embedding mass (1/n) sum_{x in A} ||F(x)||^2 d_x."""
    if A.n != emb.n:
        raise DimensionMismatchError(f"cell set on {A.n} cells, embedding has {emb.n}")
    idx = A.indices
    nrm = emb.norms[idx]
    return _fsum(nrm * nrm * emb.degrees[idx]) / emb.n


def _pair_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # (m,k) x (p,k) -> (m,p); plain difference form so every path computes
    # d_F with bit-identical arithmetic.
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def _cross_min(emb: Embedding, idx_a: np.ndarray, idx_b: np.ndarray) -> float:
    """Exact min of d_F over idx_a x idx_b (extended value aware)."""
    za = emb.zero_mask[idx_a]
    zb = emb.zero_mask[idx_b]
    if za.any() and zb.any():
        return 0.0
    best = math.inf
    nza = idx_a[~za]
    nzb = idx_b[~zb]
    for i in range(0, nza.size, _CHUNK):
        ua = emb.unit_table[nza[i : i + _CHUNK]]
        for j in range(0, nzb.size, _CHUNK):
            d = _pair_distances(ua, emb.unit_table[nzb[j : j + _CHUNK]])
            m = float(d.min())
            if m < best:
                best = m
    return best


def _check_index(emb: Embedding, x: int) -> int:
    x = int(x)
    if x < 0 or x >= emb.n:
        raise IndexOutOfRangeError(f"cell index {x} outside [0, {emb.n})")
    return x


def radial_distance(emb: Embedding, x: int, y: int) -> float:
    """Extended pseudo-metric d_F: distance of radial projections.

    Zero if both rows vanish, infinity if exactly one does; a row counts as
    zero only when its norm is at most 1e-300 (effectively exact zero).
    """
    x = _check_index(emb, x)
    y = _check_index(emb, y)
    if x == y:
        return 0.0
    zx = bool(emb.zero_mask[x])
    zy = bool(emb.zero_mask[y])
    if zx and zy:
        return 0.0
    if zx or zy:
        return math.inf
    return float(_pair_distances(emb.unit_table[x : x + 1], emb.unit_table[y : y + 1])[0, 0])


def distance_to_set(emb: Embedding, x: int, A: CellSet) -> float:
    """d_F(x, A): exact minimum of d_F(x, y) over y in A (linear scan)."""
    if A.n != emb.n:
        raise DimensionMismatchError(f"cell set on {A.n} cells, embedding has {emb.n}")
    if len(A) == 0:
        raise EmptySetError("distance to the empty set is undefined")
    x = _check_index(emb, x)
    idx = A.indices
    if emb.zero_mask[x]:
        return 0.0 if bool(emb.zero_mask[idx].any()) else math.inf
    nz = idx[~emb.zero_mask[idx]]
    if nz.size == 0:
        return math.inf
    d = _pair_distances(emb.unit_table[x : x + 1], emb.unit_table[nz])
    return float(d.min())


def _distances_to_set(emb: Embedding, A: CellSet) -> np.ndarray:
    """Vector of d_F(x, A) for every cell x; same arithmetic as the scalar op."""
    idx = A.indices
    anchor_has_zero = bool(emb.zero_mask[idx].any())
    nz_anchor = idx[~emb.zero_mask[idx]]
    out = np.full(emb.n, math.inf)
    live = np.nonzero(~emb.zero_mask)[0]
    if nz_anchor.size and live.size:
        best = np.full(live.size, math.inf)
        for i in range(0, live.size, _CHUNK):
            ua = emb.unit_table[live[i : i + _CHUNK]]
            block = np.full(ua.shape[0], math.inf)
            for j in range(0, nz_anchor.size, _CHUNK):
                d = _pair_distances(ua, emb.unit_table[nz_anchor[j : j + _CHUNK]])
                block = np.minimum(block, d.min(axis=1))
            best[i : i + _CHUNK] = block
        out[live] = best
    if anchor_has_zero:
        out[emb.zero_mask] = 0.0
    return out


def sample_shift(k: int, seed: int) -> GridShift:
    """Uniform shift w in [0, s)^k of the rounding grid, deterministic in seed."""
    if k < 1:
        raise DimensionMismatchError(f"dimension k must be >= 1, got {k}")
    seed = int(seed)
    if seed < 0:
        raise ValueOutOfRangeError(f"seed must be non-negative, got {seed}")
    s = grid_side(k)
    margin = s / (8.0 * k * k)
    w = np.random.default_rng(seed).random(k) * s
    # random() < 1 but the product may round up to s; keep w strictly below.
    w = np.minimum(w, np.nextafter(s, 0.0))
    return GridShift(k=k, s=s, w=_frozen(w), margin=margin, seed=int(seed))


def shifted_grid_family(W: StepGraphon, emb: Embedding, shift: GridShift) -> SeparatedFamily:
    """Group cells by the shrunk grid cube containing their radial projection.

    A cell is retained iff every coordinate of its projected row lands in the
    closed core [m, s - m] of its shifted grid interval (m the margin); cores
    of distinct cubes are 2m apart, which yields the separation guarantee.
    The retained total mass is data for the caller - an unlucky shift may
    fall short of k - 1/4.
    """
    if emb.n != W.n:
        raise DimensionMismatchError(f"embedding on {emb.n} cells, graphon has {W.n}")
    if shift.k != emb.k:
        raise DimensionMismatchError(f"shift dimension {shift.k} != embedding k = {emb.k}")
    s, margin = shift.s, shift.margin
    nonzero = np.nonzero(~emb.zero_mask)[0]
    groups: dict[tuple[int, ...], list[int]] = {}
    if nonzero.size:
        z = emb.unit_table[nonzero]
        t = z - shift.w[None, :]
        lattice = np.floor(t / s)
        resid = t - lattice * s
        good = ((resid >= margin) & (resid <= s - margin)).all(axis=1)
        keys = lattice[good].astype(np.int64)
        for cell, key in zip(nonzero[good], keys):
            groups.setdefault(tuple(int(v) for v in key), []).append(int(cell))

    ordered = sorted(groups.values(), key=lambda cells: cells[0])
    sets = tuple(CellSet(W.n, tuple(cells)) for cells in ordered)
    masses = tuple(set_mass(emb, A) for A in sets)
    all_retained = [c for cells in ordered for c in cells]
    if all_retained:
        idx = np.asarray(sorted(all_retained), dtype=np.intp)
        nrm = emb.norms[idx]
        total = _fsum(nrm * nrm * emb.degrees[idx]) / emb.n
    else:
        total = 0.0

    min_sep = math.inf
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            d = _cross_min(emb, sets[i].indices, sets[j].indices)
            if d < min_sep:
                min_sep = d
    return SeparatedFamily(
        sets=sets,
        masses=masses,
        total_mass=total,
        min_separation=min_sep,
        shift=shift,
    )


def separated_family(
    W: StepGraphon,
    emb: Embedding,
    seed: int,
    max_tries: int = 64,
    slack: float = 0.0,
    require_mass: bool = False,
) -> SeparatedFamily:
    """Retry shifts seed, seed+1, ... until the retained mass reaches k - 1/4 - slack.

    Returns the first accepted family; if none of ``max_tries`` shifts
    reaches the threshold, the best-mass family is returned flagged
    ``accepted=False`` (or ``MassShortfallError`` is raised when
    ``require_mass`` is set). Separation and per-set mass bounds hold for
    every candidate, so only the mass condition is retried.
    """
    if slack < 0.0:
        raise MassError(f"slack must be >= 0, got {slack}")
    threshold = emb.k - 0.25 - slack
    best: SeparatedFamily | None = None
    for t in range(max_tries):
        fam = shifted_grid_family(W, emb, sample_shift(emb.k, seed + t))
        if fam.total_mass >= threshold:
            return replace(fam, accepted=True, tries_used=t + 1)
        if best is None or fam.total_mass > best.total_mass:
            best = fam
    if best is None or require_mass:
        raise MassShortfallError(
            f"no shift in {max_tries} tries retained mass >= {threshold!r}"
            + (f" (best: {best.total_mass!r})" if best is not None else "")
        )
    return replace(best, accepted=False, tries_used=max_tries)


def merge_to_k(
    family: SeparatedFamily, k: int, W: StepGraphon, emb: Embedding
) -> tuple[CellSet, ...]:
    """Merge light groups until k survivors of mass >= 1/2 exist; return the k heaviest.

    While at least two groups have mass < 1/2 the two lightest are replaced
    by their union (ties by smallest contained cell). Under the accepted
    mass conditions a counting argument guarantees at least k survivors;
    with accepted slack > 0 the guarantee weakens and
    ``InsufficientSetsError`` becomes reachable.
    """
    entries = [(A.members, m) for A, m in zip(family.sets, family.masses)]
    while True:
        light = [e for e in entries if e[1] < 0.5]
        if len(light) < 2:
            break
        light.sort(key=lambda e: (e[1], e[0][0]))
        a, b = light[0], light[1]
        entries = [e for e in entries if e is not a and e is not b]
        merged = CellSet(W.n, a[0] + b[0])
        entries.append((merged.members, set_mass(emb, merged)))
    survivors = [e for e in entries if e[1] >= 0.5]
    if len(survivors) < k:
        raise InsufficientSetsError(
            f"only {len(survivors)} merged sets reached mass 1/2, need {k}"
        )
    survivors.sort(key=lambda e: (-e[1], e[0][0]))
    return tuple(CellSet(W.n, members) for members, _ in survivors[:k])


def localize(W: StepGraphon, emb: Embedding, anchors: tuple[CellSet, ...]) -> LocalizedFamily:
    """Ramp-localize the row norms around each anchor set.

    tau_i(x) = max(0, 1 - (2/delta) d_F(x, A_i)) and g_i = tau_i * ||F||,
    with tau_i = 0 against infinite distance. The delta/2 cutoff plus the
    anchors' delta-separation forces disjoint supports.
    """
    k = emb.k
    if len(anchors) != k:
        raise DimensionMismatchError(f"need {k} anchors for a k = {k} embedding, got {len(anchors)}")
    delta = separation_threshold(k)
    for A in anchors:
        if A.n != emb.n:
            raise DimensionMismatchError(f"anchor on {A.n} cells, embedding has {emb.n}")
        if len(A) == 0:
            raise EmptySetError("anchors must be nonempty")
        m = set_mass(emb, A)
        if m < 0.5:
            raise MassError(f"anchor mass {m!r} below 1/2")
    for i in range(k):
        for j in range(i + 1, k):
            d = _cross_min(emb, anchors[i].indices, anchors[j].indices)
            if d < delta:
                raise SeparationError(
                    f"anchors {i} and {j} at d_F = {d!r} < delta = {delta!r}"
                )

    ramp_rate = 2.0 / delta
    functions = []
    supports = []
    for A in anchors:
        dist = _distances_to_set(emb, A)
        tau = np.where(np.isinf(dist), 0.0, np.maximum(0.0, 1.0 - ramp_rate * dist))
        g = tau * emb.norms
        functions.append(VertexFunction(W.n, g))
        supports.append(CellSet(W.n, tuple(int(i) for i in np.nonzero(g > 0.0)[0])))

    for i in range(k):
        if not set(anchors[i].members) <= set(supports[i].members):
            raise CertificateError(f"anchor {i} escapes the support of g_{i}")
        for j in range(i + 1, k):
            if set(supports[i].members) & set(supports[j].members):
                raise CertificateError(f"supports of g_{i} and g_{j} intersect")
    return LocalizedFamily(
        delta=delta,
        supports=tuple(supports),
        functions=tuple(functions),
        anchors=tuple(anchors),
    )


def _lipschitz_slack(emb: Embedding, g: np.ndarray, scale: float) -> float:
    """min over cell pairs of scale*||F(x)-F(y)|| - |g(x)-g(y)| (>= 0 expected)."""
    n = emb.n
    if n * n <= 4_000_000:
        pairs_x, pairs_y = np.triu_indices(n, k=1)
    else:
        rng = np.random.default_rng(0)
        pairs_x = rng.integers(0, n, size=1_000_000)
        pairs_y = rng.integers(0, n, size=1_000_000)
    best = math.inf
    for i in range(0, pairs_x.size, 200_000):
        px = pairs_x[i : i + 200_000]
        py = pairs_y[i : i + 200_000]
        diff = emb.table[px] - emb.table[py]
        fdist = np.sqrt((diff * diff).sum(axis=1))
        gdiff = np.abs(g[px] - g[py])
        if px.size:
            m = float((scale * fdist - gdiff).min())
            if m < best:
                best = m
    return best


def localized_rayleigh_certificate(
    W: StepGraphon, emb: Embedding, fam: LocalizedFamily, basis: SpectralBasis
) -> LocalizationReport:
    """Check R(g_i) <= 4000 k^7 lambda_k for every localized function.

    The inequality is a theorem for this model, so a violation (beyond 1e-8
    of float headroom) raises ``CertificateError``. The report also carries
    the squared norms (>= 1/2) and the sampled Lipschitz slack of each g_i
    against the scale 1 + 4/delta.
    """
    k = len(fam.functions)
    if basis.k != k:
        raise DimensionMismatchError(f"basis has k = {basis.k}, family has {k} functions")
    lam = float(basis.eigenvalues[k - 1])
    bound = 4000.0 * k**7 * lam
    scale = 1.0 + 4.0 / fam.delta
    r_values, norms_sq, slacks = [], [], []
    for i, g in enumerate(fam.functions):
        r = rayleigh(W, g)
        if r > bound + 1e-8:
            raise CertificateError(
                f"R(g_{i}) = {r!r} exceeds 4000 k^7 lambda_k = {bound!r}"
            )
        r_values.append(r)
        nsq = inner_v(W, g, g)
        if nsq < 0.5:
            raise CertificateError(f"||g_{i}||_v^2 = {nsq!r} below 1/2")
        norms_sq.append(nsq)
        slacks.append(_lipschitz_slack(emb, g.values, scale))
    return LocalizationReport(
        k=k,
        lambda_discrete=lam,
        bound=bound,
        rayleigh_values=tuple(r_values),
        norm_sq=tuple(norms_sq),
        lipschitz_scale=scale,
        lipschitz_slack=tuple(slacks),
    )


def sweep_profile(W: StepGraphon, g) -> list[SweepStep]:
    """Expansion of every threshold prefix {x : g(x)^2 >= t}, t descending.

    Cells are ordered by g^2 descending (ties by index); each strict drop in
    value closes a prefix. Prefixes with zero vertex measure are skipped
    (possible only with zero-degree cells). Cut values come from cumulative
    sums, clamped at zero against rounding.
    """
    fv = _as_values(g, W.n)
    if _fsum(fv * fv * W.degrees) / W.n == 0.0:
        raise ZeroFunctionError("sweep needs a function with positive weighted norm")
    n = W.n
    vals = fv * fv
    order = np.lexsort((np.arange(n), -vals))
    sorted_vals = vals[order]
    dp = W.degrees[order]
    Kp = W.kernel[np.ix_(order, order)]
    inc = 2.0 * np.tril(Kp, -1).sum(axis=1) + np.diag(Kp)
    vol_cum = np.cumsum(dp) / n
    int_cum = np.cumsum(inc) / (n * n)
    cut_cum = np.maximum(vol_cum - int_cum, 0.0)

    steps = []
    for m in range(1, n + 1):
        level = sorted_vals[m - 1]
        if level == 0.0:
            break
        if m < n and sorted_vals[m] == level:
            continue  # same threshold: the prefix is not closed yet
        vol = float(vol_cum[m - 1])
        if vol <= 0.0:
            continue
        cut = float(cut_cum[m - 1])
        steps.append(
            SweepStep(threshold=float(level), size=m, volume=vol, cut=cut, expansion=cut / vol)
        )
    return steps


def sweep_cut(W: StepGraphon, g) -> CellSet:
    """Best threshold prefix of g^2: a subset of supp(g) with h <= sqrt(2 R(g)).

    Returns the prefix minimizing the expansion (ties go to the smaller
    set); the bound against the Rayleigh quotient is re-verified on the
    exact measure path and certified.
    """
    fv = _as_values(g, W.n)
    steps = sweep_profile(W, fv)
    best = None
    for step in steps:
        if best is None or step.expansion < best.expansion:
            best = step
    if best is None:
        raise ZeroFunctionError("no threshold prefix has positive vertex measure")
    vals = fv * fv
    order = np.lexsort((np.arange(W.n), -vals))
    cells = CellSet(W.n, tuple(int(i) for i in order[: best.size]))
    h = expansion(W, cells)
    limit = math.sqrt(2.0 * rayleigh(W, fv))
    if h > limit + 1e-10:
        raise CertificateError(f"sweep expansion {h!r} exceeds sqrt(2 R) = {limit!r}")
    return cells
