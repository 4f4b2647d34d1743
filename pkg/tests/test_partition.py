"""Rounding machinery: pseudo-metric, shifted grid, merge, localize, sweep."""

import math

import numpy as np
import pytest

from graphon_cheeger import (
    CellSet,
    EmptySetError,
    MassError,
    MassShortfallError,
    SeparationError,
    ZeroFunctionError,
    build_embedding,
    distance_to_set,
    eigen_k,
    expansion,
    grid_side,
    localize,
    localized_rayleigh_certificate,
    merge_to_k,
    new_graphon,
    radial_distance,
    rayleigh,
    sample_shift,
    separated_family,
    separation_threshold,
    set_mass,
    shifted_grid_family,
    sweep_cut,
    sweep_profile,
)
from graphon_cheeger.partition import GridShift, SeparatedFamily
from graphon_cheeger.spectral import Embedding
from conftest import random_connected_graphon


def make_embedding(rows, degrees=None):
    """Embedding with hand-picked unit rows (norms 1) for geometry tests."""
    rows = np.asarray(rows, dtype=float)
    n, k = rows.shape
    norms = np.sqrt((rows * rows).sum(axis=1))
    zero = norms <= 1e-300
    unit = rows.copy()
    unit[~zero] = rows[~zero] / norms[~zero, None]
    unit[zero] = 0.0
    return Embedding(
        n=n,
        k=k,
        table=rows,
        norms=norms,
        unit_table=unit,
        zero_mask=zero,
        degrees=np.ones(n) if degrees is None else np.asarray(degrees, dtype=float),
    )


class TestRadialDistance:
    def test_reflexive(self):
        emb = make_embedding([[1.0, 0.0], [0.0, 1.0]])
        assert radial_distance(emb, 0, 0) == 0.0

    def test_orthogonal_units(self):
        emb = make_embedding([[1.0, 0.0], [0.0, 1.0]])
        assert radial_distance(emb, 0, 1) == math.sqrt(2.0)

    def test_same_ray(self):
        emb = make_embedding([[2.0, 0.0], [5.0, 0.0]])
        assert radial_distance(emb, 0, 1) == 0.0

    def test_zero_rows(self):
        emb = make_embedding([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
        assert radial_distance(emb, 0, 1) == 0.0
        assert radial_distance(emb, 0, 2) == math.inf

    def test_index_errors(self):
        emb = make_embedding([[1.0, 0.0]])
        with pytest.raises(IndexError):
            radial_distance(emb, 0, 1)
        with pytest.raises(IndexError):
            radial_distance(emb, -1, 0)

    def test_pseudo_metric_axioms(self, rng):
        n, k = 12, 3
        rows = rng.normal(size=(n, k))
        rows[0] = 0.0  # one zero row in the mix
        emb = make_embedding(rows)
        for _ in range(200):
            x, y, z = rng.integers(0, n, size=3)
            dxy = radial_distance(emb, x, y)
            assert dxy == radial_distance(emb, y, x)
            dxz = radial_distance(emb, x, z)
            dzy = radial_distance(emb, z, y)
            if math.isfinite(dxz) and math.isfinite(dzy):
                assert dxy <= dxz + dzy + 1e-12


class TestDistanceToSet:
    def test_member_is_zero(self):
        emb = make_embedding([[1.0, 0.0], [0.0, 1.0]])
        assert distance_to_set(emb, 0, CellSet(2, (0, 1))) == 0.0

    def test_all_zero_set(self):
        emb = make_embedding([[0.0, 0.0], [1.0, 0.0]])
        assert distance_to_set(emb, 1, CellSet(2, (0,))) == math.inf

    def test_quarter_circle(self):
        emb = make_embedding([[1.0, 0.0], [0.0, 1.0]])
        assert distance_to_set(emb, 0, CellSet(2, (1,))) == math.sqrt(2.0)

    def test_empty_set(self):
        emb = make_embedding([[1.0, 0.0]])
        with pytest.raises(EmptySetError):
            distance_to_set(emb, 0, CellSet(1, ()))

    def test_matches_pointwise_min(self, rng):
        n, k = 10, 2
        rows = rng.normal(size=(n, k))
        emb = make_embedding(rows)
        for _ in range(50):
            x = int(rng.integers(0, n))
            size = int(rng.integers(1, n + 1))
            A = CellSet(n, tuple(int(i) for i in rng.choice(n, size=size, replace=False)))
            direct = min(radial_distance(emb, x, y) for y in A.members)
            assert distance_to_set(emb, x, A) == direct


class TestSampleShift:
    def test_k1_constants(self):
        shift = sample_shift(1, seed=0)
        assert abs(shift.s - 0.4472135954999579) <= 1e-15
        assert 0.0 <= shift.w[0] < shift.s
        assert shift.margin == shift.s / 8.0

    def test_determinism(self):
        a = sample_shift(3, seed=42)
        b = sample_shift(3, seed=42)
        assert np.array_equal(a.w, b.w)

    def test_uniformity(self):
        k = 2
        s = grid_side(k)
        samples = np.array([sample_shift(k, seed).w for seed in range(100_000)])
        assert samples.min() >= 0.0 and samples.max() < s
        # mean of U[0,s) is s/2 with sd s/sqrt(12)/sqrt(N)
        sigma = s / math.sqrt(12.0) / math.sqrt(len(samples))
        for i in range(k):
            assert abs(samples[:, i].mean() - s / 2.0) <= 3.0 * sigma


class TestShiftedGridFamily:
    def test_k1_single_cluster(self):
        # All projections sit at +1 on S^0; a shift either keeps everything
        # (one set, full mass) or discards everything.
        W = new_graphon(np.ones((8, 8)))
        emb = build_embedding(eigen_k(W, 1))
        seen_total = set()
        for seed in range(40):
            fam = shifted_grid_family(W, emb, sample_shift(1, seed))
            assert len(fam.sets) in (0, 1)
            if fam.sets:
                assert len(fam.sets[0]) == 8
            seen_total.add(round(fam.total_mass, 9))
        assert seen_total == {0.0, 1.0}

    def test_closed_boundary_membership(self):
        # A projection exactly on the shrunk-cube boundary is retained; a
        # hair inside the margin is not. The embedding is built field by
        # field so the boundary coordinate survives normalization exactly.
        k = 2
        s = grid_side(k)
        m = s / (8.0 * k * k)
        q = math.sqrt(1.0 - m * m)
        rows = np.array([[m, q], [m * (1.0 - 1e-9), q]])
        emb = Embedding(
            n=2,
            k=2,
            table=rows,
            norms=np.ones(2),
            unit_table=rows,
            zero_mask=np.zeros(2, dtype=bool),
            degrees=np.ones(2),
        )
        shift = GridShift(k=k, s=s, w=np.zeros(k), margin=m, seed=0)
        W = new_graphon(np.ones((2, 2)))
        fam = shifted_grid_family(W, emb, shift)
        retained = {c for A in fam.sets for c in A.members}
        assert retained == {0}

    def test_antipodal_clusters_never_merge(self):
        # Distance-2 clusters exceed any cube diameter, so they can never
        # land in one set.
        W = new_graphon(np.ones((4, 4)))
        rows = np.array([[1.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [-1.0, 0.0]])
        emb = make_embedding(rows)
        for seed in range(50):
            fam = shifted_grid_family(W, emb, sample_shift(2, seed))
            for A in fam.sets:
                signs = {emb.unit_table[c, 0] for c in A.members}
                assert signs in ({1.0}, {-1.0})

    def test_certificates_on_every_shift(self, rng):
        for _ in range(10):
            n = int(rng.integers(8, 32))
            W = random_connected_graphon(rng, n)
            k = int(rng.integers(2, 5))
            emb = build_embedding(eigen_k(W, k))
            fam = shifted_grid_family(W, emb, sample_shift(k, int(rng.integers(0, 1 << 32))))
            delta = separation_threshold(k)
            assert fam.min_separation >= delta
            cap = 1.0 + 1.0 / (4.0 * k)
            for mass in fam.masses:
                assert mass <= cap + 1e-10
            # masses add up to the reported total
            assert abs(math.fsum(fam.masses) - fam.total_mass) <= 1e-12


class TestSeparatedFamily:
    def test_ones_64_k2_accepts(self):
        W = new_graphon(np.ones((64, 64)))
        emb = build_embedding(eigen_k(W, 2))
        fam = separated_family(W, emb, seed=0, max_tries=64, slack=0.0)
        assert fam.accepted
        assert fam.total_mass >= 2.0 - 0.25

    def test_zero_tries(self, rng):
        W = random_connected_graphon(rng, 8)
        emb = build_embedding(eigen_k(W, 2))
        with pytest.raises(MassShortfallError):
            separated_family(W, emb, seed=0, max_tries=0)

    def test_separation_regardless_of_seed(self, rng):
        W = random_connected_graphon(rng, 24)
        k = 3
        emb = build_embedding(eigen_k(W, k))
        for seed in range(20):
            fam = separated_family(W, emb, seed=seed, max_tries=4)
            assert fam.min_separation >= separation_threshold(k)

    def test_determinism_and_flagging(self, rng):
        W = random_connected_graphon(rng, 16)
        emb = build_embedding(eigen_k(W, 3))
        a = separated_family(W, emb, seed=5)
        b = separated_family(W, emb, seed=5)
        assert a.total_mass == b.total_mass
        assert [A.members for A in a.sets] == [B.members for B in b.sets]
        assert np.array_equal(a.shift.w, b.shift.w)


class TestMergeToK:
    def _family(self, emb, sets):
        masses = tuple(set_mass(emb, A) for A in sets)
        return SeparatedFamily(
            sets=tuple(sets),
            masses=masses,
            total_mass=math.fsum(masses),
            min_separation=math.inf,
            shift=sample_shift(emb.k, 0),
            accepted=True,
            tries_used=1,
        )

    def test_already_heavy_sets_untouched(self):
        W = new_graphon(np.ones((4, 4)))
        # two singletons with mass 0.8 each via degree weights
        emb = make_embedding(
            [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
            degrees=[3.2, 3.2, 0.4, 0.4],
        )
        sets = [CellSet(4, (0,)), CellSet(4, (1,))]
        fam = self._family(emb, sets)
        out = merge_to_k(fam, 2, W, emb)
        assert sorted(A.members for A in out) == [(0,), (1,)]

    def test_hand_trace_merge(self):
        # masses (0.3, 0.3, 0.6) at k = 2: the two light sets merge.
        W = new_graphon(np.ones((3, 3)))
        emb = make_embedding(
            [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]], degrees=[0.9, 0.9, 1.8]
        )
        sets = [CellSet(3, (0,)), CellSet(3, (1,)), CellSet(3, (2,))]
        fam = self._family(emb, sets)
        out = merge_to_k(fam, 2, W, emb)
        members = sorted(A.members for A in out)
        assert members == [(0, 1), (2,)]
        for A in out:
            assert abs(set_mass(emb, A) - 0.6) <= 1e-12

    def test_counting_bound(self, rng):
        # Any accepted family yields at least k survivors of mass >= 1/2.
        for _ in range(10):
            n = int(rng.integers(16, 48))
            W = random_connected_graphon(rng, n)
            k = int(rng.integers(2, 5))
            emb = build_embedding(eigen_k(W, k))
            fam = separated_family(W, emb, seed=int(rng.integers(0, 1 << 16)))
            if not fam.accepted:
                continue
            out = merge_to_k(fam, k, W, emb)
            assert len(out) == k
            for A in out:
                assert set_mass(emb, A) >= 0.5


class TestLocalize:
    def _setup(self, rng, n=20, k=2, seed=0):
        W = random_connected_graphon(rng, n)
        emb = build_embedding(eigen_k(W, k))
        fam = separated_family(W, emb, seed=seed)
        anchors = merge_to_k(fam, k, W, emb)
        return W, emb, anchors

    def test_anchor_cells_keep_norm(self, rng):
        W, emb, anchors = self._setup(rng)
        loc = localize(W, emb, anchors)
        for A, g in zip(anchors, loc.functions):
            for x in A.members:
                assert g.values[x] == emb.norms[x]

    def test_ramp_values(self):
        # d_F = delta/4 gives tau = 1/2; d_F >= delta/2 gives zero.
        k = 2
        delta = separation_threshold(k)
        alpha = 2.0 * math.asin(delta / 8.0)  # chord delta/4 from (1,0)
        beta = 2.0 * math.asin(delta / 2.0)  # chord delta from (1,0)
        rows = [
            [1.0, 0.0],
            [-1.0, 0.0],
            [math.cos(alpha), math.sin(alpha)],
            [math.cos(beta), math.sin(beta)],
        ]
        emb = make_embedding(rows, degrees=[2.5, 2.5, 0.1, 0.1])
        W = new_graphon(np.ones((4, 4)))
        anchors = (CellSet(4, (0,)), CellSet(4, (1,)))
        loc = localize(W, emb, anchors)
        g0 = loc.functions[0].values
        assert abs(g0[2] - 0.5) <= 1e-9  # tau = 1/2 on the quarter-delta cell
        assert g0[3] == 0.0  # at the delta/2 cutoff exactly

    def test_separation_and_mass_guards(self):
        W = new_graphon(np.ones((4, 4)))
        emb = make_embedding(
            [[1.0, 0.0], [1.0, 1e-6], [-1.0, 0.0], [0.0, 1.0]],
            degrees=[2.1, 2.1, 2.1, 2.1],
        )
        with pytest.raises(SeparationError):
            localize(W, emb, (CellSet(4, (0,)), CellSet(4, (1,))))
        light = make_embedding([[1.0, 0.0], [-1.0, 0.0]], degrees=[0.1, 0.1])
        W2 = new_graphon(np.ones((2, 2)))
        with pytest.raises(MassError):
            localize(W2, light, (CellSet(2, (0,)), CellSet(2, (1,))))

    def test_supports_disjoint_and_anchored(self, rng):
        for trial in range(6):
            W, emb, anchors = self._setup(rng, n=int(rng.integers(12, 40)), k=3, seed=trial)
            loc = localize(W, emb, anchors)
            seen = set()
            for sup in loc.supports:
                assert not seen & set(sup.members)
                seen |= set(sup.members)
            for A, sup in zip(anchors, loc.supports):
                assert set(A.members) <= set(sup.members)


class TestLocalizedCertificate:
    def test_k1_zero_rayleigh(self, rng):
        W = random_connected_graphon(rng, 10)
        emb = build_embedding(eigen_k(W, 1))
        fam = separated_family(W, emb, seed=0)
        anchors = merge_to_k(fam, 1, W, emb)
        loc = localize(W, emb, anchors)
        report = localized_rayleigh_certificate(W, emb, loc, eigen_k(W, 1))
        assert report.rayleigh_values[0] <= 1e-12

    def test_bound_and_lipschitz(self, rng):
        for trial in range(5):
            n = int(rng.integers(12, 40))
            k = int(rng.integers(2, 4))
            W = random_connected_graphon(rng, n)
            basis = eigen_k(W, k)
            emb = build_embedding(basis)
            fam = separated_family(W, emb, seed=trial)
            anchors = merge_to_k(fam, k, W, emb)
            loc = localize(W, emb, anchors)
            report = localized_rayleigh_certificate(W, emb, loc, basis)
            for r in report.rayleigh_values:
                assert r <= report.bound + 1e-8
            for nsq in report.norm_sq:
                assert nsq >= 0.5
            for slack in report.lipschitz_slack:
                assert slack >= -1e-9


class TestSweep:
    def test_indicator_on_ones(self):
        W = new_graphon(np.ones((2, 2)))
        out = sweep_cut(W, np.array([1.0, 0.0]))
        assert out.members == (0,)
        assert expansion(W, out) == 0.5

    def test_constant_returns_everything(self, rng):
        W = random_connected_graphon(rng, 7)
        out = sweep_cut(W, np.full(7, 3.0))
        assert out.members == tuple(range(7))
        assert expansion(W, out) == 0.0

    def test_zero_function(self):
        W = new_graphon(np.ones((3, 3)))
        with pytest.raises(ZeroFunctionError):
            sweep_cut(W, np.zeros(3))

    def test_profile_descending_and_minimizer(self, rng):
        W = random_connected_graphon(rng, 12)
        g = rng.normal(size=12)
        steps = sweep_profile(W, g)
        thresholds = [s.threshold for s in steps]
        assert thresholds == sorted(thresholds, reverse=True)
        best = min(steps, key=lambda s: (s.expansion, s.size))
        out = sweep_cut(W, g)
        assert len(out) == best.size

    def test_bound_and_family_optimality(self, rng):
        # Independent oracle: rebuild every threshold prefix directly from
        # the values of g^2 and evaluate h on the exact measure path.
        for _ in range(20):
            n = int(rng.integers(4, 11))
            W = random_connected_graphon(rng, n)
            g = rng.normal(size=n) * (rng.random(n) < 0.8)
            if np.all(g == 0.0):
                continue
            out = sweep_cut(W, g)
            h_out = expansion(W, out)
            assert h_out <= math.sqrt(2.0 * rayleigh(W, g)) + 1e-10
            levels = sorted({v for v in (g * g).tolist() if v > 0.0}, reverse=True)
            family_best = min(
                expansion(W, CellSet(n, tuple(i for i in range(n) if g[i] * g[i] >= lvl)))
                for lvl in levels
            )
            assert abs(h_out - family_best) <= 1e-10

    def test_never_beats_global_optimum(self, rng):
        # Exhaustive subsets of supp(g): the sweep is at best the optimum.
        for _ in range(5):
            n = int(rng.integers(4, 9))
            W = random_connected_graphon(rng, n)
            g = rng.normal(size=n)
            out = sweep_cut(W, g)
            h_out = expansion(W, out)
            supp = [i for i in range(n) if g[i] != 0.0]
            best = math.inf
            for mask in range(1, 1 << len(supp)):
                cells = tuple(supp[i] for i in range(len(supp)) if mask >> i & 1)
                best = min(best, expansion(W, CellSet(n, cells)))
            assert h_out >= best - 1e-12
