import itertools
import math

import numpy as np
import pytest

from anisolab.anisotropy import decompose, isotropic
from anisolab.errors import DegenerateCubeError, GridError, ParameterWindowError
from anisolab.grid import (
    AnnulusBand,
    GridFunction,
    KBoxBand,
    ProductBallBand,
    constant,
    exponential,
    make_grid,
    random_bandlimited,
)
from anisolab.mixed_norm import SpaceSpec
from anisolab.smoothness import (
    DifferenceProfile,
    DyadicCube,
    averaged_difference,
    difference,
    difference_field,
    difference_fields_batch,
    difference_norm,
    maximal,
    oscillation,
    peetre_maximal,
    usable_difference_scales,
)


class TestDifference:
    def test_first_order_definition(self):
        g = make_grid((32,))
        rng = np.random.default_rng(0)
        f = GridFunction(g, rng.standard_normal(32))
        d = difference(f, np.array([3]), 1)
        want = np.roll(f.values, -3, axis=0) - f.values
        assert np.array_equal(d.values, want)

    def test_constant_annihilated(self):
        g = make_grid((32,))
        c = constant(g, 4.2)
        for M in (1, 2, 3):
            assert np.max(np.abs(difference(c, np.array([5]), M).values)) <= 1e-13

    def test_exponential_binomial_oracle(self):
        g = make_grid((64,))
        f = exponential(g, [3])
        for M in (1, 2, 3):
            d = difference(f, np.array([5]), M)
            factor = (np.exp(2j * np.pi * 3 * 5 / 64) - 1.0) ** M
            assert np.max(np.abs(d.values - factor * f.values)) <= 1e-13

    def test_spectral_shift_path(self):
        g = make_grid((64,))
        f = exponential(g, [3])
        h = 0.0317
        d = difference(f, np.array([h]), 2)
        factor = (np.exp(2j * np.pi * 3 * h) - 1.0) ** 2
        assert np.max(np.abs(d.values - factor * f.values)) <= 1e-12

    def test_semigroup_exact(self):
        g = make_grid((32,))
        rng = np.random.default_rng(1)
        f = GridFunction(g, rng.standard_normal(32))
        h = np.array([4])
        repeated = difference(difference(difference(f, h, 1), h, 1), h, 1)
        direct = difference(f, h, 3)
        assert np.max(np.abs(repeated.values - direct.values)) <= 1e-12

    def test_binomial_identity_both_paths(self):
        g = make_grid((32,))
        rng = np.random.default_rng(2)
        f = GridFunction(g, rng.standard_normal(32) + 1j * rng.standard_normal(32))
        h = np.array([3])
        M = 3
        explicit = sum(
            (-1.0) ** j * math.comb(M, j) * np.roll(f.values, -(M - j) * 3, axis=0)
            for j in range(M + 1)
        )
        assert np.max(np.abs(difference(f, h, M).values - explicit)) <= 1e-12

    def test_order_validation(self):
        g = make_grid((32,))
        with pytest.raises(ValueError):
            difference(constant(g), np.array([1]), 0)


class TestDifferenceField:
    def test_constant_zero_field(self):
        g = make_grid((32, 32))
        va = isotropic([1, 1])
        prof = DifferenceProfile(anisotropy=va, M=2, phi=(1.0, 1.0))
        fld = difference_field(constant(g, 3.0), 2, prof)
        assert np.max(np.abs(fld)) <= 1e-13

    def test_single_exponential_quadrature_oracle(self):
        # the field of a pure frequency is constant and equals the lattice
        # ball mean of |e^{i xi h} - 1|^M, computed here independently
        g = make_grid((64,))
        va = isotropic([1])
        prof = DifferenceProfile(anisotropy=va, M=2, phi=(1.0,))
        n = 3
        f = exponential(g, [3])
        fld = difference_field(f, n, prof)
        radius = 2.0**-n
        ms = [m for m in range(-32, 32) if abs(m / 64) <= radius + 1e-12]
        vals = [abs((np.exp(2j * np.pi * 3 * m / 64) - 1.0) ** 2) for m in ms]
        want = np.mean(vals)
        assert np.std(fld) <= 1e-12
        assert fld[0] == pytest.approx(want, rel=1e-12)

    def test_smooth_decay_slope(self):
        # fine-scale fields of a smooth function decay like 2^{-n M}
        g = make_grid((256,))
        va = isotropic([1])
        prof = DifferenceProfile(anisotropy=va, M=2, phi=(1.0,))
        f = exponential(g, [1])
        scales = [4, 5, 6]
        mags = [np.mean(difference_field(f, n, prof)) for n in scales]
        slopes = np.diff(np.log2(mags))
        assert np.all(np.abs(slopes + 2.0) <= 0.2)

    def test_mixed_phi_recursion_matches_batch_at_one(self):
        g = make_grid((32, 32))
        va = decompose([np.diag([1.0]), np.diag([2.0])])
        prof = DifferenceProfile(anisotropy=va, M=2, phi=(1.0, 1.0))
        f = random_bandlimited(g, 3, KBoxBand((3, 2)))
        scales, _ = usable_difference_scales(g, prof)
        batch = difference_fields_batch(f, scales, prof)
        for i, n in enumerate(scales):
            single = difference_field(f, n, prof)
            assert np.max(np.abs(batch[i] - single)) <= 1e-12

    def test_phi_two_differs_and_dominates(self):
        g = make_grid((64,))
        va = isotropic([1])
        f = random_bandlimited(g, 5, KBoxBand((5,)))
        p1 = DifferenceProfile(anisotropy=va, M=2, phi=(1.0,))
        p2 = DifferenceProfile(anisotropy=va, M=2, phi=(2.0,))
        f1 = difference_field(f, 3, p1)
        f2 = difference_field(f, 3, p2)
        assert np.all(f2 >= f1 - 1e-12)  # power-mean inequality

    def test_guard_reports_small_ball(self):
        g = make_grid((16,))
        va = isotropic([1])
        prof = DifferenceProfile(anisotropy=va, M=2, phi=(1.0,))
        usable, skipped = usable_difference_scales(g, prof)
        assert usable == [1, 2, 3, 4]
        assert 5 in skipped
        with pytest.raises(ParameterWindowError):
            difference_field(constant(g), 5, prof)

    def test_quasi_mode_matches_product_for_scalar_blocks(self):
        # for 1-dim scalar blocks the quasi ball radius 2^-n equals the
        # product ball radii 2^{-n a_j}
        g = make_grid((32, 32))
        va = decompose([np.diag([1.0]), np.diag([2.0])])
        f = random_bandlimited(g, 6, KBoxBand((3, 2)))
        pq = DifferenceProfile(anisotropy=va, M=2, phi=(1.0, 1.0), mode="quasi")
        pp = DifferenceProfile(anisotropy=va, M=2, phi=(1.0, 1.0), mode="product")
        a = difference_field(f, 2, pq)
        b = difference_field(f, 2, pp)
        assert np.max(np.abs(a - b)) <= 1e-12


class TestAveragedDifference:
    def test_constant_zero(self):
        g = make_grid((32,))
        va = isotropic([1])
        out = averaged_difference(constant(g, 2.0), 2, 2, va)
        assert np.max(np.abs(out.values)) <= 1e-13

    def test_dominated_by_unsigned_field(self):
        g = make_grid((64,))
        va = isotropic([1])
        f = random_bandlimited(g, 7, KBoxBand((5,)))
        prof = DifferenceProfile(anisotropy=va, M=2, phi=(1.0,), mode="quasi")
        signed = averaged_difference(f, 2, 3, va)
        unsigned = difference_field(f, 3, prof)
        assert np.all(np.abs(signed.values[..., 0]) <= unsigned + 1e-12)

    def test_exponential_ball_average_oracle(self):
        g = make_grid((64,))
        va = isotropic([1])
        n = 3
        f = exponential(g, [3])
        out = averaged_difference(f, 2, n, va)
        ms = [m for m in range(-32, 32) if abs(m / 64) <= 2.0**-n + 1e-12]
        want = np.mean([(np.exp(2j * np.pi * 3 * m / 64) - 1.0) ** 2 for m in ms])
        ratio = out.values[..., 0] / f.values[..., 0]
        assert np.max(np.abs(ratio - want)) <= 1e-12


class TestDifferenceNorm:
    @pytest.fixture
    def setting(self):
        g = make_grid((64,))
        va = isotropic([1])
        spec = SpaceSpec(kind="F", s=1.0, p=(2.0,), q=2.0, anisotropy=va)
        prof = DifferenceProfile(anisotropy=va, M=2, phi=(1.0,))
        return g, va, spec, prof

    def test_zero(self, setting):
        g, va, spec, prof = setting
        z = GridFunction(g, np.zeros(64))
        assert difference_norm(z, spec, prof).value == 0.0

    def test_constant_reduces_to_lp(self, setting):
        g, va, spec, prof = setting
        nv = difference_norm(constant(g, 3.0), spec, prof)
        assert nv.value == pytest.approx(3.0, rel=1e-12)

    def test_window_violation_smoothness(self, setting):
        g, va, _, prof = setting
        bad = SpaceSpec(kind="F", s=-0.5, p=(2.0,), q=2.0, anisotropy=va)
        with pytest.raises(ParameterWindowError):
            difference_norm(constant(g), bad, prof)

    def test_window_violation_order(self, setting):
        g, va, _, _ = setting
        spec = SpaceSpec(kind="F", s=1.0, p=(2.0,), q=2.0, anisotropy=va)
        prof = DifferenceProfile(anisotropy=va, M=1, phi=(1.0,))
        with pytest.raises(ParameterWindowError):
            difference_norm(constant(g), spec, prof)

    def test_window_violation_p(self, setting):
        g, va, _, prof = setting
        spec = SpaceSpec(kind="F", s=1.0, p=(1.0,), q=2.0, anisotropy=va)
        with pytest.raises(ParameterWindowError):
            difference_norm(constant(g), spec, prof)

    def test_positive_for_band_function(self, setting):
        g, va, spec, prof = setting
        f = random_bandlimited(g, 8, AnnulusBand(va, 5.0, 20.0))
        nv = difference_norm(f, spec, prof)
        assert nv.value > 0
        assert len(nv.pieces) >= 2


class TestMaximal:
    def test_constant(self):
        g = make_grid((32, 32))
        va = isotropic([1, 1])
        out = maximal(constant(g, 1.5), va, (1.0, 1.0))
        assert np.max(np.abs(out - 1.5)) <= 1e-13

    def test_dominates_modulus(self):
        g = make_grid((64,))
        va = isotropic([1])
        f = random_bandlimited(g, 9, AnnulusBand(va, 5.0, 30.0))
        out = maximal(f, va, (1.0,))
        assert np.all(out >= f.modulus() - 1e-13)

    def test_indicator_direct_sup_oracle(self):
        # brute-force dyadic-window means reproduced exactly
        g = make_grid((32,))
        va = isotropic([1])
        vals = np.zeros(32)
        vals[:16] = 1.0
        f = GridFunction(g, vals)
        got = maximal(f, va, (1.0,))

        offs = np.arange(-16, 16)
        rho = np.abs(offs) / 32.0
        nonzero = np.sort(rho[rho > 0])
        levels = []
        thresh = nonzero[0]
        while thresh <= nonzero[-1] * (1 + 1e-12):
            levels.append(thresh)
            thresh *= 2
        want = np.abs(vals).copy()
        for lev in levels:
            sel = offs[rho <= lev * (1 + 1e-12)]
            for x in range(32):
                m = np.mean(np.abs(vals[(x + sel) % 32]))
                want[x] = max(want[x], m)
        assert np.max(np.abs(got - want)) <= 1e-13

    def test_monotone_lattice_bound(self):
        g = make_grid((32,))
        va = isotropic([1])
        rng = np.random.default_rng(10)
        f = np.abs(rng.standard_normal(32))
        gv = f + np.abs(rng.standard_normal(32))
        mf = maximal(GridFunction(g, f), va, (1.0,))
        mg = maximal(GridFunction(g, gv), va, (1.0,))
        assert np.all(mf <= mg + 1e-13)

    def test_sublinear(self):
        g = make_grid((32,))
        va = isotropic([1])
        rng = np.random.default_rng(11)
        f = GridFunction(g, rng.standard_normal(32))
        h = GridFunction(g, rng.standard_normal(32))
        mfh = maximal(f + h, va, (1.0,))
        assert np.all(mfh <= maximal(f, va, (1.0,)) + maximal(h, va, (1.0,)) + 1e-12)

    def test_r_exponent(self):
        g = make_grid((32,))
        va = isotropic([1])
        f = random_bandlimited(g, 12, KBoxBand((4,)))
        m1 = maximal(f, va, (1.0,))
        m2 = maximal(f, va, (2.0,))
        assert np.all(m2 >= m1 - 1e-12)  # power-mean inequality


class TestPeetre:
    def test_constant_attains_at_origin(self):
        g = make_grid((32, 32))
        va = isotropic([1, 1])
        out = peetre_maximal(constant(g, 2.0), va, (1.0, 1.0), (10.0, 10.0))
        assert np.max(np.abs(out - 2.0)) == 0.0

    def test_dominates_modulus(self):
        g = make_grid((64,))
        va = isotropic([1])
        f = random_bandlimited(g, 13, ProductBallBand(va, (20.0,)))
        out = peetre_maximal(f, va, (1.0,), (20.0,))
        assert np.all(out >= f.modulus() - 1e-13)

    def test_band_precondition_checked(self):
        g = make_grid((64,))
        va = isotropic([1])
        f = exponential(g, [8])  # rho = 16 pi ~ 50
        with pytest.raises(GridError):
            peetre_maximal(f, va, (1.0,), (10.0,))

    def test_controlled_by_maximal(self):
        g = make_grid((64,))
        va = isotropic([1])
        ratios = []
        for seed in range(10):
            f = random_bandlimited(g, seed, ProductBallBand(va, (25.0,)))
            star = peetre_maximal(f, va, (1.0,), (25.0,))
            hl = maximal(f, va, (1.0,))
            ratios.append(np.max(star / hl))
        assert max(ratios) < 10.0


class TestCubesAndOscillation:
    def test_cubes_tile_fundamental_domain(self):
        g = make_grid((16, 16))
        va = decompose([np.diag([1.0]), np.diag([1.0])])
        n = 2
        total = 0
        seen = set()
        for k in itertools.product(range(2**n), repeat=2):
            cube = DyadicCube(anisotropy=va, scale=n, index=k)
            idx, _ = cube.lattice_points(g)
            total += len(idx)
            for row in idx:
                seen.add(tuple(int(v) for v in row))
        assert total == 256
        assert len(seen) == 256

    def test_widened_cube_concentric(self):
        va = decompose([np.diag([1.0])])
        cube = DyadicCube(anisotropy=va, scale=0, index=(0,), widen=3.0)
        lo, hi = cube.box_bounds()
        assert lo[0] == pytest.approx(-1.0)
        assert hi[0] == pytest.approx(2.0)

    def test_polynomial_annihilation(self):
        g = make_grid((32,))
        va = decompose([np.diag([1.0])])
        x = g.axis_coords(0)
        f = GridFunction(g, 2.0 + 3.0 * x)  # degree 1
        cube = DyadicCube(anisotropy=va, scale=2, index=(1,))
        res = oscillation(f, 2, cube, 2.0)
        assert res.error <= 1e-10

    def test_mean_subtraction_identity(self):
        g = make_grid((32,))
        va = decompose([np.diag([1.0])])
        rng = np.random.default_rng(14)
        f = GridFunction(g, rng.standard_normal(32))
        cube = DyadicCube(anisotropy=va, scale=1, index=(0,))
        idx, _ = cube.lattice_points(g)
        samples = f.values[tuple(idx.T) + (0,)]
        res = oscillation(f, 1, cube, 2.0)
        want = np.std(samples) * np.sqrt(len(samples) * g.cell_volume)
        assert res.error == pytest.approx(want, rel=1e-10)

    def test_normalized_of_one_with_no_subtraction(self):
        g = make_grid((32,))
        va = decompose([np.diag([1.0])])
        cube = DyadicCube(anisotropy=va, scale=1, index=(1,))
        res = oscillation(constant(g, 1.0), 0, cube, 2.0)
        assert res.normalized == pytest.approx(1.0, rel=1e-12)

    def test_order_monotone(self):
        g = make_grid((32,))
        va = decompose([np.diag([1.0])])
        rng = np.random.default_rng(15)
        f = GridFunction(g, rng.standard_normal(32))
        cube = DyadicCube(anisotropy=va, scale=1, index=(0,))
        e1 = oscillation(f, 1, cube, 2.0).error
        e2 = oscillation(f, 2, cube, 2.0).error
        e3 = oscillation(f, 3, cube, 2.0).error
        assert e3 <= e2 + 1e-12 and e2 <= e1 + 1e-12

    def test_wider_cube_larger_error(self):
        g = make_grid((32,))
        va = decompose([np.diag([1.0])])
        rng = np.random.default_rng(16)
        f = GridFunction(g, rng.standard_normal(32))
        narrow = DyadicCube(anisotropy=va, scale=2, index=(1,))
        wide = DyadicCube(anisotropy=va, scale=2, index=(1,), widen=3.0)
        assert oscillation(f, 2, wide, 2.0).error >= oscillation(f, 2, narrow, 2.0).error - 1e-12

    def test_degenerate_cube_rejected(self):
        g = make_grid((8,))
        va = decompose([np.diag([1.0])])
        cube = DyadicCube(anisotropy=va, scale=2, index=(0,))  # 2 samples
        f = GridFunction(g, np.arange(8.0))
        with pytest.raises(DegenerateCubeError):
            oscillation(f, 4, cube, 2.0)

    def test_l1_beats_l2_fit_in_l1(self):
        g = make_grid((32,))
        va = decompose([np.diag([1.0])])
        rng = np.random.default_rng(17)
        vals = rng.standard_normal(32)
        vals[3] += 30.0  # outlier
        f = GridFunction(g, vals)
        cube = DyadicCube(anisotropy=va, scale=0, index=(0,))
        idx, ys = cube.lattice_points(g)
        samples = f.values[tuple(idx.T) + (0,)]
        res1 = oscillation(f, 1, cube, 1.0)
        l2_const = np.mean(samples)
        l1_of_l2fit = np.sum(np.abs(samples - l2_const)) * g.cell_volume
        assert res1.error <= l1_of_l2fit + 1e-10

    def test_inf_reports_suboptimal_flag(self):
        g = make_grid((32,))
        va = decompose([np.diag([1.0])])
        rng = np.random.default_rng(18)
        f = GridFunction(g, rng.standard_normal(32))
        cube = DyadicCube(anisotropy=va, scale=1, index=(0,))
        res = oscillation(f, 2, cube, np.inf)
        assert res.inf_suboptimal
        idx, _ = cube.lattice_points(g)
        samples = f.values[tuple(idx.T) + (0,)]
        assert res.error <= np.max(np.abs(samples - np.mean(samples))) * 2
