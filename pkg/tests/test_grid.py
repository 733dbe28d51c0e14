import numpy as np
import pytest

from anisolab.anisotropy import decompose, isotropic
from anisolab.errors import BandOverflowError, EmptyBandError, GridError
from anisolab.grid import (
    AnnulusBand,
    ExplicitBand,
    GridFunction,
    KBoxBand,
    ProductBallBand,
    constant,
    dilate_sample,
    exponential,
    export_csv,
    forward_transform,
    frequency_quasi_norm_field,
    from_spectrum,
    load_function,
    make_grid,
    random_bandlimited,
    save_function,
)


class TestMakeGrid:
    def test_2d_counts(self):
        g = make_grid((64, 64), (1.0, 1.0))
        assert g.npoints == 4096
        assert g.cell_volume == pytest.approx(1.0 / 4096)

    def test_1d_frequencies(self):
        g = make_grid((8,), (2.0,))
        k = np.sort(g.axis_wavenumbers(0))
        assert list(k) == [-4, -3, -2, -1, 0, 1, 2, 3]
        assert np.sort(g.axis_frequencies(0)) == pytest.approx(np.pi * k)

    def test_non_power_of_two_rejected(self):
        with pytest.raises(GridError):
            make_grid((6,))

    def test_bad_period(self):
        with pytest.raises(GridError):
            make_grid((8,), (0.0,))

    def test_refine(self):
        g = make_grid((8, 16), (1.0, 2.0))
        f = g.refine()
        assert f.dims == (16, 32)
        assert f.period == g.period


class TestTransforms:
    def test_constant_to_delta(self):
        g = make_grid((16, 16))
        f = GridFunction(g, np.ones((16, 16)))
        spec = f.spectrum
        assert spec[0, 0, 0] == pytest.approx(1.0)
        off = np.abs(spec).sum() - np.abs(spec[0, 0, 0])
        assert off <= 1e-13

    def test_exponential_single_coefficient(self):
        g = make_grid((32,))
        x = g.axis_coords(0)
        f = GridFunction(g, np.exp(2j * np.pi * 5 * x))
        spec = f.spectrum[..., 0]
        assert spec[5] == pytest.approx(1.0)
        assert np.sum(np.abs(spec)) == pytest.approx(1.0, abs=1e-12)

    def test_roundtrip(self):
        g = make_grid((16, 8))
        rng = np.random.default_rng(0)
        vals = rng.standard_normal((16, 8)) + 1j * rng.standard_normal((16, 8))
        f = GridFunction(g, vals)
        back = from_spectrum(g, f.spectrum)
        assert np.max(np.abs(back.values - f.values)) <= 1e-12

    def test_parseval_100_functions(self):
        g = make_grid((32, 32))
        va = isotropic([1, 1])
        band = AnnulusBand(va, 2.0, 40.0)
        for seed in range(100):
            f = random_bandlimited(g, seed, band)
            lhs = np.sum(np.abs(f.values) ** 2) * g.cell_volume
            rhs = g.volume * np.sum(np.abs(f.spectrum) ** 2)
            assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_values_immutable(self):
        g = make_grid((8,))
        f = constant(g, 1.0)
        with pytest.raises(ValueError):
            f.values[0] = 0.0


class TestFrequencyField:
    def test_isotropic_modulus(self):
        g = make_grid((16,))
        va = isotropic([1])
        rho = frequency_quasi_norm_field(g, va)
        assert rho == pytest.approx(np.abs(g.axis_frequencies(0)), rel=1e-10)

    def test_zero_at_origin(self):
        g = make_grid((8, 8))
        va = isotropic([1, 1])
        assert frequency_quasi_norm_field(g, va)[0, 0] == 0.0

    def test_anisotropic_axis_value(self):
        g = make_grid((16, 16))
        va = decompose([np.diag([1.0]), np.diag([2.0])])
        rho = frequency_quasi_norm_field(g, va)
        omega = g.axis_frequencies(1)[3]
        assert rho[0, 3] == pytest.approx(np.sqrt(omega), rel=1e-10)


class TestRandomBandlimited:
    def test_dc_band_is_constant(self):
        g = make_grid((16,))
        f = random_bandlimited(g, 1, ExplicitBand(((0,),)))
        assert np.max(np.abs(f.values - f.values[0])) <= 1e-14

    def test_determinism(self):
        g = make_grid((16, 16))
        band = KBoxBand((3, 2))
        f1 = random_bandlimited(g, 42, band)
        f2 = random_bandlimited(g, 42, band)
        assert np.array_equal(f1.values, f2.values)

    def test_annulus_support_exact(self):
        g = make_grid((32, 32))
        va = isotropic([1, 1])
        band = AnnulusBand(va, 6.0, 30.0)
        f = random_bandlimited(g, 7, band)
        mask = band.mask(g)
        spec = f.spectrum[..., 0]
        assert np.all(spec[~mask] == 0.0)
        assert np.any(spec[mask] != 0.0)

    def test_real_valued_hermitian(self):
        g = make_grid((32, 16))
        band = KBoxBand((4, 3))
        f = random_bandlimited(g, 3, band, real_valued=True)
        assert np.max(np.abs(f.values.imag)) <= 1e-13

    def test_empty_band_rejected(self):
        g = make_grid((16,))
        with pytest.raises(EmptyBandError):
            random_bandlimited(g, 0, AnnulusBand(isotropic([1]), 1e6, 2e6))

    def test_refinement_extends_same_function(self):
        g = make_grid((16, 16))
        band = KBoxBand((2, 2))
        f = random_bandlimited(g, 5, band)
        fine = random_bandlimited(g.refine(), 5, band)
        # same coefficients at the same integer frequencies
        coarse = f.spectrum[..., 0]
        dense = fine.spectrum[..., 0]
        for k1 in range(-2, 3):
            for k2 in range(-2, 3):
                assert dense[k1 % 32, k2 % 32] == pytest.approx(coarse[k1 % 16, k2 % 16])

    def test_channels(self):
        g = make_grid((16,))
        f = random_bandlimited(g, 2, KBoxBand((3,)), channels=3)
        assert f.channels == 3
        assert f.modulus().shape == (16,)


class TestDilateSample:
    def test_identity(self):
        g = make_grid((32,))
        va = isotropic([1])
        f = random_bandlimited(g, 1, KBoxBand((3,)))
        assert dilate_sample(f, va, 1.0) is f

    def test_isotropic_frequency_doubling(self):
        g = make_grid((32,))
        va = isotropic([1])
        f = exponential(g, [3])
        g2 = dilate_sample(f, va, 2.0)
        assert g2.spectrum[6, 0] == pytest.approx(1.0)

    def test_anisotropic_mapping(self):
        g = make_grid((32, 32))
        va = decompose([np.diag([1.0]), np.diag([2.0])])
        f = exponential(g, [3, 2])
        g2 = dilate_sample(f, va, 2.0)
        assert g2.spectrum[6, 8, 0] == pytest.approx(1.0)

    def test_composition_exact(self):
        g = make_grid((64,))
        va = isotropic([1])
        f = random_bandlimited(g, 9, KBoxBand((3,)))
        twice = dilate_sample(dilate_sample(f, va, 2.0), va, 2.0)
        once = dilate_sample(f, va, 4.0)
        assert np.array_equal(twice.values, once.values)

    def test_overflow_reported(self):
        g = make_grid((16,))
        va = isotropic([1])
        f = exponential(g, [5])
        with pytest.raises(BandOverflowError):
            dilate_sample(f, va, 2.0)

    def test_off_lattice_reported(self):
        g = make_grid((16,))
        va = decompose([np.diag([0.5])])
        f = exponential(g, [3])  # 3 * 2^0.5 is not an integer
        with pytest.raises(BandOverflowError):
            dilate_sample(f, va, 2.0)

    def test_nondyadic_rejected(self):
        g = make_grid((16,))
        va = isotropic([1])
        f = exponential(g, [1])
        with pytest.raises(BandOverflowError):
            dilate_sample(f, va, 3.0)


class TestBandMetadata:
    def test_off_band_multiplier_annihilates(self):
        g = make_grid((32,))
        band = KBoxBand((3,))
        f = random_bandlimited(g, 11, band)
        mult = 1.0 - band.mask(g).astype(float)
        killed = from_spectrum(g, f.spectrum * mult[..., None])
        assert np.max(np.abs(killed.values)) == 0.0

    def test_support_mask_matches_band(self):
        g = make_grid((32,))
        band = KBoxBand((3,))
        f = random_bandlimited(g, 11, band)
        assert np.all(band.mask(g) | ~f.support_mask())

    def test_product_ball_band(self):
        g = make_grid((16, 16))
        va = decompose([np.diag([1.0]), np.diag([2.0])])
        band = ProductBallBand(va, (7.0, 5.0))
        m = band.mask(g)
        assert m[0, 0]
        xi1 = g.axis_frequencies(0)
        xi2 = g.axis_frequencies(1)
        for i in range(16):
            for j in range(16):
                expect = abs(xi1[i]) <= 7.0 and np.sqrt(abs(xi2[j])) <= 5.0
                assert m[i, j] == expect


class TestFileFormats:
    def test_container_roundtrip(self, tmp_path):
        g = make_grid((8, 4), (1.0, 2.0))
        f = random_bandlimited(g, 13, KBoxBand((2, 1)), channels=2, real_valued=False)
        path = tmp_path / "fn.alab"
        save_function(f, path)
        back = load_function(path)
        assert back.grid == g
        assert np.array_equal(back.values, f.values)

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "junk.alab"
        path.write_bytes(b'{"format": "something-else"}\n1234')
        with pytest.raises(GridError):
            load_function(path)

    def test_csv_layout(self, tmp_path):
        g = make_grid((4,))
        f = exponential(g, [1])
        path = tmp_path / "fn.csv"
        export_csv(f, path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "i0,re0,im0"
        assert len(lines) == 5
        first = lines[1].split(",")
        assert first[0] == "0"
        assert float(first[1]) == pytest.approx(1.0)
