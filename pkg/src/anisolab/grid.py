"""Uniform periodic sampling lattices and sampled complex functions.

Functions live on a torus with per-axis periods; spectra use the
mean-normalized discrete Fourier transform (constant 1 maps to
coefficient 1 at frequency zero), stored in FFT index order.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .anisotropy import DecomposedAnisotropy, quasi_norm_points
from .errors import BandOverflowError, EmptyBandError, GridError

SUPPORT_REL_TOL = 1e-12

FILE_MAGIC = "anisolab-gridfn"
FILE_SCALAR = "complex64-pairs little-endian"


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class TorusGrid:
    """Per-axis sample counts (powers of two) and periods."""

    dims: tuple[int, ...]
    period: tuple[float, ...]

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def npoints(self) -> int:
        return int(np.prod(self.dims))

    @property
    def volume(self) -> float:
        return float(np.prod(self.period))

    @property
    def cell_volume(self) -> float:
        return self.volume / self.npoints

    def axis_coords(self, axis: int) -> np.ndarray:
        n, L = self.dims[axis], self.period[axis]
        return np.arange(n) * (L / n)

    def axis_wavenumbers(self, axis: int) -> np.ndarray:
        """Integer frequency indices in FFT order: 0..N/2-1, -N/2..-1."""
        n = self.dims[axis]
        return (np.fft.fftfreq(n) * n).astype(int)

    def axis_frequencies(self, axis: int) -> np.ndarray:
        """Angular frequencies 2*pi*k/L in FFT order."""
        return 2.0 * np.pi * self.axis_wavenumbers(axis) / self.period[axis]

    def frequency_points(self, axes: Optional[Sequence[int]] = None) -> np.ndarray:
        """All lattice frequencies on the chosen axes, shape (*subdims, len(axes))."""
        axes = tuple(range(self.ndim)) if axes is None else tuple(axes)
        mesh = np.meshgrid(*[self.axis_frequencies(a) for a in axes], indexing="ij")
        return np.stack(mesh, axis=-1)

    def nyquist_frequency(self, axis: int) -> float:
        return np.pi * self.dims[axis] / self.period[axis]

    def refine(self, factor: int = 2) -> "TorusGrid":
        return make_grid(tuple(n * factor for n in self.dims), self.period)


def make_grid(dims: Sequence[int], period: Optional[Sequence[float]] = None) -> TorusGrid:
    dims = tuple(int(n) for n in dims)
    if not dims:
        raise GridError("grid needs at least one axis")
    for n in dims:
        if not _is_power_of_two(n):
            raise GridError(f"axis sample count {n} is not a power of two")
    if period is None:
        period = tuple(1.0 for _ in dims)
    period = tuple(float(p) for p in period)
    if len(period) != len(dims):
        raise GridError(f"{len(period)} periods for {len(dims)} axes")
    if any(p <= 0 for p in period):
        raise GridError("periods must be positive")
    return TorusGrid(dims=dims, period=period)


class GridFunction:
    """Complex samples (last axis = channels) with a lazily cached spectrum.

    Immutable: sample and spectrum arrays are write-protected, and the
    cache is filled at most once under a lock.
    """

    __slots__ = ("grid", "values", "_spectrum", "_lock")

    def __init__(self, grid: TorusGrid, values: np.ndarray, _spectrum: Optional[np.ndarray] = None):
        values = np.asarray(values, dtype=complex)
        if values.ndim == grid.ndim:
            values = values[..., None]
        if values.shape[: grid.ndim] != grid.dims or values.ndim != grid.ndim + 1:
            raise GridError(
                f"sample array shape {values.shape} does not match grid {grid.dims} + channels"
            )
        values = values.copy()
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self._spectrum = _spectrum
        self._lock = threading.Lock()

    @property
    def channels(self) -> int:
        return self.values.shape[-1]

    @property
    def spectrum(self) -> np.ndarray:
        if self._spectrum is None:
            with self._lock:
                if self._spectrum is None:
                    self._spectrum = forward_transform(self)
        return self._spectrum

    def modulus(self) -> np.ndarray:
        """Pointwise Euclidean modulus over channels (real array)."""
        if self.channels == 1:
            return np.abs(self.values[..., 0])
        return np.sqrt(np.sum(np.abs(self.values) ** 2, axis=-1))

    def support_mask(self, rel_tol: float = SUPPORT_REL_TOL) -> np.ndarray:
        """Frequencies carrying a coefficient above rel_tol * max (any channel)."""
        spec = self.spectrum
        mag = np.max(np.abs(spec), axis=-1)
        peak = float(np.max(mag))
        if peak == 0.0:
            return np.zeros(self.grid.dims, dtype=bool)
        return mag > rel_tol * peak

    def scale(self, c: complex) -> "GridFunction":
        spec = None if self._spectrum is None else self._spectrum * c
        return GridFunction(self.grid, self.values * c, spec)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        if self.grid != other.grid:
            raise GridError("grid mismatch in addition")
        return GridFunction(self.grid, self.values + other.values)


def forward_transform(f: GridFunction) -> np.ndarray:
    """Mean-normalized forward DFT over the spatial axes."""
    axes = tuple(range(f.grid.ndim))
    spec = np.fft.fftn(f.values, axes=axes) / f.grid.npoints
    spec.setflags(write=False)
    return spec


def inverse_transform(grid: TorusGrid, spectrum: np.ndarray) -> GridFunction:
    """Inverse of forward_transform; spectrum shape = dims (+ channels)."""
    spec = np.asarray(spectrum, dtype=complex)
    if spec.ndim == grid.ndim:
        spec = spec[..., None]
    if spec.shape[: grid.ndim] != grid.dims or spec.ndim != grid.ndim + 1:
        raise GridError(f"spectrum shape {spec.shape} does not match grid {grid.dims}")
    axes = tuple(range(grid.ndim))
    values = np.fft.ifftn(spec * grid.npoints, axes=axes)
    return GridFunction(grid, values, spec.copy())


def from_spectrum(grid: TorusGrid, spectrum: np.ndarray) -> GridFunction:
    return inverse_transform(grid, spectrum)


def frequency_quasi_norm_field(grid: TorusGrid, va: DecomposedAnisotropy) -> np.ndarray:
    """rho_vecA over all lattice frequencies, shape grid.dims.

    One lattice axis per dimension; block j sees the frequencies of its
    own axes, and the result is the blockwise maximum broadcast over the
    remaining axes.
    """
    if va.dim != grid.ndim:
        raise GridError(f"anisotropy dimension {va.dim} != grid dimension {grid.ndim}")
    field = np.zeros(grid.dims)
    start = 0
    for blk in va.blocks:
        axes = tuple(range(start, start + blk.dim))
        pts = grid.frequency_points(axes)
        rho = quasi_norm_points(blk, pts.reshape(-1, blk.dim)).reshape(pts.shape[:-1])
        shape = [1] * grid.ndim
        for i, a in enumerate(axes):
            shape[a] = grid.dims[a]
        np.maximum(field, rho.reshape(shape), out=field)
        start += blk.dim
    return field


# --------------------------------------------------------------------------
# Frequency band selectors
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AnnulusBand:
    """lo <= rho_vecA(xi) <= hi on the frequency lattice."""

    anisotropy: DecomposedAnisotropy
    lo: float
    hi: float

    def mask(self, grid: TorusGrid) -> np.ndarray:
        rho = frequency_quasi_norm_field(grid, self.anisotropy)
        return (rho >= self.lo) & (rho <= self.hi)


@dataclass(frozen=True)
class KBoxBand:
    """|k_j| <= kmax_j per axis (integer frequency indices)."""

    kmax: tuple[int, ...]

    def mask(self, grid: TorusGrid) -> np.ndarray:
        if len(self.kmax) != grid.ndim:
            raise GridError(f"kmax has {len(self.kmax)} axes, grid has {grid.ndim}")
        m = np.ones(grid.dims, dtype=bool)
        for a, km in enumerate(self.kmax):
            k = grid.axis_wavenumbers(a)
            shape = [1] * grid.ndim
            shape[a] = grid.dims[a]
            m &= (np.abs(k) <= km).reshape(shape)
        return m


@dataclass(frozen=True)
class ProductBallBand:
    """Per-block quasi-norm balls: rho_{A_j}(xi_j) <= R_j."""

    anisotropy: DecomposedAnisotropy
    radii: tuple[float, ...]

    def mask(self, grid: TorusGrid) -> np.ndarray:
        va = self.anisotropy
        if len(self.radii) != va.n_blocks:
            raise GridError("need one radius per block")
        m = np.ones(grid.dims, dtype=bool)
        start = 0
        for blk, r in zip(va.blocks, self.radii):
            axes = tuple(range(start, start + blk.dim))
            pts = grid.frequency_points(axes)
            rho = quasi_norm_points(blk, pts.reshape(-1, blk.dim)).reshape(pts.shape[:-1])
            shape = [1] * grid.ndim
            for a in axes:
                shape[a] = grid.dims[a]
            m &= (rho.reshape(shape) <= r)
            start += blk.dim
        return m


@dataclass(frozen=True)
class ExplicitBand:
    """Explicit set of integer frequency tuples."""

    freqs: tuple[tuple[int, ...], ...]

    def mask(self, grid: TorusGrid) -> np.ndarray:
        m = np.zeros(grid.dims, dtype=bool)
        for k in self.freqs:
            m[tuple(int(kj) % n for kj, n in zip(k, grid.dims))] = True
        return m


def _unpaired_row_mask(grid: TorusGrid) -> np.ndarray:
    """Frequencies with any k_j = -N_j/2 (no conjugate partner on the lattice)."""
    m = np.zeros(grid.dims, dtype=bool)
    for a, n in enumerate(grid.dims):
        k = grid.axis_wavenumbers(a)
        shape = [1] * grid.ndim
        shape[a] = n
        m |= (k == -(n // 2)).reshape(shape)
    return m


def _coefficient_rng(seed: int, k: tuple[int, ...], channel: int) -> np.random.Generator:
    enc = [int(seed), int(channel)] + [int(kj) + (1 << 20) for kj in k]
    return np.random.default_rng(enc)


def random_bandlimited(
    grid: TorusGrid,
    seed: int,
    band,
    channels: int = 1,
    real_valued: bool = True,
) -> GridFunction:
    """Seeded random function with spectrum exactly supported in ``band``.

    Coefficients are drawn per frequency index, so the same seed yields
    the same function (band-limited extension) on a refined grid.  Real
    output enforces Hermitian spectra; the unpaired -N/2 rows are always
    excluded.
    """
    mask = np.asarray(band.mask(grid), dtype=bool)
    mask = mask & ~_unpaired_row_mask(grid)
    idx = np.argwhere(mask)
    if len(idx) == 0:
        raise EmptyBandError("band selects no usable lattice frequencies")

    wavenums = [grid.axis_wavenumbers(a) for a in range(grid.ndim)]
    spec = np.zeros(grid.dims + (channels,), dtype=complex)
    ks = sorted(tuple(int(wavenums[a][i]) for a, i in enumerate(row)) for row in idx)
    kset = set(ks)
    n_freq = len(ks)
    for k in ks:
        neg = tuple(-kj for kj in k)
        pos_idx = tuple(kj % n for kj, n in zip(k, grid.dims))
        if not real_valued:
            for c in range(channels):
                rng = _coefficient_rng(seed, k, c)
                spec[pos_idx + (c,)] = rng.standard_normal() + 1j * rng.standard_normal()
            continue
        if k == neg:
            for c in range(channels):
                rng = _coefficient_rng(seed, k, c)
                spec[pos_idx + (c,)] = rng.standard_normal()
            continue
        if neg in kset and k > neg:
            continue  # filled by its mirror below
        neg_idx = tuple(kj % n for kj, n in zip(neg, grid.dims))
        for c in range(channels):
            rng = _coefficient_rng(seed, k, c)
            coeff = rng.standard_normal() + 1j * rng.standard_normal()
            spec[pos_idx + (c,)] = coeff
            spec[neg_idx + (c,)] = np.conj(coeff)
    spec /= np.sqrt(n_freq)
    return from_spectrum(grid, spec)


def exponential(grid: TorusGrid, k: Sequence[int], real_valued: bool = False) -> GridFunction:
    """Pure lattice exponential exp(i xi_k . x), or its cosine for real output."""
    k = tuple(int(v) for v in k)
    spec = np.zeros(grid.dims + (1,), dtype=complex)
    pos = tuple(kj % n for kj, n in zip(k, grid.dims))
    if real_valued:
        neg = tuple((-kj) % n for kj, n in zip(k, grid.dims))
        spec[pos + (0,)] += 0.5
        spec[neg + (0,)] += 0.5
    else:
        spec[pos + (0,)] = 1.0
    return from_spectrum(grid, spec)


def constant(grid: TorusGrid, value: complex = 1.0, channels: int = 1) -> GridFunction:
    spec = np.zeros(grid.dims + (channels,), dtype=complex)
    spec[(0,) * grid.ndim] = value
    return from_spectrum(grid, spec)


def dilate_sample(f: GridFunction, va: DecomposedAnisotropy, t: float) -> GridFunction:
    """Samples of x -> f(A_t x) by exact spectral re-indexing.

    Needs dyadic t and diagonal blocks whose exponents map every occupied
    frequency index to an integer inside the Nyquist range.
    """
    grid = f.grid
    if va.dim != grid.ndim:
        raise GridError(f"anisotropy dimension {va.dim} != grid dimension {grid.ndim}")
    exponents = va.axis_exponents()
    if exponents is None:
        raise BandOverflowError("spectral dilation needs diagonal blocks")
    m = np.log2(float(t))
    if abs(m - round(m)) > 1e-12:
        raise BandOverflowError(f"dilation factor {t} is not a power of two")
    if t == 1.0:
        return f

    spec = f.spectrum
    mask = f.support_mask()
    new_spec = np.zeros_like(spec)
    wavenums = [grid.axis_wavenumbers(a) for a in range(grid.ndim)]
    factors = np.power(float(t), exponents)
    for row in np.argwhere(mask):
        k = np.array([wavenums[a][i] for a, i in enumerate(row)], dtype=float)
        kt = k * factors
        k_int = np.rint(kt).astype(int)
        if np.max(np.abs(kt - k_int)) > 1e-9:
            raise BandOverflowError(
                f"frequency {tuple(int(v) for v in k)} maps off the lattice under t={t}"
            )
        for a, n in enumerate(grid.dims):
            if abs(k_int[a]) > n // 2 - 1:
                raise BandOverflowError(
                    f"frequency {tuple(int(v) for v in k)} overflows axis {a} under t={t}"
                )
        dst = tuple(int(k_int[a]) % n for a, n in enumerate(grid.dims))
        new_spec[dst] = spec[tuple(row)]
    return from_spectrum(grid, new_spec)


# --------------------------------------------------------------------------
# File formats
# --------------------------------------------------------------------------


def save_function(f: GridFunction, path) -> None:
    """Self-describing container: one JSON header line, then raw samples."""
    header = {
        "format": FILE_MAGIC,
        "version": 1,
        "dims": list(f.grid.dims),
        "period": list(f.grid.period),
        "channels": f.channels,
        "layout": "row-major",
        "scalar": FILE_SCALAR,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(np.ascontiguousarray(f.values).astype("<c16").tobytes())


def load_function(path) -> GridFunction:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        if header.get("format") != FILE_MAGIC:
            raise GridError(f"not a {FILE_MAGIC} file: {path}")
        if header.get("scalar") != FILE_SCALAR:
            raise GridError(f"unsupported scalar encoding {header.get('scalar')!r}")
        grid = make_grid(header["dims"], header["period"])
        channels = int(header["channels"])
        raw = fh.read()
    values = np.frombuffer(raw, dtype="<c16").reshape(grid.dims + (channels,))
    return GridFunction(grid, values.astype(complex))


def export_csv(f: GridFunction, path) -> None:
    """Plain-text export: index columns, then re/im per channel."""
    grid = f.grid
    with open(path, "w", encoding="utf-8") as fh:
        cols = [f"i{a}" for a in range(grid.ndim)]
        for c in range(f.channels):
            cols += [f"re{c}", f"im{c}"]
        fh.write(",".join(cols) + "\n")
        for idx in np.ndindex(*grid.dims):
            row = [str(i) for i in idx]
            for c in range(f.channels):
                v = f.values[idx + (c,)]
                row += [repr(float(v.real)), repr(float(v.imag))]
            fh.write(",".join(row) + "\n")
