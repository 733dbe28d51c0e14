"""Dyadic frequency-localized multiplier banks adapted to a dilation group.

The base multiplier is 1 inside the quasi-norm ball of radius gamma and 0
outside radius delta, joined by a C^1 smoothstep in the quasi-norm; scale
n rescales the argument by the dilation A_{2^-n}.  Differences of
consecutive rescalings telescope exactly, so the bank sums to 1 on the
covered band to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .anisotropy import DecomposedAnisotropy, quasi_norm_points
from .errors import CoverageError, GridError
from .grid import GridFunction, TorusGrid, from_spectrum

COVERAGE_SLACK = 1e-9


def _smoothstep_profile(u: np.ndarray) -> np.ndarray:
    """theta(u) = 1 - (3u^2 - 2u^3) clamped to [0, 1]."""
    v = np.clip(u, 0.0, 1.0)
    return 1.0 - (3.0 * v**2 - 2.0 * v**3)


@dataclass(frozen=True)
class FilterBank:
    grid: TorusGrid
    anisotropy: DecomposedAnisotropy
    gamma: float
    delta: float
    n_max: int
    axes: tuple[int, ...]
    multipliers: np.ndarray  # (n_max + 1, *subgrid_dims), real
    rho: np.ndarray  # rho_vecA over the sub-lattice
    bank_id: str

    @property
    def n_scales(self) -> int:
        return self.n_max + 1

    @property
    def coverage_radius(self) -> float:
        """Largest quasi-norm radius on which the bank sums to one."""
        return self.gamma * 2.0**self.n_max

    def multiplier_field(self, n: int) -> np.ndarray:
        """Scale-n multiplier broadcast to the full grid shape."""
        if not 0 <= n <= self.n_max:
            raise ValueError(f"scale {n} outside 0..{self.n_max}")
        shape = [1] * self.grid.ndim
        for a in self.axes:
            shape[a] = self.grid.dims[a]
        return self.multipliers[n].reshape(shape)

    def covered_mask(self) -> np.ndarray:
        """Sub-lattice frequencies inside the telescoping zone."""
        return self.rho <= self.coverage_radius * (1.0 + COVERAGE_SLACK)


def nyquist_quasi_radius(grid: TorusGrid, va: DecomposedAnisotropy, axes: Sequence[int]) -> float:
    """min over axes of rho_vecA at the axis Nyquist frequency."""
    vals = []
    for i, a in enumerate(axes):
        start = 0
        for blk in va.blocks:
            if start <= i < start + blk.dim:
                e = np.zeros(blk.dim)
                e[i - start] = grid.nyquist_frequency(a)
                vals.append(float(quasi_norm_points(blk, e[None, :])[0]))
                break
            start += blk.dim
    return min(vals)


def build_bank(
    grid: TorusGrid,
    va: DecomposedAnisotropy,
    gamma: float = 1.0,
    delta: float = 2.0,
    axes: Optional[Sequence[int]] = None,
) -> FilterBank:
    """Construct all usable dyadic scales on the lattice.

    ``axes`` restricts the bank to a subset of grid axes (multipliers
    constant along the others); the anisotropy then refers to those axes
    only.  delta <= 2*gamma is required so that multipliers two scales
    apart have disjoint supports.
    """
    axes = tuple(range(grid.ndim)) if axes is None else tuple(int(a) for a in axes)
    if len(set(axes)) != len(axes) or any(a < 0 or a >= grid.ndim for a in axes):
        raise GridError(f"invalid bank axes {axes}")
    if axes != tuple(sorted(axes)):
        raise GridError(f"bank axes must be ascending, got {axes}")
    if va.dim != len(axes):
        raise GridError(f"anisotropy dimension {va.dim} != number of bank axes {len(axes)}")
    if not 0 < gamma < delta:
        raise ValueError(f"need 0 < gamma < delta, got ({gamma}, {delta})")
    if delta > 2 * gamma:
        raise ValueError(
            f"delta <= 2*gamma required for disjoint supports at distance >= 2, got ({gamma}, {delta})"
        )

    rho_nyq = nyquist_quasi_radius(grid, va, axes)
    if delta > rho_nyq * (1 + 1e-9):
        raise GridError(
            f"delta {delta} exceeds the Nyquist quasi-norm radius {rho_nyq:.6g}: no usable scale"
        )
    # Tolerate the quasi-norm solver landing a hair below an exact dyadic
    # boundary; the slack admits supports beyond Nyquist by < 1e-9 only.
    n_max = int(np.floor(np.log2(rho_nyq / delta) + 1e-9))

    subgrid = tuple(grid.dims[a] for a in axes)
    mesh = np.meshgrid(
        *[2.0 * np.pi * (np.fft.fftfreq(grid.dims[a]) * grid.dims[a]) / grid.period[a] for a in axes],
        indexing="ij",
    )
    pts = np.stack(mesh, axis=-1).reshape(-1, len(axes))
    rho_flat = np.zeros(len(pts))
    start = 0
    for blk in va.blocks:
        sl = slice(start, start + blk.dim)
        np.maximum(rho_flat, quasi_norm_points(blk, pts[:, sl]), out=rho_flat)
        start += blk.dim
    rho = rho_flat.reshape(subgrid)

    # g_n = base profile at rho * 2^-n; differences telescope exactly.
    g = np.stack(
        [
            _smoothstep_profile((rho * 2.0**-n - gamma) / (delta - gamma))
            for n in range(n_max + 1)
        ]
    )
    mult = np.empty_like(g)
    mult[0] = g[0]
    mult[1:] = g[1:] - g[:-1]

    rho = rho.copy()
    rho.setflags(write=False)
    mult.setflags(write=False)
    bank_id = (
        f"phi[g={gamma:g},d={delta:g},nmax={n_max},axes={','.join(map(str, axes))},"
        f"grid={'x'.join(map(str, grid.dims))}]"
    )
    return FilterBank(
        grid=grid,
        anisotropy=va,
        gamma=float(gamma),
        delta=float(delta),
        n_max=n_max,
        axes=axes,
        multipliers=mult,
        rho=rho,
        bank_id=bank_id,
    )


def check_coverage(bank: FilterBank, f: GridFunction) -> None:
    """Hard error when the spectrum leaves the telescoping zone."""
    support = f.support_mask()
    if not np.any(support):
        return
    # Project the support onto the (ascending) bank axes.
    other = tuple(a for a in range(f.grid.ndim) if a not in bank.axes)
    proj = np.any(support, axis=other) if other else support
    bad = proj & ~bank.covered_mask()
    if np.any(bad):
        worst = float(np.max(bank.rho[proj]))
        raise CoverageError(
            f"spectrum reaches quasi-norm radius {worst:.6g} beyond the covered band "
            f"{bank.coverage_radius:.6g} of {bank.bank_id}"
        )


def apply(bank: FilterBank, n: int, f: GridFunction) -> GridFunction:
    """Convolution with the scale-n kernel, as a spectral multiply."""
    if f.grid != bank.grid:
        raise GridError("function grid does not match bank grid")
    mult = bank.multiplier_field(n)[..., None]
    return from_spectrum(f.grid, f.spectrum * mult)


def apply_all(bank: FilterBank, f: GridFunction) -> list[GridFunction]:
    """All scales at once (one forward transform, one inverse per scale)."""
    if f.grid != bank.grid:
        raise GridError("function grid does not match bank grid")
    spec = f.spectrum
    return [
        from_spectrum(f.grid, spec * bank.multiplier_field(n)[..., None])
        for n in range(bank.n_scales)
    ]


def piece_moduli(bank: FilterBank, f: GridFunction) -> np.ndarray:
    """Stack of channel-contracted moduli |S_n f|, shape (n_scales, *dims)."""
    return np.stack([p.modulus() for p in apply_all(bank, f)])


def export_multipliers(bank: FilterBank, directory) -> list[str]:
    """Write each multiplier as a grid-function container for inspection.

    The stored samples are the frequency-lattice multiplier values (real,
    in FFT index order) on a grid shaped like the bank's sub-lattice.
    """
    from pathlib import Path

    from .grid import GridFunction as GF
    from .grid import make_grid, save_function

    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    subgrid = make_grid(
        tuple(bank.grid.dims[a] for a in bank.axes),
        tuple(bank.grid.period[a] for a in bank.axes),
    )
    paths = []
    for n in range(bank.n_scales):
        path = out / f"multiplier_{n:02d}.alab"
        save_function(GF(subgrid, bank.multipliers[n].astype(complex)), path)
        paths.append(str(path))
    return paths


def reconstruct(bank: FilterBank, pieces: Sequence[GridFunction]) -> GridFunction:
    if len(pieces) != bank.n_scales:
        raise ValueError(f"expected {bank.n_scales} pieces, got {len(pieces)}")
    total = pieces[0].values.copy()
    for p in pieces[1:]:
        if p.grid != bank.grid:
            raise GridError("piece grid does not match bank grid")
        total = total + p.values
    return GridFunction(bank.grid, total)
