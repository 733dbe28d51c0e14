"""Quasi-norms of the space catalogue built on dyadic multiplier banks.

Every norm decomposes a function into bank pieces S_n f and aggregates
the channel-contracted moduli; the three aggregation orders (pointwise
l_q first, mixed norm first, and the lattice-valued inner/outer split)
give the three space kinds.  Coverage is enforced, never extrapolated: a
spectrum outside the zone where the bank sums to one is a hard error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import mixed_norm as mn
from .anisotropy import DecomposedAnisotropy
from .errors import GridError, ParameterWindowError
from .filterbank import FilterBank, check_coverage, piece_moduli
from .grid import GridFunction, TorusGrid, from_spectrum, frequency_quasi_norm_field
from .mixed_norm import SpaceSpec


@dataclass(frozen=True)
class NormValue:
    """A computed quasi-norm with per-scale diagnostics."""

    spec: SpaceSpec
    value: float
    pieces: tuple[float, ...]
    bank_id: str

    def to_record(self) -> dict:
        return {
            "kind": self.spec.kind,
            "s": self.spec.s,
            "p": list(self.spec.p),
            "q": self.spec.q,
            "r": self.spec.r,
            "value": self.value,
            "pieces": list(self.pieces),
            "bank_id": self.bank_id,
        }


def _weight_for(spec: SpaceSpec, grid: TorusGrid) -> Optional[mn.WeightField]:
    if spec.weight_exponents is None:
        return None
    return mn.power_weight(grid, spec.anisotropy, spec.weight_exponents)


def _same_anisotropy(a: DecomposedAnisotropy, b: DecomposedAnisotropy) -> bool:
    return a.decomposition == b.decomposition and all(
        np.allclose(x.matrix, y.matrix) for x, y in zip(a.blocks, b.blocks)
    )


def _scale_pieces(moduli: np.ndarray, s: float, grid: TorusGrid, p, d, weight) -> tuple[float, ...]:
    return tuple(
        (2.0 ** (n * s)) * mn.mixed_lp(moduli[n], grid, p, d, weight)
        for n in range(moduli.shape[0])
    )


def tl_norm(f: GridFunction, spec: SpaceSpec, bank: FilterBank) -> NormValue:
    """L_p[l_q^s] aggregation over the bank pieces."""
    if spec.kind != "F":
        raise ParameterWindowError(f"tl_norm needs kind 'F', got {spec.kind!r}")
    if bank.axes != tuple(range(f.grid.ndim)):
        raise GridError("tl_norm needs a full-dimension bank")
    if not _same_anisotropy(bank.anisotropy, spec.anisotropy):
        raise ParameterWindowError("bank anisotropy differs from space anisotropy")
    check_coverage(bank, f)
    weight = _weight_for(spec, f.grid)
    moduli = piece_moduli(bank, f)
    value = mn.seq_norm_F(moduli, f.grid, spec.s, spec.p, spec.q, spec.decomposition, weight)
    pieces = _scale_pieces(moduli, spec.s, f.grid, spec.p, spec.decomposition, weight)
    return NormValue(spec=spec, value=value, pieces=pieces, bank_id=bank.bank_id)


def besov_norm(f: GridFunction, spec: SpaceSpec, bank: FilterBank) -> NormValue:
    """l_q^s[L_p] aggregation; the value is the plain l_q of the pieces."""
    if spec.kind != "B":
        raise ParameterWindowError(f"besov_norm needs kind 'B', got {spec.kind!r}")
    if bank.axes != tuple(range(f.grid.ndim)):
        raise GridError("besov_norm needs a full-dimension bank")
    if not _same_anisotropy(bank.anisotropy, spec.anisotropy):
        raise ParameterWindowError("bank anisotropy differs from space anisotropy")
    check_coverage(bank, f)
    weight = _weight_for(spec, f.grid)
    moduli = piece_moduli(bank, f)
    value = mn.seq_norm_B(moduli, f.grid, spec.s, spec.p, spec.q, spec.decomposition, weight)
    pieces = _scale_pieces(moduli, spec.s, f.grid, spec.p, spec.decomposition, weight)
    return NormValue(spec=spec, value=value, pieces=pieces, bank_id=bank.bank_id)


def script_f_norm(f: GridFunction, spec: SpaceSpec, outer_bank: FilterBank) -> NormValue:
    """Lattice-valued aggregation: the bank filters the outer blocks only,
    the inner coordinates ride along as a measure."""
    if spec.kind != "scriptF":
        raise ParameterWindowError(f"script_f_norm needs kind 'scriptF', got {spec.kind!r}")
    outer_axes = spec.axes_of_blocks(spec.outer_blocks)
    groups = mn.block_axes(spec.decomposition)
    inner_groups = [groups[j] for j in spec.inner_blocks()]
    if outer_bank.axes != outer_axes:
        raise GridError(
            f"outer bank axes {outer_bank.axes} do not match the outer blocks {outer_axes}"
        )
    check_coverage(outer_bank, f)
    weight = _weight_for(spec, f.grid)
    moduli = piece_moduli(outer_bank, f)
    value = mn.seq_norm_scriptF(
        moduli, f.grid, spec.s, spec.q, spec.r, spec.p, inner_groups, weight
    )
    pieces = tuple(
        (2.0 ** (n * spec.s))
        * mn.seq_norm_scriptF(
            moduli[n : n + 1], f.grid, 0.0, spec.q, spec.r, spec.p, inner_groups, weight
        )
        for n in range(moduli.shape[0])
    )
    return NormValue(spec=spec, value=value, pieces=pieces, bank_id=outer_bank.bank_id)


def lq_of_inner_norm(
    f: GridFunction,
    outer_q: float,
    inner_spec: SpaceSpec,
    inner_bank: FilterBank,
) -> NormValue:
    """Inner 'F' norm per outer slice, aggregated L_q over the outer axes.

    inner_spec describes the inner-block space: kind 'F', with
    outer_blocks marking which blocks of the full decomposition are the
    outer (slice) variable."""
    if inner_spec.kind != "Lq_of_inner":
        raise ParameterWindowError(
            f"lq_of_inner_norm needs kind 'Lq_of_inner', got {inner_spec.kind!r}"
        )
    outer_axes = inner_spec.axes_of_blocks(inner_spec.outer_blocks)
    groups = mn.block_axes(inner_spec.decomposition)
    inner_groups = [groups[j] for j in inner_spec.inner_blocks()]
    inner_axes = inner_spec.axes_of_blocks(inner_spec.inner_blocks())
    if inner_bank.axes != inner_axes:
        raise GridError(
            f"inner bank axes {inner_bank.axes} do not match the inner blocks {inner_axes}"
        )
    check_coverage(inner_bank, f)
    grid = f.grid
    moduli = piece_moduli(inner_bank, f)
    # Pointwise weighted l_q over scales (the inner microscopic exponent),
    # then the inner mixed L_p, leaving a field over the outer axes.
    agg = mn._seq_aggregate(moduli, inner_spec.s, float(inner_spec.q))
    inner_field = mn.mixed_lp_partial(agg, grid, inner_spec.p, inner_groups)
    cell_outer = float(np.prod([grid.period[a] / grid.dims[a] for a in outer_axes]))
    q = float(outer_q)
    if q == mn.INF:
        value = float(np.max(inner_field))
    else:
        value = float((np.sum(inner_field**q) * cell_outer) ** (1.0 / q))
    pieces = []
    for n in range(moduli.shape[0]):
        fld = mn.mixed_lp_partial(2.0 ** (n * inner_spec.s) * moduli[n], grid, inner_spec.p, inner_groups)
        if q == mn.INF:
            pieces.append(float(np.max(fld)))
        else:
            pieces.append(float((np.sum(fld**q) * cell_outer) ** (1.0 / q)))
    return NormValue(spec=inner_spec, value=value, pieces=tuple(pieces), bank_id=inner_bank.bank_id)


def lift_field(grid: TorusGrid, va: DecomposedAnisotropy) -> np.ndarray:
    """The smoothness-shift symbol: the quasi-norm where it is >= 1 and the
    C^1 completion (1 + rho^2)/2 in [1/2, 1] inside the unit ball."""
    rho = frequency_quasi_norm_field(grid, va)
    return np.where(rho >= 1.0, rho, 0.5 * (1.0 + rho**2))


def lift(f: GridFunction, sigma: float, va: DecomposedAnisotropy) -> GridFunction:
    """Spectral multiplication by the lift symbol to the power sigma."""
    if va.dim != f.grid.ndim:
        raise GridError(f"anisotropy dimension {va.dim} != grid dimension {f.grid.ndim}")
    if sigma == 0.0:
        return f
    psi = lift_field(f.grid, va) ** float(sigma)
    return from_spectrum(f.grid, f.spectrum * psi[..., None])
