"""Iterated (mixed) Lebesgue norms and the dyadically weighted sequence norms.

Integrals are cell-midpoint Riemann sums on the sampling lattice; the
innermost block of the axis decomposition is reduced first.  Exponent
infinity means an exact supremum over the grid.  Dyadic sequence weights
follow the convention (sum_n (2^{n s} |f_n|)^q)^{1/q}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .anisotropy import DecomposedAnisotropy, quasi_norm_points
from .errors import GridError, ParameterWindowError, WeightError
from .grid import TorusGrid

INF = float("inf")


def block_axes(decomposition: Sequence[int]) -> list[tuple[int, ...]]:
    out, start = [], 0
    for d in decomposition:
        out.append(tuple(range(start, start + d)))
        start += d
    return out


def _as_exponents(p, n_blocks: int) -> tuple[float, ...]:
    if np.isscalar(p):
        p = (float(p),) * n_blocks
    p = tuple(float(v) for v in p)
    if len(p) != n_blocks:
        raise ParameterWindowError(f"{len(p)} exponents for {n_blocks} blocks")
    if any(v <= 0 for v in p):
        raise ParameterWindowError("exponents must be positive (inf allowed)")
    return p


def _reduce_axes(values: np.ndarray, axes: tuple[int, ...], p: float, cell: float) -> np.ndarray:
    """One L_p reduction over the given axes of a nonnegative array."""
    if not axes:
        return values
    if p == INF:
        return np.max(values, axis=axes)
    return (np.sum(values**p, axis=axes) * cell) ** (1.0 / p)


# --------------------------------------------------------------------------
# Anisotropic power weights
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightField:
    """w(x) = prod_j rho_{A_j}(x_j)^{gamma_j} on the centered fundamental domain.

    The zero of each block factor (block origin) takes the cell-midpoint
    value, keeping the field strictly positive.
    """

    grid: TorusGrid
    anisotropy: DecomposedAnisotropy
    exponents: tuple[float, ...]
    block_fields: tuple[np.ndarray, ...]

    def admissible_for(self, p, r=None) -> tuple[bool, ...]:
        """gamma_j in (-tr(A_j), tr(A_j) * (p_j / r_j - 1)) per block."""
        va = self.anisotropy
        p = _as_exponents(p, va.n_blocks)
        r = (1.0,) * va.n_blocks if r is None else _as_exponents(r, va.n_blocks)
        out = []
        for gamma, tr, pj, rj in zip(self.exponents, va.traces, p, r):
            hi = tr * (pj / rj - 1.0) if pj != INF else INF
            out.append(-tr < gamma < hi)
        return tuple(out)

    def multiplier_for(self, p) -> np.ndarray:
        """Pointwise factor prod_j w_j^{1/p_j} (finite-exponent blocks only)."""
        p = _as_exponents(p, self.anisotropy.n_blocks)
        mult = np.ones(self.grid.dims)
        for axes, fld, pj in zip(
            block_axes(self.anisotropy.decomposition), self.block_fields, p
        ):
            if pj == INF:
                continue
            shape = [1] * self.grid.ndim
            for a in axes:
                shape[a] = self.grid.dims[a]
            mult *= fld.reshape(shape) ** (1.0 / pj)
        return mult

    def samples(self) -> np.ndarray:
        """The full weight field prod_j w_j (gamma exponents applied)."""
        w = np.ones(self.grid.dims)
        for axes, fld in zip(block_axes(self.anisotropy.decomposition), self.block_fields):
            shape = [1] * self.grid.ndim
            for a in axes:
                shape[a] = self.grid.dims[a]
            w *= fld.reshape(shape)
        return w


def power_weight(grid: TorusGrid, va: DecomposedAnisotropy, exponents) -> WeightField:
    if va.dim != grid.ndim:
        raise GridError(f"anisotropy dimension {va.dim} != grid dimension {grid.ndim}")
    gammas = tuple(float(g) for g in np.atleast_1d(exponents))
    if len(gammas) != va.n_blocks:
        raise WeightError(f"{len(gammas)} weight exponents for {va.n_blocks} blocks")
    fields = []
    start = 0
    for blk, gamma in zip(va.blocks, gammas):
        axes = tuple(range(start, start + blk.dim))
        coords = np.meshgrid(
            *[
                ((grid.axis_coords(a) + grid.period[a] / 2) % grid.period[a])
                - grid.period[a] / 2
                for a in axes
            ],
            indexing="ij",
        )
        pts = np.stack(coords, axis=-1).reshape(-1, blk.dim)
        rho = quasi_norm_points(blk, pts)
        mid = np.array([grid.period[a] / (2 * grid.dims[a]) for a in axes])
        rho[rho == 0.0] = quasi_norm_points(blk, mid[None, :])[0]
        fields.append((rho**gamma).reshape(tuple(grid.dims[a] for a in axes)))
        start += blk.dim
    return WeightField(grid=grid, anisotropy=va, exponents=gammas, block_fields=tuple(fields))


def _check_weight(weight: Optional[WeightField], p, n_blocks: int) -> None:
    if weight is None:
        return
    flags = weight.admissible_for(p)
    if not all(flags):
        bad = [j for j, ok in enumerate(flags) if not ok]
        raise WeightError(
            f"weight exponents outside the admissible power range on blocks {bad}"
        )


# --------------------------------------------------------------------------
# Mixed Lebesgue norms
# --------------------------------------------------------------------------


def mixed_lp(
    values: np.ndarray,
    grid: TorusGrid,
    p,
    decomposition: Sequence[int],
    weight: Optional[WeightField] = None,
) -> float:
    """Iterated norm, innermost block first; returns a scalar.

    ``values`` has shape grid.dims (complex allowed; modulus is taken).
    A weight enters as |f| * prod_j w_j^{1/p_j} before the reductions.
    """
    decomposition = tuple(int(d) for d in decomposition)
    if sum(decomposition) != grid.ndim:
        raise GridError(f"decomposition {decomposition} does not sum to grid dim {grid.ndim}")
    p = _as_exponents(p, len(decomposition))
    _check_weight(weight, p, len(decomposition))
    work = np.abs(np.asarray(values))
    if work.shape != grid.dims:
        raise GridError(f"value shape {work.shape} != grid dims {grid.dims}")
    if weight is not None:
        work = work * weight.multiplier_for(p)
    # After each reduction the next block's axes are exactly the leading ones.
    for axes, pj in zip(block_axes(decomposition), p):
        cell = float(np.prod([grid.period[a] / grid.dims[a] for a in axes]))
        work = _reduce_axes(work, tuple(range(len(axes))), pj, cell)
    return float(work)


def mixed_lp_partial(
    values: np.ndarray,
    grid: TorusGrid,
    p,
    axes_blocks: Sequence[Sequence[int]],
) -> np.ndarray:
    """Reduce only the listed axis blocks (innermost first), keeping the rest.

    Returns an array over the surviving axes, in their original order.
    """
    work = np.abs(np.asarray(values))
    p = _as_exponents(p, len(axes_blocks))
    reduced: list[int] = []
    for axes, pj in zip(axes_blocks, p):
        axes = tuple(sorted(int(a) for a in axes))
        cell = float(np.prod([grid.period[a] / grid.dims[a] for a in axes]))
        pos = tuple(a - sum(1 for r in reduced if r < a) for a in axes)
        work = _reduce_axes(work, pos, pj, cell)
        reduced.extend(axes)
    return work


def _dyadic_weights(n: int, s: float) -> np.ndarray:
    return 2.0 ** (s * np.arange(n))


def _seq_aggregate(stack: np.ndarray, s: float, q: float, scales: Optional[np.ndarray] = None) -> np.ndarray:
    """Pointwise (sum_n (2^{ns}|f_n|)^q)^{1/q} along axis 0."""
    n = stack.shape[0]
    w = 2.0 ** (s * (np.arange(n) if scales is None else np.asarray(scales)))
    weighted = np.abs(stack) * w.reshape((n,) + (1,) * (stack.ndim - 1))
    if q == INF:
        return np.max(weighted, axis=0)
    return np.sum(weighted**q, axis=0) ** (1.0 / q)


def seq_norm_F(
    fields: np.ndarray,
    grid: TorusGrid,
    s: float,
    p,
    q: float,
    decomposition: Sequence[int],
    weight: Optional[WeightField] = None,
    scales: Optional[np.ndarray] = None,
) -> float:
    """Pointwise weighted l_q over the scale index, then the mixed norm."""
    fields = np.asarray(fields)
    if fields.shape[1:] != grid.dims:
        raise GridError(f"field stack shape {fields.shape} != (n,) + {grid.dims}")
    agg = _seq_aggregate(fields, s, float(q), scales)
    return mixed_lp(agg, grid, p, decomposition, weight)


def seq_norm_B(
    fields: np.ndarray,
    grid: TorusGrid,
    s: float,
    p,
    q: float,
    decomposition: Sequence[int],
    weight: Optional[WeightField] = None,
    scales: Optional[np.ndarray] = None,
) -> float:
    """Mixed norm per scale, then the weighted l_q over the scale index."""
    fields = np.asarray(fields)
    if fields.shape[1:] != grid.dims:
        raise GridError(f"field stack shape {fields.shape} != (n,) + {grid.dims}")
    per_scale = np.array(
        [mixed_lp(f, grid, p, decomposition, weight) for f in fields]
    )
    n = len(per_scale)
    w = 2.0 ** (s * (np.arange(n) if scales is None else np.asarray(scales)))
    weighted = w * per_scale
    q = float(q)
    if q == INF:
        return float(np.max(weighted))
    return float(np.sum(weighted**q) ** (1.0 / q))


def _inner_groups(inner_axis_groups: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    return [tuple(sorted(int(a) for a in g)) for g in inner_axis_groups]


def seq_norm_scriptF(
    fields: np.ndarray,
    grid: TorusGrid,
    s: float,
    q_outer: float,
    r_inner: float,
    p_inner,
    inner_axis_groups: Sequence[Sequence[int]],
    weight: Optional[WeightField] = None,
    scales: Optional[np.ndarray] = None,
) -> float:
    """Pointwise weighted l_r over scales, mixed L_p over the inner axis
    blocks (innermost first), then L_q over the outer axes."""
    fields = np.asarray(fields)
    if fields.shape[1:] != grid.dims:
        raise GridError(f"field stack shape {fields.shape} != (n,) + {grid.dims}")
    groups = _inner_groups(inner_axis_groups)
    inner_all = {a for g in groups for a in g}
    outer_axes = tuple(a for a in range(grid.ndim) if a not in inner_all)
    agg = _seq_aggregate(fields, s, float(r_inner), scales)
    if weight is not None:
        agg = agg * weight.multiplier_for(
            _scriptf_weight_exponents(weight, p_inner, q_outer, inner_all)
        )
    inner = mixed_lp_partial(agg, grid, p_inner, groups)
    cell_outer = float(np.prod([grid.period[a] / grid.dims[a] for a in outer_axes]))
    q_outer = float(q_outer)
    if q_outer == INF:
        return float(np.max(inner)) if inner.ndim else float(inner)
    return float((np.sum(inner**q_outer) * cell_outer) ** (1.0 / q_outer))


def _scriptf_weight_exponents(weight: WeightField, p_inner, q_outer, inner_axes) -> tuple:
    groups = block_axes(weight.anisotropy.decomposition)
    p_in = _as_exponents(p_inner, sum(1 for g in groups if set(g) <= set(inner_axes)))
    out, i = [], 0
    for g in groups:
        if set(g) <= set(inner_axes):
            out.append(p_in[i])
            i += 1
        else:
            out.append(float(q_outer))
    return tuple(out)


def seq_norm_scriptF_exchanged(
    fields: np.ndarray,
    grid: TorusGrid,
    s: float,
    q_outer: float,
    r_inner: float,
    p_inner,
    inner_axis_groups: Sequence[Sequence[int]],
    scales: Optional[np.ndarray] = None,
) -> float:
    """Order-exchanged aggregation: inner L_p per scale first, then the
    weighted l_r, then the outer L_q.  Coincides with seq_norm_scriptF
    when r equals the inner exponents."""
    fields = np.asarray(fields)
    groups = _inner_groups(inner_axis_groups)
    inner_all = {a for g in groups for a in g}
    outer_axes = tuple(a for a in range(grid.ndim) if a not in inner_all)
    per_scale = np.stack([mixed_lp_partial(f, grid, p_inner, groups) for f in fields])
    agg = _seq_aggregate(per_scale, s, float(r_inner), scales)
    cell_outer = float(np.prod([grid.period[a] / grid.dims[a] for a in outer_axes]))
    q_outer = float(q_outer)
    if q_outer == INF:
        return float(np.max(agg)) if agg.ndim else float(agg)
    return float((np.sum(agg**q_outer) * cell_outer) ** (1.0 / q_outer))


# --------------------------------------------------------------------------
# Space descriptors
# --------------------------------------------------------------------------

KINDS = ("F", "B", "scriptF", "Lq_of_inner")


@dataclass(frozen=True)
class SpaceSpec:
    """One quasi-norm of the catalogue.

    kind 'F'            : L_p[ l_q^s ] aggregation over dyadic pieces
    kind 'B'            : l_q^s [ L_p ] aggregation
    kind 'scriptF'      : l_r^s pointwise, inner L_p, outer L_q; the
                          filters act on the outer blocks only
    kind 'Lq_of_inner'  : per-outer-slice inner 'F' norm, then outer L_q
    """

    kind: str
    s: float
    p: tuple[float, ...]
    q: float
    anisotropy: DecomposedAnisotropy
    r: Optional[float] = None
    outer_blocks: tuple[int, ...] = ()
    weight_exponents: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterWindowError(f"unknown space kind {self.kind!r}")
        _as_exponents(self.p, len(self.p))
        if self.q <= 0:
            raise ParameterWindowError("q must be positive (inf allowed)")
        if self.kind in ("scriptF", "Lq_of_inner"):
            if not self.outer_blocks:
                raise ParameterWindowError(f"kind {self.kind} needs outer_blocks")
            nb = self.anisotropy.n_blocks
            if not set(self.outer_blocks) < set(range(nb)):
                raise ParameterWindowError("outer_blocks must be a proper subset of blocks")
        if self.kind == "scriptF" and self.r is None:
            raise ParameterWindowError("kind scriptF needs the inner exponent r")

    @property
    def decomposition(self) -> tuple[int, ...]:
        return self.anisotropy.decomposition

    def inner_blocks(self) -> tuple[int, ...]:
        return tuple(
            j for j in range(self.anisotropy.n_blocks) if j not in self.outer_blocks
        )

    def axes_of_blocks(self, blocks: Sequence[int]) -> tuple[int, ...]:
        groups = block_axes(self.decomposition)
        out: list[int] = []
        for j in blocks:
            out.extend(groups[j])
        return tuple(sorted(out))
