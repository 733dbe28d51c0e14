"""Difference operators, local means, maximal functions, and oscillations.

All averages over shift balls use exact lattice shifts: the ball at a
given scale is the set of lattice vectors inside it, and averages are
uniform mixed means over that finite set.  Scales whose ball either
under-resolves (fewer than 3^d_j points in a block) or no longer fits on
the torus are skipped and the skip is reported.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from math import comb
from typing import Optional, Sequence

import numpy as np

from .anisotropy import Anisotropy, DecomposedAnisotropy, dilation_matrix, quasi_norm_points
from .errors import DegenerateCubeError, GridError, ParameterWindowError
from .grid import GridFunction, TorusGrid, from_spectrum
from .mixed_norm import INF, SpaceSpec, block_axes, mixed_lp, seq_norm_F
from .spaces import NormValue

log = logging.getLogger(__name__)

MIN_BLOCK_POINTS_BASE = 3  # per-block guard is 3**block_dim


# --------------------------------------------------------------------------
# Differences
# --------------------------------------------------------------------------


def difference(f: GridFunction, h, M: int) -> GridFunction:
    """M-fold forward difference.

    Integer ``h`` entries are lattice steps realized by exact rolls;
    otherwise ``h`` is a real vector realized by a spectral phase shift.
    """
    if M < 1:
        raise ValueError("difference order M must be >= 1")
    h_arr = np.asarray(h)
    if h_arr.shape != (f.grid.ndim,):
        raise GridError(f"shift must have {f.grid.ndim} entries")
    if np.issubdtype(h_arr.dtype, np.integer):
        vals = _difference_values(f.values, tuple(int(v) for v in h_arr), M, f.grid.ndim)
        return GridFunction(f.grid, vals)
    phase = np.zeros(f.grid.dims)
    for a in range(f.grid.ndim):
        xi = f.grid.axis_frequencies(a)
        shape = [1] * f.grid.ndim
        shape[a] = f.grid.dims[a]
        phase = phase + xi.reshape(shape) * float(h_arr[a])
    mult = (np.exp(1j * phase) - 1.0) ** M
    return from_spectrum(f.grid, f.spectrum * mult[..., None])


def _difference_values(values: np.ndarray, m: tuple[int, ...], M: int, ndim: int) -> np.ndarray:
    axes = tuple(range(ndim))
    out = ((-1.0) ** M) * values
    for i in range(M):
        c = (-1.0) ** i * comb(M, i)
        shift = tuple(-(M - i) * v for v in m)
        out = out + c * np.roll(values, shift, axis=axes)
    return out


def difference_explicit(f: GridFunction, h, M: int) -> GridFunction:
    """Binomial-sum form of the M-fold difference, kept as a cross-check
    against repeated first differences."""
    return difference(f, h, M)


# --------------------------------------------------------------------------
# Lattice shift balls
# --------------------------------------------------------------------------


def _canonical_offsets(grid: TorusGrid, axes: tuple[int, ...]):
    """All canonical lattice offsets of a block with their coordinates.

    Offsets are measured on the torus (per-axis representative in
    [-L/2, L/2)), so shift balls wrap; a ball wider than the period is
    the whole block lattice, matching differences of periodic functions.
    """
    steps = [grid.period[a] / grid.dims[a] for a in axes]
    ranges = [range(-(grid.dims[a] // 2), grid.dims[a] // 2) for a in axes]
    offs = list(itertools.product(*ranges))
    pts = np.array([[m * st for m, st in zip(o, steps)] for o in offs], dtype=float)
    return offs, pts


def _euclidean_ball_offsets(grid: TorusGrid, axes: tuple[int, ...], radius: float):
    offs, pts = _canonical_offsets(grid, axes)
    keep = np.sum(pts**2, axis=1) <= radius**2 * (1 + 1e-12)
    out = [o for o, k in zip(offs, keep) if k]
    out.sort()
    return out


def _quasi_ball_offsets(grid: TorusGrid, axes: tuple[int, ...], blk: Anisotropy, radius: float):
    offs, pts = _canonical_offsets(grid, axes)
    rho = quasi_norm_points(blk, pts)
    keep = rho <= radius * (1 + 1e-12)
    out = [o for o, k in zip(offs, keep) if k]
    out.sort()
    return out


@dataclass(frozen=True)
class DifferenceProfile:
    """Order, shift-ball geometry, and averaging exponents.

    mode 'product': per-block Euclidean balls of radii 2^(-n a_j);
    mode 'quasi'  : per-block quasi-norm balls of common radius 2^(-n).
    """

    anisotropy: DecomposedAnisotropy
    M: int
    phi: tuple[float, ...]
    mode: str = "product"
    a: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if self.M < 1:
            raise ParameterWindowError("difference order M must be >= 1")
        if self.mode not in ("product", "quasi"):
            raise ParameterWindowError(f"unknown profile mode {self.mode!r}")
        if len(self.phi) != self.anisotropy.n_blocks:
            raise ParameterWindowError("need one averaging exponent per block")
        if any(not 1.0 <= v < INF for v in self.phi):
            raise ParameterWindowError("averaging exponents must lie in [1, inf)")
        if self.mode == "product" and self.a is None:
            object.__setattr__(self, "a", block_scalar_exponents(self.anisotropy))

    def block_radii(self, n: int) -> tuple[float, ...]:
        if self.mode == "product":
            return tuple(2.0 ** (-n * aj) for aj in self.a)
        return (2.0**-n,) * self.anisotropy.n_blocks


def block_scalar_exponents(va: DecomposedAnisotropy) -> tuple[float, ...]:
    """Per-block scalar dilation exponents; blocks must be a_j * identity."""
    out = []
    for blk in va.blocks:
        if not blk.is_diagonal or not np.allclose(blk.diagonal, blk.diagonal[0]):
            raise ParameterWindowError(
                "per-block radii need scalar (a_j * identity) blocks; pass radii exponents explicitly"
            )
        out.append(float(blk.diagonal[0]))
    return tuple(out)


def _profile_offsets(grid: TorusGrid, profile: DifferenceProfile, n: int):
    """Per-block shift sets at scale n, or None with a reason when the
    resolution guard trips."""
    va = profile.anisotropy
    radii = profile.block_radii(n)
    groups = block_axes(va.decomposition)
    sets = []
    for blk, axes, r in zip(va.blocks, groups, radii):
        if profile.mode == "product":
            offs = _euclidean_ball_offsets(grid, axes, r)
        else:
            offs = _quasi_ball_offsets(grid, axes, blk, r)
        if len(offs) < MIN_BLOCK_POINTS_BASE ** len(axes):
            return None, (
                f"scale {n}: block ball holds {len(offs)} < "
                f"{MIN_BLOCK_POINTS_BASE ** len(axes)} lattice points"
            )
        sets.append(offs)
    return sets, None


def usable_difference_scales(
    grid: TorusGrid, profile: DifferenceProfile, max_scale: int = 40
) -> tuple[list[int], dict[int, str]]:
    """Scales n >= 1 passing the resolution guard (balls only shrink, so
    the usable range is an initial segment)."""
    usable, skipped = [], {}
    for n in range(1, max_scale + 1):
        sets, reason = _profile_offsets(grid, profile, n)
        if sets is None:
            skipped[n] = reason
            break
        usable.append(n)
    return usable, skipped


def difference_field(f: GridFunction, n: int, profile: DifferenceProfile) -> np.ndarray:
    """Mixed-mean modulus of M-fold differences over the scale-n shift ball.

    Returns the real field x -> || h -> Delta^M_h f(x) ||, the uniform
    mixed mean over the finite lattice ball with the profile exponents.
    """
    grid = f.grid
    if profile.anisotropy.dim != grid.ndim:
        raise GridError("profile anisotropy does not match grid dimension")
    sets, reason = _profile_offsets(grid, profile, n)
    if sets is None:
        raise ParameterWindowError(reason)
    groups = block_axes(profile.anisotropy.decomposition)
    vals = f.values
    ndim = grid.ndim
    M = profile.M

    def rec(j: int, shift: tuple[int, ...]) -> np.ndarray:
        if j == 0:
            d = _difference_values(vals, shift, M, ndim)
            if d.shape[-1] == 1:
                return np.abs(d[..., 0])
            return np.sqrt(np.sum(np.abs(d) ** 2, axis=-1))
        phi = profile.phi[j - 1]
        axes = groups[j - 1]
        acc = None
        for off in sets[j - 1]:
            s = list(shift)
            for a, m in zip(axes, off):
                s[a] = m
            v = rec(j - 1, tuple(s))
            term = v if phi == 1.0 else v**phi
            acc = term if acc is None else acc + term
        acc /= len(sets[j - 1])
        return acc if phi == 1.0 else acc ** (1.0 / phi)

    return rec(profile.anisotropy.n_blocks, (0,) * ndim)


def difference_fields_batch(
    f: GridFunction, scales: Sequence[int], profile: DifferenceProfile
) -> np.ndarray:
    """All scale fields at once for plain means (every phi_j = 1).

    Balls shrink with the scale, so each shift belongs to an initial
    segment of the scale list; one difference evaluation per shift fills
    a bucket and suffix sums recover every scale mean.
    """
    if any(v != 1.0 for v in profile.phi):
        raise ParameterWindowError("batch evaluation needs phi = 1 on every block")
    grid = f.grid
    groups = block_axes(profile.anisotropy.decomposition)
    scales = list(scales)
    block_sets = []
    for n in scales:
        sets, reason = _profile_offsets(grid, profile, n)
        if sets is None:
            raise ParameterWindowError(reason)
        block_sets.append(sets)
    # top index per block offset: largest scale position whose ball holds it
    n_blocks = profile.anisotropy.n_blocks
    union = [sorted(set().union(*[set(block_sets[i][j]) for i in range(len(scales))]))
             for j in range(n_blocks)]
    tops = []
    for j in range(n_blocks):
        member = [set(block_sets[i][j]) for i in range(len(scales))]
        top = {}
        for off in union[j]:
            t = -1
            for i in range(len(scales)):
                if off in member[i]:
                    t = i
                else:
                    break
            top[off] = t
        tops.append(top)

    vals = f.values
    ndim = grid.ndim
    M = profile.M
    sums = [None] * len(scales)
    counts = [0] * len(scales)
    for combo in itertools.product(*union):
        b = min(tops[j][combo[j]] for j in range(n_blocks))
        if b < 0:
            continue
        shift = [0] * ndim
        for axes, off in zip(groups, combo):
            for a, m in zip(axes, off):
                shift[a] = m
        d = _difference_values(vals, tuple(shift), M, ndim)
        mod = np.abs(d[..., 0]) if d.shape[-1] == 1 else np.sqrt(np.sum(np.abs(d) ** 2, axis=-1))
        if sums[b] is None:
            sums[b] = mod
        else:
            sums[b] = sums[b] + mod
        counts[b] += 1
    fields = np.zeros((len(scales),) + grid.dims)
    acc = np.zeros(grid.dims)
    total = 0
    for i in range(len(scales) - 1, -1, -1):
        if sums[i] is not None:
            acc = acc + sums[i]
            total += counts[i]
        fields[i] = acc / total
    return fields


def averaged_difference(f: GridFunction, M: int, n: int, va: DecomposedAnisotropy) -> GridFunction:
    """Signed uniform mean of Delta^M_z f over the quasi-norm ball of
    radius 2^-n (no modulus)."""
    profile = DifferenceProfile(anisotropy=va, M=M, phi=(1.0,) * va.n_blocks, mode="quasi")
    sets, reason = _profile_offsets(f.grid, profile, n)
    if sets is None:
        raise ParameterWindowError(reason)
    groups = block_axes(va.decomposition)
    acc = np.zeros_like(f.values)
    count = 0
    for combo in itertools.product(*sets):
        shift = [0] * f.grid.ndim
        for axes, off in zip(groups, combo):
            for a, m in zip(axes, off):
                shift[a] = m
        acc = acc + _difference_values(f.values, tuple(shift), M, f.grid.ndim)
        count += 1
    return GridFunction(f.grid, acc / count)


def difference_norm(
    f: GridFunction,
    spec: SpaceSpec,
    profile: DifferenceProfile,
    max_scale: int = 40,
) -> NormValue:
    """Difference-side quasi-norm: base mixed norm plus the weighted l_q
    aggregate of the scale fields over all usable scales.

    Validates the two-sided-estimate parameter window before computing.
    """
    if spec.kind != "F":
        raise ParameterWindowError("difference_norm compares against kind 'F'")
    va = profile.anisotropy
    d = np.array(va.decomposition, dtype=float)
    phi = np.array(profile.phi)
    if any(not 1.0 < pj < INF for pj in spec.p):
        raise ParameterWindowError("difference_norm window needs p_j in (1, inf)")
    if not 1.0 <= spec.q:
        raise ParameterWindowError("difference_norm window needs q in [1, inf]")
    if spec.s <= 0:
        raise ParameterWindowError("difference_norm window needs s > 0")
    if profile.mode == "product":
        a = np.array(profile.a)
        threshold = float(np.sum(a * d * (1.0 - 1.0 / phi)))
        order_bound = profile.M * float(np.min(a * d))
    else:
        traces = np.array(va.traces)
        threshold = float(np.sum(traces * (1.0 - 1.0 / phi)))
        order_bound = profile.M * min(b.lambda_min for b in va.blocks)
    if spec.s <= threshold:
        raise ParameterWindowError(
            f"smoothness s={spec.s} must exceed the averaging threshold {threshold:.6g}"
        )
    if order_bound <= spec.s:
        raise ParameterWindowError(
            f"difference order M={profile.M} gives bound {order_bound:.6g} <= s={spec.s}"
        )

    scales, skipped = usable_difference_scales(f.grid, profile, max_scale)
    for n, reason in skipped.items():
        log.info("difference_norm: skipping %s", reason)
    if not scales:
        raise ParameterWindowError("no usable difference scales on this grid")

    base = mixed_lp(f.modulus(), f.grid, spec.p, spec.decomposition)
    if all(v == 1.0 for v in profile.phi):
        fields = difference_fields_batch(f, scales, profile)
    else:
        fields = np.stack([difference_field(f, n, profile) for n in scales])
    tail = seq_norm_F(
        fields,
        f.grid,
        spec.s,
        spec.p,
        spec.q,
        spec.decomposition,
        scales=np.array(scales, dtype=float),
    )
    pieces = (base,) + tuple(
        (2.0 ** (n * spec.s)) * mixed_lp(fields[i], f.grid, spec.p, spec.decomposition)
        for i, n in enumerate(scales)
    )
    tag = f"diff[M={profile.M},mode={profile.mode},scales={scales[0]}..{scales[-1]}]"
    return NormValue(spec=spec, value=base + tail, pieces=pieces, bank_id=tag)


# --------------------------------------------------------------------------
# Maximal functions
# --------------------------------------------------------------------------


def _block_offset_rhos(grid: TorusGrid, axes: tuple[int, ...], blk: Anisotropy):
    """All canonical block offsets with their quasi-norms, sorted by rho."""
    steps = [grid.period[a] / grid.dims[a] for a in axes]
    ranges = [range(-(grid.dims[a] // 2), grid.dims[a] // 2) for a in axes]
    offs = list(itertools.product(*ranges))
    pts = np.array([[m * st for m, st in zip(o, steps)] for o in offs], dtype=float)
    rho = quasi_norm_points(blk, pts)
    order = np.lexsort(tuple(np.array([o[i] for o in offs]) for i in range(len(axes) - 1, -1, -1)))
    order = order[np.argsort(rho[order], kind="stable")]
    return [offs[i] for i in order], rho[order]


def maximal(f: GridFunction, va: DecomposedAnisotropy, r) -> np.ndarray:
    """Iterated blockwise maximal function over dyadic ball radii.

    Block j replaces g by the sup over dyadic radii of the r_j-mean of g
    over the block ball; blocks compose in order.  The singleton ball is
    always included, so the result dominates |f| pointwise.
    """
    grid = f.grid
    if va.dim != grid.ndim:
        raise GridError("anisotropy dimension does not match grid")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if r.shape == (1,):
        r = np.repeat(r, va.n_blocks)
    if r.shape != (va.n_blocks,) or np.any(r <= 0):
        raise ValueError("need one positive exponent per block")

    g = f.modulus()
    groups = block_axes(va.decomposition)
    for blk, axes, rj in zip(va.blocks, groups, r):
        offs, rho = _block_offset_rhos(grid, axes, blk)
        powered = g**rj
        best = g.copy()  # singleton ball: the function itself
        running = np.zeros_like(powered)
        count = 0
        level = None
        nonzero = rho[rho > 0]
        if len(nonzero) == 0:
            continue
        next_thresh = float(nonzero[0])
        i = 0
        while i < len(offs):
            while i < len(offs) and rho[i] <= next_thresh * (1 + 1e-12):
                shift = [0] * grid.ndim
                for a, m in zip(axes, offs[i]):
                    shift[a] = m
                running = running + np.roll(powered, tuple(-s for s in shift), axis=tuple(range(grid.ndim)))
                count += 1
                i += 1
            np.maximum(best, (running / count) ** (1.0 / rj), out=best)
            next_thresh *= 2.0
        g = best
    return g


def peetre_maximal(f: GridFunction, va: DecomposedAnisotropy, r, radii) -> np.ndarray:
    """sup_z |f(x+z)| / prod_j (1 + R_j rho_j(z_j))^(tr_j / r_j) over the lattice.

    Requires the spectrum inside the per-block product ball of the given
    radii; the damping makes the supremum block-separable, so blocks are
    swept one at a time.
    """
    grid = f.grid
    if va.dim != grid.ndim:
        raise GridError("anisotropy dimension does not match grid")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if r.shape == (1,):
        r = np.repeat(r, va.n_blocks)
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if radii.shape == (1,):
        radii = np.repeat(radii, va.n_blocks)
    if r.shape != (va.n_blocks,) or radii.shape != (va.n_blocks,):
        raise ValueError("need one exponent and one radius per block")

    _check_product_band(f, va, radii)

    g = f.modulus()
    groups = block_axes(va.decomposition)
    for blk, axes, rj, Rj in zip(va.blocks, groups, r, radii):
        offs, rho = _block_offset_rhos(grid, axes, blk)
        damp = (1.0 + Rj * rho) ** (blk.trace / rj)
        best = None
        for off, w in zip(offs, damp):
            shift = [0] * grid.ndim
            for a, m in zip(axes, off):
                shift[a] = m
            cand = np.roll(g, tuple(-s for s in shift), axis=tuple(range(grid.ndim))) / w
            best = cand if best is None else np.maximum(best, cand)
        g = best
    return g


def _check_product_band(f: GridFunction, va: DecomposedAnisotropy, radii) -> None:
    support = f.support_mask()
    if not np.any(support):
        return
    groups = block_axes(va.decomposition)
    for blk, axes, Rj in zip(va.blocks, groups, radii):
        other = tuple(a for a in range(f.grid.ndim) if a not in axes)
        proj = np.any(support, axis=other) if other else support
        pts = f.grid.frequency_points(axes).reshape(-1, blk.dim)
        rho = quasi_norm_points(blk, pts).reshape(proj.shape)
        worst = float(np.max(rho[proj]))
        if worst > Rj * (1 + 1e-9):
            raise GridError(
                f"spectrum reaches block quasi-norm {worst:.6g} beyond the stated radius {Rj:.6g}"
            )


# --------------------------------------------------------------------------
# Dyadic cubes and polynomial oscillation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DyadicCube:
    """Image of [0,1)^d + k (optionally widened to sidelength b) under A_{2^-n}."""

    anisotropy: DecomposedAnisotropy
    scale: int
    index: tuple[int, ...]
    widen: float = 1.0

    def __post_init__(self):
        if len(self.index) != self.anisotropy.dim:
            raise ValueError("index length must match dimension")
        if self.widen <= 0:
            raise ValueError("widening factor must be positive")

    def box_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        b = self.widen
        k = np.asarray(self.index, dtype=float)
        lo = k + (1.0 - b) / 2.0
        hi = k + (1.0 + b) / 2.0
        return lo, hi

    def lattice_points(self, grid: TorusGrid) -> tuple[np.ndarray, np.ndarray]:
        """(index array, mapped coordinates y = A_{2^n} x) of lattice points
        inside the cube, allowing one torus wrap per axis."""
        va = self.anisotropy
        if va.dim != grid.ndim:
            raise GridError("cube anisotropy does not match grid dimension")
        lo, hi = self.box_bounds()
        coords = np.meshgrid(*[grid.axis_coords(a) for a in range(grid.ndim)], indexing="ij")
        x = np.stack(coords, axis=-1).reshape(-1, grid.ndim)
        expand = dilation_matrix(va.direct_sum(), 2.0**self.scale)
        period = np.asarray(grid.period)
        chosen = np.zeros(len(x), dtype=bool)
        y_out = np.zeros_like(x)
        for wrap in itertools.product((-1.0, 0.0, 1.0), repeat=grid.ndim):
            y = (x + period * np.asarray(wrap)) @ expand.T
            ok = np.all((y >= lo) & (y < hi), axis=1) & ~chosen
            y_out[ok] = y[ok]
            chosen |= ok
        idx = np.argwhere(chosen.reshape(grid.dims))
        ys = y_out[chosen]
        return idx, ys


@dataclass(frozen=True)
class OscillationResult:
    error: float
    normalized: float
    coefficients: tuple[complex, ...]
    inf_suboptimal: bool = False


def _monomial_basis(y: np.ndarray, cube: DyadicCube, max_degree: int) -> np.ndarray:
    lo, hi = cube.box_bounds()
    center = (lo + hi) / 2.0
    half = (hi - lo) / 2.0
    u = (y - center) / half
    d = y.shape[1]
    powers = [
        alpha
        for alpha in itertools.product(range(max_degree + 1), repeat=d)
        if sum(alpha) <= max_degree
    ]
    powers.sort()
    cols = [np.prod([u[:, i] ** a for i, a in enumerate(alpha)], axis=0) for alpha in powers]
    return np.stack(cols, axis=1)


def oscillation(
    f: GridFunction, M: int, cube: DyadicCube, p: float = 2.0, grid: Optional[TorusGrid] = None
) -> OscillationResult:
    """Best local approximation error by polynomials of total degree < M.

    p = 2 solves the least-squares problem exactly; p = 1 uses
    iteratively reweighted least squares; p = inf reports the sup-norm
    residual of the L2 fit with a suboptimality flag.  M = 0 means no
    subtraction, so the normalized error of the constant 1 is 1.
    """
    if f.channels != 1:
        raise GridError("oscillation expects a single-channel function")
    grid = f.grid if grid is None else grid
    idx, ys = cube.lattice_points(grid)
    if len(idx) == 0:
        raise DegenerateCubeError("cube contains no lattice points")
    samples = f.values[tuple(idx.T) + (0,)]
    cell = grid.cell_volume

    if M == 0:
        resid = samples
        coeffs: tuple[complex, ...] = ()
    else:
        basis = _monomial_basis(ys, cube, M - 1)
        if len(samples) < basis.shape[1]:
            raise DegenerateCubeError(
                f"{len(samples)} samples cannot determine {basis.shape[1]} coefficients"
            )
        if p == 2.0 or p == INF:
            sol, *_ = np.linalg.lstsq(basis, samples, rcond=None)
        elif p == 1.0:
            sol = _irls_l1(basis, samples)
        else:
            raise ParameterWindowError("oscillation supports p in {1, 2, inf}")
        resid = samples - basis @ sol
        coeffs = tuple(sol)

    if p == INF:
        err = float(np.max(np.abs(resid)))
        norm_one = 1.0
        subopt = M > 0
    else:
        err = float((np.sum(np.abs(resid) ** p) * cell) ** (1.0 / p))
        norm_one = float((len(samples) * cell) ** (1.0 / p))
        subopt = False
    return OscillationResult(
        error=err, normalized=err / norm_one, coefficients=coeffs, inf_suboptimal=subopt
    )


def _irls_l1(basis: np.ndarray, samples: np.ndarray, iters: int = 50, tol: float = 1e-8) -> np.ndarray:
    sol, *_ = np.linalg.lstsq(basis, samples, rcond=None)
    for _ in range(iters):
        resid = samples - basis @ sol
        w = 1.0 / np.sqrt(np.maximum(np.abs(resid), 1e-12))
        bw = basis * w[:, None]
        sw = samples * w
        new, *_ = np.linalg.lstsq(bw, sw, rcond=None)
        if np.max(np.abs(new - sol)) < tol * (1.0 + np.max(np.abs(sol))):
            sol = new
            break
        sol = new
    return sol
