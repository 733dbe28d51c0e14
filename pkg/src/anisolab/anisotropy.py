"""Expansive dilation groups and homogeneous quasi-norms.

A dilation matrix A (all eigenvalue real parts positive) generates the
one-parameter group A_t = exp(A ln t).  The associated quasi-norm of a
point x is the unique lambda > 0 with |A_{1/lambda} x| = 1.  Block
tuples of such matrices act on a split of the coordinate axes, with the
blockwise maximum as the joint quasi-norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, NonMonotoneError, SpectrumError

SPECTRAL_TOL = 1e-10
BISECTION_TOL = 1e-10
BISECTION_CAP = 200

# Condition-number threshold below which the eigenvector route for the
# matrix exponential is trusted over scaling-and-squaring.
_EIG_COND_MAX = 1e8


@dataclass(frozen=True)
class Anisotropy:
    """Validated dilation matrix with cached spectral data."""

    matrix: np.ndarray
    dim: int
    trace: float
    lambda_min: float
    lambda_max: float
    diagonal: Optional[np.ndarray]
    _eigvals: Optional[np.ndarray] = field(repr=False, default=None)
    _eigvecs: Optional[np.ndarray] = field(repr=False, default=None)
    _eigvecs_inv: Optional[np.ndarray] = field(repr=False, default=None)

    @property
    def is_diagonal(self) -> bool:
        return self.diagonal is not None

    @property
    def diagonalizable(self) -> bool:
        return self._eigvecs is not None


def new_anisotropy(matrix) -> Anisotropy:
    """Validate a square matrix and cache its spectral data.

    Rejects matrices with an eigenvalue real part below the spectral
    tolerance.  Non-diagonal inputs must additionally have a positive
    definite symmetric part, which makes |A_t x| strictly increasing in
    t and the quasi-norm root unique.
    """
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise SpectrumError(f"dilation matrix must be square, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise SpectrumError("dilation matrix entries must be finite")
    dim = mat.shape[0]

    eigvals, eigvecs = np.linalg.eig(mat)
    re = eigvals.real
    if np.min(re) <= SPECTRAL_TOL:
        raise SpectrumError(
            f"eigenvalue real parts must exceed {SPECTRAL_TOL}, got min {np.min(re):.3e}"
        )

    diagonal = None
    if np.count_nonzero(mat - np.diag(np.diagonal(mat))) == 0:
        diagonal = np.diagonal(mat).copy()
        diagonal.setflags(write=False)
    else:
        sym_eigs = np.linalg.eigvalsh(0.5 * (mat + mat.T))
        if np.min(sym_eigs) <= SPECTRAL_TOL:
            raise NonMonotoneError(
                "non-diagonal dilation matrix needs a positive definite symmetric "
                f"part for a unique quasi-norm root; min symmetric eigenvalue "
                f"{np.min(sym_eigs):.3e}"
            )

    vecs = vecs_inv = vals = None
    try:
        cond = np.linalg.cond(eigvecs)
    except np.linalg.LinAlgError:
        cond = np.inf
    if np.isfinite(cond) and cond < _EIG_COND_MAX:
        vals = eigvals.copy()
        vecs = eigvecs.copy()
        vecs_inv = np.linalg.inv(eigvecs)
        for a in (vals, vecs, vecs_inv):
            a.setflags(write=False)

    mat = mat.copy()
    mat.setflags(write=False)
    return Anisotropy(
        matrix=mat,
        dim=dim,
        trace=float(np.trace(mat)),
        lambda_min=float(np.min(re)),
        lambda_max=float(np.max(re)),
        diagonal=diagonal,
        _eigvals=vals,
        _eigvecs=vecs,
        _eigvecs_inv=vecs_inv,
    )


def dilation_matrix(aniso: Anisotropy, t: float) -> np.ndarray:
    """exp(A ln t) via the eigenvector route when well conditioned, else
    scaling-and-squaring."""
    if t <= 0:
        raise ValueError(f"dilation parameter must be positive, got {t}")
    if aniso.is_diagonal:
        return np.diag(np.power(float(t), aniso.diagonal))
    if aniso.diagonalizable:
        lt = np.log(float(t))
        m = (aniso._eigvecs * np.exp(aniso._eigvals * lt)) @ aniso._eigvecs_inv
        return m.real
    return dilation_matrix_expm(aniso, t)


def dilation_matrix_expm(aniso: Anisotropy, t: float) -> np.ndarray:
    """Scaling-and-squaring route, kept separate for cross-checking."""
    if t <= 0:
        raise ValueError(f"dilation parameter must be positive, got {t}")
    return scipy.linalg.expm(aniso.matrix * np.log(float(t)))


def dilate(aniso: Anisotropy, t: float, x) -> np.ndarray:
    """Apply A_t to one point or to an array of points (last axis = dim)."""
    if t <= 0:
        raise ValueError(f"dilation parameter must be positive, got {t}")
    pts = np.asarray(x, dtype=float)
    if pts.shape[-1] != aniso.dim:
        raise ValueError(f"point dimension {pts.shape[-1]} != matrix dimension {aniso.dim}")
    if aniso.is_diagonal:
        return pts * np.power(float(t), aniso.diagonal)
    return pts @ dilation_matrix(aniso, t).T


def _bracket_exponents(aniso: Anisotropy) -> tuple[float, float]:
    lo_exp = 1.0 / (aniso.lambda_max + 0.1)
    hi_exp = 1.0 / (aniso.lambda_min - min(0.1, aniso.lambda_min / 2.0))
    return lo_exp, hi_exp


def _sphere_gap_log(aniso: Anisotropy, pts: np.ndarray, u: np.ndarray) -> np.ndarray:
    """log |A_{1/lambda} x| at lambda = e^u, vectorized over points."""
    if aniso.is_diagonal:
        # |A_{1/lambda} x|^2 = sum_j x_j^2 lambda^{-2 a_j}
        sq = pts.astype(float) ** 2
        expo = np.exp(-2.0 * np.outer(u, aniso.diagonal))
        return 0.5 * np.log(np.sum(sq * expo, axis=-1))
    if aniso.diagonalizable:
        y = pts.astype(complex) @ aniso._eigvecs_inv.T
        scaled = y * np.exp(-np.outer(u, aniso._eigvals))
        z = scaled @ aniso._eigvecs.T
        return 0.5 * np.log(np.sum(np.abs(z) ** 2, axis=-1))
    out = np.empty(len(pts))
    for i, (p, ui) in enumerate(zip(pts, u)):
        m = dilation_matrix_expm(aniso, float(np.exp(-ui)))
        out[i] = np.log(np.linalg.norm(m @ p))
    return out


def quasi_norm_points(aniso: Anisotropy, pts, tol: float = BISECTION_TOL) -> np.ndarray:
    """Quasi-norm of an array of points, shape (..., dim).

    Bisection in log(lambda) from the spectral-envelope bracket; the
    bracket is widened geometrically when the envelope constants are
    unfavourable.  Diagonal matrices iterate to machine precision.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    arr = np.asarray(pts, dtype=float)
    if arr.shape[-1] != aniso.dim:
        raise ValueError(f"point dimension {arr.shape[-1]} != matrix dimension {aniso.dim}")
    flat = arr.reshape(-1, aniso.dim)
    out = np.zeros(len(flat))
    norms = np.linalg.norm(flat, axis=-1)
    live = norms > 0
    if not np.any(live):
        return out.reshape(arr.shape[:-1])

    p = flat[live]
    r = norms[live]
    lo_exp, hi_exp = _bracket_exponents(aniso)
    logr = np.log(r)
    u_lo = np.where(logr >= 0, lo_exp * logr, hi_exp * logr)
    u_hi = np.where(logr >= 0, hi_exp * logr, lo_exp * logr)
    u_lo, u_hi = u_lo - 1e-3, u_hi + 1e-3

    # g(u) = log|A_{exp(-u)} x| is strictly decreasing in u; widen until
    # g(u_lo) >= 0 >= g(u_hi).
    for _ in range(80):
        bad = _sphere_gap_log(aniso, p, u_lo) < 0
        if not np.any(bad):
            break
        u_lo[bad] -= np.log(2.0)
    else:
        raise ConvergenceError("could not establish a lower bisection bracket")
    for _ in range(80):
        bad = _sphere_gap_log(aniso, p, u_hi) > 0
        if not np.any(bad):
            break
        u_hi[bad] += np.log(2.0)
    else:
        raise ConvergenceError("could not establish an upper bisection bracket")

    target = 1e-14 if aniso.is_diagonal else min(tol, 1e-10)
    for _ in range(BISECTION_CAP):
        mid = 0.5 * (u_lo + u_hi)
        high = _sphere_gap_log(aniso, p, mid) > 0
        u_lo = np.where(high, mid, u_lo)
        u_hi = np.where(high, u_hi, mid)
        if np.max(u_hi - u_lo) < target:
            break
    else:
        raise ConvergenceError(
            f"quasi-norm bisection did not reach tol {target} in {BISECTION_CAP} iterations"
        )

    out[live] = np.exp(0.5 * (u_lo + u_hi))
    return out.reshape(arr.shape[:-1])


def quasi_norm(aniso: Anisotropy, x, tol: float = BISECTION_TOL) -> float:
    """Quasi-norm of a single point."""
    return float(quasi_norm_points(aniso, np.asarray(x, dtype=float)[None, :], tol)[0])


@dataclass(frozen=True)
class DecomposedAnisotropy:
    """Axis split d = (d_1..d_l) with one dilation matrix per block."""

    decomposition: tuple[int, ...]
    blocks: tuple[Anisotropy, ...]
    quasi_triangle_constant: float

    @property
    def dim(self) -> int:
        return sum(self.decomposition)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def trace(self) -> float:
        return sum(b.trace for b in self.blocks)

    @property
    def traces(self) -> tuple[float, ...]:
        return tuple(b.trace for b in self.blocks)

    def block_slices(self) -> tuple[slice, ...]:
        out, start = [], 0
        for d in self.decomposition:
            out.append(slice(start, start + d))
            start += d
        return tuple(out)

    def direct_sum(self) -> Anisotropy:
        full = np.zeros((self.dim, self.dim))
        for sl, blk in zip(self.block_slices(), self.blocks):
            full[sl, sl] = blk.matrix
        return new_anisotropy(full)

    def scaled(self, lam: float) -> "DecomposedAnisotropy":
        return decompose([lam * b.matrix for b in self.blocks])

    def axis_exponents(self) -> Optional[np.ndarray]:
        """Per-axis diagonal exponents, or None if any block is non-diagonal."""
        if any(not b.is_diagonal for b in self.blocks):
            return None
        return np.concatenate([b.diagonal for b in self.blocks])


def decompose(blocks: Sequence, estimate_pairs: int = 2000, seed: int = 12345) -> DecomposedAnisotropy:
    """Build a decomposed anisotropy from per-block matrices.

    The quasi-triangle constant is a seeded sampling estimate, not a
    certified bound.
    """
    blk = tuple(b if isinstance(b, Anisotropy) else new_anisotropy(b) for b in blocks)
    if not blk:
        raise ValueError("need at least one block")
    va = DecomposedAnisotropy(
        decomposition=tuple(b.dim for b in blk),
        blocks=blk,
        quasi_triangle_constant=float("nan"),
    )
    va.direct_sum()  # validates the block-diagonal sum
    c = estimate_quasi_triangle_constant(va, n_pairs=estimate_pairs, seed=seed)
    object.__setattr__(va, "quasi_triangle_constant", c)
    return va


def isotropic(decomposition: Sequence[int]) -> DecomposedAnisotropy:
    """Identity dilations on every block."""
    return decompose([np.eye(int(d)) for d in decomposition])


def vector_quasi_norm_points(va: DecomposedAnisotropy, pts, tol: float = BISECTION_TOL) -> np.ndarray:
    """max_j rho_{A_j}(x_j) over an array of points, shape (..., dim)."""
    arr = np.asarray(pts, dtype=float)
    if arr.shape[-1] != va.dim:
        raise ValueError(f"point dimension {arr.shape[-1]} != decomposition total {va.dim}")
    parts = [
        quasi_norm_points(blk, arr[..., sl], tol)
        for sl, blk in zip(va.block_slices(), va.blocks)
    ]
    return np.max(np.stack(parts, axis=0), axis=0)


def vector_quasi_norm(va: DecomposedAnisotropy, x, tol: float = BISECTION_TOL) -> float:
    return float(vector_quasi_norm_points(va, np.asarray(x, dtype=float)[None, :], tol)[0])


_BALL_BOUNDARY_SLACK = 1e-9  # absorbs quasi-norm solver noise on closed boundaries


def ball_contains(va: DecomposedAnisotropy, center, radii: Union[float, Sequence[float]], x) -> bool:
    """Closed-ball membership; scalar radius uses the joint quasi-norm,
    a per-block radius vector checks each block."""
    c = np.asarray(center, dtype=float)
    p = np.asarray(x, dtype=float)
    if c.shape != (va.dim,) or p.shape != (va.dim,):
        raise ValueError(f"center/point must have dimension {va.dim}")
    diff = p - c
    if np.isscalar(radii) or np.asarray(radii).ndim == 0:
        r = float(radii)
        if r <= 0:
            raise ValueError("radius must be positive")
        return vector_quasi_norm(va, diff) <= r * (1 + _BALL_BOUNDARY_SLACK)
    rr = np.asarray(radii, dtype=float)
    if rr.shape != (va.n_blocks,):
        raise ValueError(f"need one radius per block, got shape {rr.shape}")
    if np.any(rr <= 0):
        raise ValueError("radii must be positive")
    return all(
        quasi_norm(blk, diff[sl]) <= r * (1 + _BALL_BOUNDARY_SLACK)
        for sl, blk, r in zip(va.block_slices(), va.blocks, rr)
    )


def estimate_quasi_triangle_constant(
    va: DecomposedAnisotropy, n_pairs: int = 2000, seed: int = 12345
) -> float:
    """Sampled sup of rho(x+y)/(rho(x)+rho(y)); an estimate, not certified."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n_pairs, va.dim))
    y = rng.standard_normal((n_pairs, va.dim))
    scale = 10.0 ** rng.uniform(-2, 2, size=(n_pairs, 1))
    x, y = x * scale, y * 10.0 ** rng.uniform(-2, 2, size=(n_pairs, 1))
    num = vector_quasi_norm_points(va, x + y)
    den = vector_quasi_norm_points(va, x) + vector_quasi_norm_points(va, y)
    ok = den > 0
    return float(np.max(num[ok] / den[ok]))


def monte_carlo_ball_volume(
    va: DecomposedAnisotropy, radius: float, n_samples: int = 20000, seed: int = 0
) -> tuple[float, float]:
    """Monte Carlo volume of the quasi-norm ball with its standard error."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    half = np.concatenate(
        [
            np.full(blk.dim, np.linalg.norm(dilation_matrix(blk, radius), 2))
            for blk in va.blocks
        ]
    )
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(n_samples, va.dim)) * half
    inside = vector_quasi_norm_points(va, pts) <= radius
    box = float(np.prod(2.0 * half))
    frac = float(np.mean(inside))
    vol = box * frac
    stderr = box * float(np.sqrt(max(frac * (1 - frac), 1e-30) / n_samples))
    return vol, stderr


def spectral_envelope_constants(
    aniso: Anisotropy,
    eps: float = 0.05,
    ts=(1.0, 2.0, 4.0, 8.0, 16.0),
    n_dirs: int = 200,
    seed: int = 0,
) -> tuple[float, float]:
    """Measured constants (c_lo, c_hi) with
    c_lo * t^(lambda_min - eps) <= |A_t x| <= c_hi * t^(lambda_max + eps)
    over unit directions x and the given t >= 1."""
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n_dirs, aniso.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    c_lo, c_hi = np.inf, 0.0
    for t in ts:
        if t < 1:
            raise ValueError("envelope constants are measured for t >= 1")
        mags = np.linalg.norm(dilate(aniso, t, dirs), axis=1)
        c_lo = min(c_lo, float(np.min(mags / t ** (aniso.lambda_min - eps))))
        c_hi = max(c_hi, float(np.max(mags / t ** (aniso.lambda_max + eps))))
    return c_lo, c_hi
