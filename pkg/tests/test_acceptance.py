"""Acceptance suite: one test per exit criterion, each printing a
pass/fail line with its runtime and checked at the stated tolerance."""

import math
import time

import numpy as np
import pytest

from anisolab import lab
from anisolab.anisotropy import decompose, dilate, isotropic, new_anisotropy, quasi_norm_points
from anisolab.filterbank import build_bank
from anisolab.grid import make_grid, random_bandlimited
from anisolab.lab import CampaignConfig, FamilySpec, MemberResult, Thresholds
from anisolab.mixed_norm import SpaceSpec
from anisolab.spaces import tl_norm

# Matched axis-2 period: the (1,2)-anisotropic Nyquist quasi-radius is 64
# on both axes of a 64-point grid, giving a covered zone of radius 32.
L2 = math.pi / 64

ANISO = dict(
    dims=(64, 64),
    period=(1.0, L2),
    decomposition=(1, 1),
    block_diagonals=((1.0,), (2.0,)),
    s=1.0,
    p=(2.0, 2.0),
    q=2.0,
    r=2.0,
    gamma=1.0,
    delta=2.0,
)


def report_line(num, name, ok, elapsed, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num:2d} [{status}] {name} ({elapsed:.2f}s) {detail}")
    return ok


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def test_criterion_01_quasi_norm_homogeneity():
    with Timer() as tm:
        rng = np.random.default_rng(20260801)
        pts3 = rng.standard_normal((1000, 3)) * 10.0 ** rng.uniform(-2, 2, size=(1000, 1))
        diag = new_anisotropy(np.diag([1.0, 2.0, 0.5]))
        worst_diag = 0.0
        for t in (0.25, 0.5, 2.0, 4.0):
            rho = quasi_norm_points(diag, pts3)
            rho_t = quasi_norm_points(diag, dilate(diag, t, pts3))
            worst_diag = max(worst_diag, float(np.max(np.abs(rho_t - t * rho) / (t * rho))))
        gen = new_anisotropy([[1.0, 0.5], [0.1, 2.0]])
        pts2 = rng.standard_normal((1000, 2)) * 10.0 ** rng.uniform(-2, 2, size=(1000, 1))
        worst_gen = 0.0
        for t in (0.25, 0.5, 2.0, 4.0):
            rho = quasi_norm_points(gen, pts2)
            rho_t = quasi_norm_points(gen, dilate(gen, t, pts2))
            worst_gen = max(worst_gen, float(np.max(np.abs(rho_t - t * rho) / (t * rho))))
    ok = worst_diag <= 1e-8 and worst_gen <= 1e-5 and tm.elapsed < 1.0
    assert report_line(
        1,
        "quasi-norm homogeneity",
        ok,
        tm.elapsed,
        f"diag_err={worst_diag:.2e} gen_err={worst_gen:.2e}",
    )


def test_criterion_02_partition_of_unity():
    with Timer() as tm:
        grid = make_grid((128, 128), (1.0, L2))
        va = decompose([np.diag([1.0]), np.diag([2.0])])
        bank = build_bank(grid, va, 1.0, 2.0)
        total = bank.multipliers.sum(axis=0)
        err = float(np.max(np.abs(total[bank.covered_mask()] - 1.0)))
    ok = err <= 1e-14 and tm.elapsed < 1.0
    assert report_line(2, "partition of unity on 128x128", ok, tm.elapsed, f"err={err:.2e}")


def test_criterion_03_fubini_exactness():
    with Timer() as tm:
        cfg = CampaignConfig(
            **ANISO,
            family=FamilySpec(
                seed=301, count=100, band_kind="kbox", band_params=(2, 1), dilations=(1.0,)
            ),
            thresholds=Thresholds(exact_tol=1e-10),
            refine=False,
        )
        rep = lab.verify_fubini(cfg)
        worst = max(abs(r.ratio - 1.0) for r in rep.records)
    ok = rep.passed and worst <= 1e-10 and tm.elapsed < 10.0
    assert report_line(3, "fubini exactness", ok, tm.elapsed, f"max|ratio-1|={worst:.2e}")


def test_criterion_04_bank_independence():
    with Timer() as tm:
        va = decompose([np.diag([1.0]), np.diag([2.0])])
        spreads = {}
        for dims in ((64, 64), (128, 128)):
            grid = make_grid(dims, (1.0, L2))
            b1 = build_bank(grid, va, 1.0, 2.0)
            b2 = build_bank(grid, va, 1.0, 1.5)
            spec = SpaceSpec(kind="F", s=1.0, p=(2.0, 2.0), q=2.0, anisotropy=va)
            records = []
            for i in range(100):
                f = random_bandlimited(grid, 400 + i, lab.KBoxBand((2, 1)))
                lhs = tl_norm(f, spec, b1).value
                rhs = tl_norm(f, spec, b2).value
                records.append(
                    MemberResult(member_id=f"r{i}", t=1.0, lhs=lhs, rhs=rhs, ratio=lhs / rhs)
                )
            rep = lab.equivalence_report(
                "banks", records, Thresholds(spread_max=4.0), check_drift=False
            )
            spreads[dims] = rep.spread
        delta = abs(spreads[(128, 128)] - spreads[(64, 64)]) / spreads[(64, 64)]
    ok = spreads[(64, 64)] <= 4.0 and delta <= 0.15 and tm.elapsed < 60.0
    assert report_line(
        4,
        "bank independence",
        ok,
        tm.elapsed,
        f"spread64={spreads[(64, 64)]:.3f} delta={delta:.3f}",
    )


def test_criterion_05_scaling():
    with Timer() as tm:
        cfg = CampaignConfig(
            dims=(64, 64),
            period=(math.pi, math.pi),
            decomposition=(1, 1),
            block_diagonals=((1.0,), (1.0,)),
            s=1.0,
            p=(2.0, 2.0),
            q=2.0,
            r=2.0,
            gamma=1.0,
            delta=2.0,
            family=FamilySpec(
                seed=501, count=50, band_kind="kbox", band_params=(1, 1), dilations=(1.0, 4.0)
            ),
            thresholds=Thresholds(spread_max=2.0, drift_max=0.05, refinement_max=0.15),
            lambdas=(0.5, 2.0),
            refinement_count=10,
        )
        rep = lab.verify_scaling(cfg)
    ok = rep.passed and rep.spread <= 2.0 and abs(rep.drift_slope) <= 0.05 and tm.elapsed < 30.0
    assert report_line(
        5,
        "scaling equivalence",
        ok,
        tm.elapsed,
        f"spread={rep.spread:.3f} drift={rep.drift_slope:.3e}",
    )


def test_criterion_06_lifting():
    with Timer() as tm:
        cfg = CampaignConfig(
            **ANISO,
            family=FamilySpec(
                seed=601, count=50, band_kind="kbox", band_params=(2, 1), dilations=(1.0, 2.0)
            ),
            thresholds=Thresholds(spread_max=4.0, drift_max=0.05, refinement_max=0.15),
            sigmas=(-1.0, 1.0),
            refinement_count=10,
        )
        rep = lab.verify_lifting(cfg)
        checks = dict(rep.checks)
    ok = (
        rep.passed
        and checks.get("roundtrip_1e-12", False)
        and rep.spread <= 4.0
        and (rep.refinement_delta is not None and rep.refinement_delta <= 0.15)
        and tm.elapsed < 30.0
    )
    assert report_line(
        6,
        "lifting isomorphism",
        ok,
        tm.elapsed,
        f"spread={rep.spread:.3f} refine={rep.refinement_delta:.3f}",
    )


def test_criterion_07_difference_norm():
    with Timer() as tm:
        cfg = CampaignConfig(
            **ANISO,
            family=FamilySpec(
                seed=701, count=50, band_kind="kbox", band_params=(2, 1), dilations=(1.0, 2.0)
            ),
            thresholds=Thresholds(spread_max=8.0, drift_max=0.05, refinement_max=0.15),
            diff_M=2,
            diff_phi=(1.0, 1.0),
            diff_mode="product",
            refinement_count=8,
        )
        rep = lab.verify_difference(cfg)
    ok = (
        rep.passed
        and rep.spread <= 8.0
        and abs(rep.drift_slope) <= 0.05
        and rep.refinement_delta <= 0.15
        and tm.elapsed < 120.0
    )
    assert report_line(
        7,
        "difference-norm equivalence",
        ok,
        tm.elapsed,
        f"spread={rep.spread:.3f} drift={rep.drift_slope:.3e} refine={rep.refinement_delta:.3f}",
    )


def test_criterion_08_intersection():
    with Timer() as tm:
        cfg = CampaignConfig(
            **ANISO,
            family=FamilySpec(
                seed=801, count=50, band_kind="kbox", band_params=(2, 1), dilations=(1.0, 2.0)
            ),
            thresholds=Thresholds(spread_max=8.0, drift_max=0.05, refinement_max=0.15),
            refinement_count=12,
        )
        rep = lab.verify_intersection(cfg)
    ok = (
        rep.passed
        and rep.spread <= 8.0
        and abs(rep.drift_slope) <= 0.05
        and rep.refinement_delta <= 0.15
        and tm.elapsed < 120.0
    )
    assert report_line(
        8,
        "intersection representation",
        ok,
        tm.elapsed,
        f"spread={rep.spread:.3f} drift={rep.drift_slope:.3e} refine={rep.refinement_delta:.3f}",
    )


def test_criterion_09_duality_certificate():
    with Timer() as tm:
        cfg = CampaignConfig(
            **ANISO,
            family=FamilySpec(
                seed=901, count=20, band_kind="kbox", band_params=(2, 1), dilations=(1.0, 2.0)
            ),
            thresholds=Thresholds(refinement_max=0.15, exact_tol=1e-10),
            duality_pairs=200,
        )
        rep = lab.verify_duality(cfg)
        checks = dict(rep.checks)
    ok = (
        rep.passed
        and len(rep.records) >= 200
        and rep.refinement_delta <= 0.15
        and checks.get("self_pairing_unit", False)
        and tm.elapsed < 60.0
    )
    assert report_line(
        9,
        "duality pairing certificate",
        ok,
        tm.elapsed,
        f"C={rep.ratio_max:.4f} refine={rep.refinement_delta:.3f}",
    )


def test_criterion_10_peetre_inequality():
    with Timer() as tm:
        cfg = CampaignConfig(
            **ANISO,
            family=FamilySpec(
                seed=1001,
                count=25,
                band_kind="product_ball",
                band_params=(20.0, 20.0),
                dilations=(1.0,),
            ),
            thresholds=Thresholds(refinement_max=0.15),
            peetre_r=(1.0, 1.0),
            refinement_count=8,
        )
        rep = lab.verify_peetre(cfg)
        checks = dict(rep.checks)
    ok = (
        rep.passed
        and np.isfinite(rep.ratio_max)
        and rep.refinement_delta <= 0.15
        and checks.get("constant_ratio_one", False)
        and tm.elapsed < 30.0
    )
    assert report_line(
        10,
        "anisotropic shifted-maximal bound",
        ok,
        tm.elapsed,
        f"C={rep.ratio_max:.4f} refine={rep.refinement_delta:.3f}",
    )


def test_criterion_11_determinism():
    with Timer() as tm:
        cfg = CampaignConfig(
            **ANISO,
            family=FamilySpec(
                seed=1101, count=12, band_kind="kbox", band_params=(2, 1), dilations=(1.0, 2.0)
            ),
            refinement_count=4,
        )
        outs = []
        for _ in range(2):
            rep = lab.verify_fubini(cfg)
            outs.append((rep.to_json().encode(), rep.to_csv().encode()))
        identical = outs[0] == outs[1]
    ok = identical
    assert report_line(11, "byte-identical reruns", ok, tm.elapsed)
