"""Batch front-end: parse a config file, run computations or campaigns,
emit reports and plot-ready data.

Verbs: rho, norm, verify <theorem>, report.  Exit status: 0 pass,
1 verdict failure, 2 configuration error.  Output files are written to a
temporary name and renamed, so failures leave no partial files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import grid as gr
from . import lab
from . import spaces as sp
from .anisotropy import vector_quasi_norm
from .errors import AnisolabError, ConfigError
from .filterbank import build_bank
from .mixed_norm import SpaceSpec

ENV_OUT_DIR = "ANISOLAB_OUT_DIR"
ENV_THREADS = "ANISOLAB_THREADS"


def _atomic_write(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_text(data, encoding="utf-8")
    os.replace(tmp, path)


def _require(cfg: dict, key: str):
    cur = cfg
    for part in key.split("."):
        if not isinstance(cur, dict) or part not in cur:
            raise ConfigError(f"{key}: missing required config field")
        cur = cur[part]
    return cur


def _get(cfg: dict, key: str, default=None):
    cur = cfg
    for part in key.split("."):
        if not isinstance(cur, dict) or part not in cur:
            return default
        cur = cur[part]
    return cur


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config: file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: invalid syntax: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a mapping")
    return data


def _family_from(cfg: dict) -> lab.FamilySpec:
    band = _require(cfg, "family.band")
    kind = _require(cfg, "family.band.kind")
    if kind == "kbox":
        params = tuple(int(v) for v in _require(cfg, "family.band.kmax"))
    elif kind == "annulus":
        params = (float(_require(cfg, "family.band.lo")), float(_require(cfg, "family.band.hi")))
    elif kind == "product_ball":
        params = tuple(float(v) for v in _require(cfg, "family.band.radii"))
    else:
        raise ConfigError(f"family.band.kind: unknown kind {kind!r}")
    return lab.FamilySpec(
        seed=int(_require(cfg, "family.seed")),
        count=int(_require(cfg, "family.count")),
        band_kind=kind,
        band_params=params,
        channels=int(_get(cfg, "family.channels", 1)),
        dilations=tuple(float(v) for v in _get(cfg, "family.dilations", [1.0])),
        modulations=tuple(tuple(int(v) for v in m) for m in _get(cfg, "family.modulations", [])),
        include_structured=bool(_get(cfg, "family.structured", True)),
    )


def campaign_config(cfg: dict, overrides: argparse.Namespace) -> lab.CampaignConfig:
    dims = tuple(int(v) for v in _require(cfg, "grid.dims"))
    if overrides.grid:
        try:
            dims = tuple(int(v) for v in overrides.grid.lower().split("x"))
        except ValueError as exc:
            raise ConfigError(f"--grid: cannot parse {overrides.grid!r}") from exc
    period = tuple(float(v) for v in _get(cfg, "grid.period", [1.0] * len(dims)))
    family = _family_from(cfg)
    if overrides.seed is not None:
        family = lab.FamilySpec(
            seed=int(overrides.seed),
            count=family.count,
            band_kind=family.band_kind,
            band_params=family.band_params,
            channels=family.channels,
            dilations=family.dilations,
            modulations=family.modulations,
            include_structured=family.include_structured,
        )
    thresholds = lab.Thresholds(
        spread_max=float(_get(cfg, "thresholds.spread_max", 8.0)),
        drift_max=float(_get(cfg, "thresholds.drift_max", 0.05)),
        refinement_max=float(_get(cfg, "thresholds.refinement_max", 0.15)),
        exact_tol=float(_get(cfg, "thresholds.exact_tol", 1e-10)),
    )
    threads = overrides.threads
    if threads is None:
        threads = int(os.environ.get(ENV_THREADS, "1"))
    weight = _get(cfg, "space.weight_exponents")
    return lab.CampaignConfig(
        dims=dims,
        period=period,
        decomposition=tuple(int(v) for v in _require(cfg, "anisotropy.decomposition")),
        block_diagonals=tuple(
            tuple(float(x) for x in blk) for blk in _require(cfg, "anisotropy.blocks")
        ),
        s=float(_require(cfg, "space.s")),
        p=tuple(float(v) for v in _require(cfg, "space.p")),
        q=float(_require(cfg, "space.q")),
        r=float(_get(cfg, "space.r", _require(cfg, "space.q"))),
        gamma=float(_get(cfg, "bank.gamma", 1.0)),
        delta=float(_get(cfg, "bank.delta", 2.0)),
        family=family,
        thresholds=thresholds,
        weight_exponents=None if weight is None else tuple(float(v) for v in weight),
        diff_M=int(_get(cfg, "difference.M", 2)),
        diff_phi=(
            None
            if _get(cfg, "difference.phi") is None
            else tuple(float(v) for v in _get(cfg, "difference.phi"))
        ),
        diff_mode=str(_get(cfg, "difference.mode", "product")),
        lambdas=tuple(float(v) for v in _get(cfg, "scaling.lambdas", [0.5, 2.0])),
        sigmas=tuple(float(v) for v in _get(cfg, "lifting.sigmas", [-1.0, 1.0])),
        duality_pairs=int(_get(cfg, "duality.pairs", 200)),
        peetre_r=(
            None
            if _get(cfg, "peetre.r") is None
            else tuple(float(v) for v in _get(cfg, "peetre.r"))
        ),
        refine=bool(_get(cfg, "refinement.enabled", True)),
        refinement_factor=int(_get(cfg, "refinement.factor", 2)),
        refinement_count=(
            None
            if _get(cfg, "refinement.count") is None
            else int(_get(cfg, "refinement.count"))
        ),
        threads=int(threads),
    )


def _out_dir(cfg: dict, overrides: argparse.Namespace) -> Path:
    if overrides.out:
        return Path(overrides.out)
    env = os.environ.get(ENV_OUT_DIR)
    if env:
        return Path(env)
    return Path(_get(cfg, "output.dir", "out"))


def _format_of(cfg: dict, overrides: argparse.Namespace) -> str:
    fmt = overrides.format or _get(cfg, "output.format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigError(f"output.format: must be json or csv, got {fmt!r}")
    return fmt


def _emit_table(rows: list[dict], columns: list[str], fmt: str, path: Path | None) -> str:
    if fmt == "json":
        text = json.dumps(rows, sort_keys=True, indent=2) + "\n"
    else:
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(_csv_cell(row[c]) for c in columns))
        text = "\n".join(lines) + "\n"
    if path is not None:
        _atomic_write(path, text)
    return text


def _csv_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def cmd_rho(cfg: dict, args: argparse.Namespace) -> int:
    campaign = campaign_config(cfg, args)
    va = campaign.anisotropy()
    pts = _get(cfg, "points")
    if not pts:
        raise ConfigError("points: cmd rho needs a list of points")
    rows = []
    for p in pts:
        p = [float(v) for v in p]
        if len(p) != va.dim:
            raise ConfigError(f"points: point {p} does not have dimension {va.dim}")
        rows.append({"point": p if args.format != "csv" else ";".join(repr(v) for v in p),
                     "rho": vector_quasi_norm(va, p)})
    fmt = _format_of(cfg, args)
    out = _out_dir(cfg, args) / f"rho.{fmt}"
    text = _emit_table(rows, ["point", "rho"], fmt, out)
    sys.stdout.write(text)
    return 0


def _load_subject(cfg: dict, campaign: lab.CampaignConfig, grid: gr.TorusGrid) -> gr.GridFunction:
    kind = _get(cfg, "function.type", "random")
    if kind == "file":
        return gr.load_function(_require(cfg, "function.path"))
    if kind == "exponential":
        return gr.exponential(grid, [int(v) for v in _require(cfg, "function.k")])
    if kind == "constant":
        return gr.constant(grid, complex(_get(cfg, "function.value", 1.0)))
    if kind == "random":
        return gr.random_bandlimited(
            grid, campaign.family.seed, campaign.band(), campaign.family.channels
        )
    raise ConfigError(f"function.type: unknown type {kind!r}")


def cmd_norm(cfg: dict, args: argparse.Namespace) -> int:
    campaign = campaign_config(cfg, args)
    lab.validate_config(campaign)
    grid = campaign.base_grid()
    va = campaign.anisotropy()
    f = _load_subject(cfg, campaign, grid)
    kind = _get(cfg, "space.kind", "F")
    spec = SpaceSpec(kind=kind, s=campaign.s, p=campaign.p, q=campaign.q, anisotropy=va,
                     weight_exponents=campaign.weight_exponents)
    bank = build_bank(grid, va, campaign.gamma, campaign.delta)
    nv = sp.tl_norm(f, spec, bank) if kind == "F" else sp.besov_norm(f, spec, bank)
    fmt = _format_of(cfg, args)
    record = nv.to_record()
    if fmt == "json":
        text = json.dumps(record, sort_keys=True, indent=2) + "\n"
    else:
        cols = ["kind", "s", "q", "r", "value", "bank_id"]
        text = ",".join(cols) + "\n" + ",".join(_csv_cell(record[c]) for c in cols) + "\n"
    _atomic_write(_out_dir(cfg, args) / f"norm.{fmt}", text)
    sys.stdout.write(text)
    return 0


def cmd_verify(cfg: dict, args: argparse.Namespace) -> int:
    if args.theorem not in lab.VERIFIERS:
        raise ConfigError(
            f"theorem: must be one of {', '.join(lab.THEOREMS)}; got {args.theorem!r}"
        )
    campaign = campaign_config(cfg, args)
    report = lab.VERIFIERS[args.theorem](campaign)
    out = _out_dir(cfg, args)
    _atomic_write(out / f"{args.theorem}_report.json", report.to_json())
    _atomic_write(out / f"{args.theorem}_report.csv", report.to_csv())
    line = (
        f"{report.theorem_id}: {report.verdict} "
        f"(spread={report.spread:.6g}, drift={report.drift_slope:.3e}, "
        f"refine={report.refinement_delta if report.refinement_delta is not None else 'n/a'}, "
        f"records={len(report.records)})\n"
    )
    sys.stdout.write(line)
    return 0 if report.passed else 1


def cmd_report(args: argparse.Namespace) -> int:
    if not args.paths:
        raise ConfigError("paths: cmd report needs at least one report file")
    summaries = []
    plot_rows = []
    for path in args.paths:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"paths: cannot read report {path}: {exc}") from exc
        summaries.append(
            {
                "theorem_id": data["theorem_id"],
                "records": len(data["records"]),
                "n_excluded": data["n_excluded"],
                "ratio_min": data["ratio_min"],
                "ratio_max": data["ratio_max"],
                "spread": data["spread"],
                "drift_slope": data["drift_slope"],
                "refinement_delta": data["refinement_delta"],
                "verdict": data["verdict"],
            }
        )
        for rec in data["records"]:
            if rec["ratio"] <= 0:
                continue
            plot_rows.append(
                {
                    "theorem_id": data["theorem_id"],
                    "member_id": rec["member_id"],
                    "log2_t": math.log2(rec["t"]),
                    "log2_ratio": math.log2(rec["ratio"]),
                }
            )
    out = Path(args.out) if args.out else Path(os.environ.get(ENV_OUT_DIR, "out"))
    sum_cols = [
        "theorem_id",
        "records",
        "n_excluded",
        "ratio_min",
        "ratio_max",
        "spread",
        "drift_slope",
        "refinement_delta",
        "verdict",
    ]
    text = _emit_table(summaries, sum_cols, "csv", out / "summary.csv")
    _emit_table(
        plot_rows,
        ["theorem_id", "member_id", "log2_t", "log2_ratio"],
        "csv",
        out / "plotdata.csv",
    )
    sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anisolab",
        description="quasi-norm laboratory for anisotropic mixed-norm function spaces",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="YAML config file")
        p.add_argument("--out", help="output directory (overrides config/env)")
        p.add_argument("--seed", type=int, help="override family seed")
        p.add_argument("--threads", type=int, help="worker threads per campaign")
        p.add_argument("--grid", help="override grid dims, e.g. 64x64")
        p.add_argument("--format", choices=["json", "csv"], help="table output format")

    common(sub.add_parser("rho", help="evaluate the quasi-norm on config points"))
    common(sub.add_parser("norm", help="compute one space norm of a function"))
    pv = sub.add_parser("verify", help="run one verification campaign")
    pv.add_argument("theorem", choices=list(lab.THEOREMS))
    common(pv)
    pr = sub.add_parser("report", help="merge campaign reports into summary tables")
    pr.add_argument("paths", nargs="*", help="report JSON files")
    pr.add_argument("--out", help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "report":
            return cmd_report(args)
        cfg = load_config(args.config)
        if args.verb == "rho":
            return cmd_rho(cfg, args)
        if args.verb == "norm":
            return cmd_norm(cfg, args)
        return cmd_verify(cfg, args)
    except AnisolabError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
