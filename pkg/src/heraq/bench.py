"""Benchmark runner: PQ baseline versus the hierarchical codec at matched bit
budgets, over seeded repetitions of a truncated-normal dataset.

One repetition draws a single matrix (seed = base_seed + r) shared by every
grid cell, so methods are compared on identical data.  For each subspace count
M, the baseline budget is the plain-PQ account at ``baseline_ks``; each
hierarchy depth L then gets the largest K_s whose account fits that budget
(orientation-map bits count against it only when overhead charging is on).
Cell seeds, row ordering, and float formatting are all pinned so a run's CSV
output is a pure function of its config, threads or not.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .codec import (
    CODE_BITS_POLICIES,
    InfeasibleBudgetError,
    account_hera,
    account_pq,
    match_budget,
)
from .matrix import TruncNormalSpec, generate_truncated_normal
from .metrics import compute_errors
from .quantizer import dequantize, hera_quantize, make_pq_config, pq_quantize

CSV_HEADER = "method,m,ks,levels,seed,mae,mre,mse,total_bits"
SUMMARY_HEADER = (
    "method,m,levels,reps,mae_mean,mae_std,mre_mean,mre_std,mse_mean,mse_std"
)


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    d: int
    subspaces: tuple
    levels_list: tuple
    baseline_ks: int
    repetitions: int = 20
    base_seed: int = 0
    charge_fm_overhead: bool = True
    code_bits_policy: str = "ceil-log2"
    kmeans_max_iters: int = 100
    kmeans_rel_tol: float = 1e-4
    kmeans_restarts: int = 4
    output_path: str | None = None

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError(f"matrix shape must be >= 1x1, got {self.n}x{self.d}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        if not self.subspaces:
            raise ValueError("subspaces list is empty")
        if not self.levels_list:
            raise ValueError("levels list is empty")
        for m in self.subspaces:
            if m < 1 or self.d % m != 0:
                raise ValueError(f"d ({self.d}) not divisible by subspaces ({m})")
        for lv in self.levels_list:
            if lv < 0:
                raise ValueError(f"levels must be >= 0, got {lv}")
            if lv and self.n % (1 << lv) != 0:
                raise ValueError(
                    f"n ({self.n}) not divisible by 2^levels ({1 << lv})"
                )
        if not 1 <= self.baseline_ks <= self.n:
            raise ValueError(
                f"baseline_ks must be in 1..n, got {self.baseline_ks}"
            )
        if self.code_bits_policy not in CODE_BITS_POLICIES:
            raise ValueError(
                f"unknown code_bits_policy {self.code_bits_policy!r}; "
                f"choose from {sorted(CODE_BITS_POLICIES)}"
            )


@dataclass(frozen=True)
class ResultRow:
    """One grid cell of one repetition.

    Infeasible cells (budget too small for even K_s=1) carry ks=0, NaN
    metrics, and total_bits=0.  ``total_bits`` for feasible cells is the full
    stored-bit account of the cell's own configuration, orientation maps
    included, under the run's code-bits policy.
    """

    method: str
    m: int
    ks: int
    levels: int
    seed: int
    mae: float
    mre: float
    mse: float
    total_bits: int

    @property
    def feasible(self) -> bool:
        return self.ks > 0


@dataclass(frozen=True)
class SummaryRow:
    method: str
    m: int
    levels: int
    reps: int
    mae_mean: float
    mae_std: float
    mre_mean: float
    mre_std: float
    mse_mean: float
    mse_std: float


def _method_tag(levels: int) -> str:
    return "pq" if levels == 0 else f"hera{levels}"


def _run_cell(cfg: ExperimentConfig, matrix, rep: int, m: int, levels: int) -> ResultRow:
    seed = cfg.base_seed + rep
    baseline = account_pq(cfg.n, cfg.d, m, cfg.baseline_ks, policy=cfg.code_bits_policy)
    if levels == 0:
        ks = cfg.baseline_ks
    else:
        try:
            ks = match_budget(
                baseline,
                cfg.n,
                cfg.d,
                m,
                levels,
                charge_feature_maps=cfg.charge_fm_overhead,
                policy=cfg.code_bits_policy,
            )
        except InfeasibleBudgetError:
            return ResultRow(
                method=_method_tag(levels),
                m=m,
                ks=0,
                levels=levels,
                seed=seed,
                mae=math.nan,
                mre=math.nan,
                mse=math.nan,
                total_bits=0,
            )
        # the account may allow more centroids than a leaf has rows
        ks = min(ks, cfg.n >> levels)
    pq_cfg = make_pq_config(
        num_subspaces=m,
        centroids_per_subspace=ks,
        seed=seed,
        max_iters=cfg.kmeans_max_iters,
        rel_tol=cfg.kmeans_rel_tol,
        restarts=cfg.kmeans_restarts,
    )
    if levels == 0:
        artifact = pq_quantize(matrix, pq_cfg)
        bits = account_pq(cfg.n, cfg.d, m, ks, policy=cfg.code_bits_policy)
    else:
        artifact = hera_quantize(matrix, levels, pq_cfg)
        bits = account_hera(cfg.n, cfg.d, m, ks, levels, policy=cfg.code_bits_policy)
    report = compute_errors(matrix, dequantize(artifact))
    return ResultRow(
        method=_method_tag(levels),
        m=m,
        ks=ks,
        levels=levels,
        seed=seed,
        mae=report.mae,
        mre=math.nan if report.mre is None else report.mre,
        mse=report.mse,
        total_bits=bits.total_bits,
    )


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> list:
    """Run the full (repetition x subspaces x levels) grid.

    Returns rows sorted by (method, m, levels, seed) so the output order never
    depends on scheduling.  ``threads`` > 1 runs grid cells concurrently;
    every cell is an independent pure function of the config.
    """
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    matrices = {}
    for rep in range(cfg.repetitions):
        spec = TruncNormalSpec(seed=cfg.base_seed + rep)
        matrices[rep] = generate_truncated_normal(spec, cfg.n, cfg.d)
    cells = [
        (rep, m, levels)
        for rep in range(cfg.repetitions)
        for m in cfg.subspaces
        for levels in cfg.levels_list
    ]
    if threads == 1:
        rows = [_run_cell(cfg, matrices[rep], rep, m, lv) for rep, m, lv in cells]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(
                pool.map(
                    lambda cell: _run_cell(cfg, matrices[cell[0]], *cell), cells
                )
            )
    rows.sort(key=lambda r: (r.method, r.m, r.levels, r.seed))
    return rows


def summarize(rows) -> list:
    """Per-(method, m, levels) mean and population stddev of each metric.

    Infeasible rows are excluded from the statistics; a group with no feasible
    rows reports reps=0 and NaN moments.
    """
    if not rows:
        raise ValueError("no rows to summarize")
    groups = {}
    for row in rows:
        groups.setdefault((row.method, row.m, row.levels), []).append(row)
    out = []
    for (method, m, levels), members in sorted(groups.items()):
        feasible = [r for r in members if r.feasible]
        stats = []
        for name in ("mae", "mre", "mse"):
            vals = np.array([getattr(r, name) for r in feasible], dtype=np.float64)
            if vals.size:
                stats.extend([float(vals.mean()), float(vals.std())])
            else:
                stats.extend([math.nan, math.nan])
        out.append(
            SummaryRow(method, m, levels, len(feasible), *stats)
        )
    return out


def _fmt(value) -> str:
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    return str(value)


def rows_to_csv(rows) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.method, r.m, r.ks, r.levels, r.seed,
                    r.mae, r.mre, r.mse, r.total_bits,
                )
            )
        )
    return "\n".join(lines) + "\n"


def summary_to_csv(summary) -> str:
    lines = [SUMMARY_HEADER]
    for s in summary:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    s.method, s.m, s.levels, s.reps,
                    s.mae_mean, s.mae_std, s.mre_mean, s.mre_std,
                    s.mse_mean, s.mse_std,
                )
            )
        )
    return "\n".join(lines) + "\n"


def write_csv(text: str, path) -> None:
    # explicit newline control keeps output bytes platform-independent
    with open(path, "w", newline="") as fh:
        fh.write(text)


_LIST_KEYS = {"subspaces", "levels"}
_CONFIG_KEYS = {
    "n": int,
    "d": int,
    "subspaces": None,
    "levels": None,
    "baseline_ks": int,
    "repetitions": int,
    "base_seed": int,
    "charge_fm": None,
    "code_bits_policy": str,
    "kmeans_max_iters": int,
    "kmeans_rel_tol": float,
    "kmeans_restarts": int,
    "output": str,
}
_REQUIRED_KEYS = ("n", "d", "subspaces", "levels", "baseline_ks")


def _parse_flag(raw: str, key: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("on", "true", "yes", "1"):
        return True
    if lowered in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"config key {key!r}: expected on/off, got {raw!r}")


def load_config(path) -> ExperimentConfig:
    """Parse a flat key = value experiment description.

    Blank lines and ``#`` comments are ignored; list values are
    comma-separated.  Unknown keys are rejected to catch typos.
    """
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            raw = raw.strip()
            if key not in _CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = raw
    missing = [k for k in _REQUIRED_KEYS if k not in values]
    if missing:
        raise ValueError(f"{path}: missing required keys: {', '.join(missing)}")

    def integers(key):
        try:
            return tuple(int(part) for part in values[key].split(","))
        except ValueError:
            raise ValueError(
                f"{path}: key {key!r}: expected comma-separated integers, "
                f"got {values[key]!r}"
            ) from None

    kwargs = {
        "n": int(values["n"]),
        "d": int(values["d"]),
        "subspaces": integers("subspaces"),
        "levels_list": integers("levels"),
        "baseline_ks": int(values["baseline_ks"]),
    }
    if "repetitions" in values:
        kwargs["repetitions"] = int(values["repetitions"])
    if "base_seed" in values:
        kwargs["base_seed"] = int(values["base_seed"])
    if "charge_fm" in values:
        kwargs["charge_fm_overhead"] = _parse_flag(values["charge_fm"], "charge_fm")
    if "code_bits_policy" in values:
        kwargs["code_bits_policy"] = values["code_bits_policy"]
    if "kmeans_max_iters" in values:
        kwargs["kmeans_max_iters"] = int(values["kmeans_max_iters"])
    if "kmeans_rel_tol" in values:
        kwargs["kmeans_rel_tol"] = float(values["kmeans_rel_tol"])
    if "kmeans_restarts" in values:
        kwargs["kmeans_restarts"] = int(values["kmeans_restarts"])
    if "output" in values:
        kwargs["output_path"] = values["output"]
    return ExperimentConfig(**kwargs)
