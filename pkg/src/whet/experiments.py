"""Experiment orchestration: figure sweeps, CSV emission, summaries.

Each experiment sweeps one axis, solves the relevant policies per row,
and writes a single CSV (header row mandatory, ``.`` decimals).  Rows are
computed independently with per-row seeds, so they may run in parallel;
emission order always follows sweep order, and files are written to a
temporary name and atomically renamed so a failed run never leaves a
truncated CSV behind.

dB conventions: power ratios use 10*log10 throughout; the SNR axis is
P0/sigma0_sq with sigma0_sq fixed by the config (1 W in the reference
setup), so sweeping SNR sweeps P0.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import fading_sim, fixed_rate, harvest_and_use, harvest_store_use
from .config import ScenarioConfig, Sweep, build_scenario
from .numerics import expand_bracket, solve_monotone
from .scenario import Scenario

log = logging.getLogger("whet.experiments")

__all__ = [
    "run_experiment",
    "invert_power",
    "snr_for_throughput",
    "CSV_COLUMNS",
]

CSV_COLUMNS = {
    "fig3a": ["snr_db", "thr_ctp_hau", "thr_otp_hau", "thr_otp_hsu", "thr_otp_hsu_pm20db"],
    "fig3b": ["alpha0", "energy_ctp_norm", "energy_otp_hau_norm", "energy_otp_hsu_norm"],
    "fig4": ["snr_db", "thr_ctp_firc_hau", "thr_otp_firc_hsu", "thr_otp_hsu"],
    "fig5a": ["r0", "m", "mean_p0_db", "std_p0_db", "p0_det_db"],
    "fig5b": ["r0", "m", "gain_db_vs_ctp_firc"],
}

_DEFAULT_SNR_SWEEP = Sweep(60.0, 110.0, 1.0)
_DEFAULT_R0_SWEEP = Sweep(40.0, 80.0, 10.0)


def _sweep_values(value: float | Sweep, default: Sweep) -> np.ndarray:
    if isinstance(value, Sweep):
        return value.values()
    return default.values()


def _scalar_value(value: float | Sweep, fallback: float) -> float:
    if isinstance(value, Sweep):
        return fallback
    return float(value)


def invert_power(throughput_of_p0: Callable[[float], float], target: float,
                 start: float = 1.0) -> float:
    """Average power at which a monotone throughput curve hits a target.

    Bisects in log-power so the bracket can widen by many decades without
    ever leaving the positive axis.
    """

    def residual(log_p0: float) -> float:
        return throughput_of_p0(10.0**log_p0) - target

    anchor = math.log10(start)
    bracket = expand_bracket(
        residual, anchor - 3.0, anchor + 3.0, grow_hi=True, grow_lo=True,
        max_growth=90, tol=1e-12, max_iter=120,
    )
    return 10.0 ** solve_monotone(residual, bracket, f_tol=1e-9 * target)


def snr_for_throughput(
    cfg: ScenarioConfig, policy: str, target: float
) -> float:
    """SNR (dB) at which a policy first reaches a cumulative throughput."""

    def thr(p0: float) -> float:
        scenario = _with_p0(cfg, p0, pm_db=None)
        if policy == "ctp_hau":
            return harvest_and_use.ctp_throughput(scenario).throughput
        if policy == "otp_hau":
            return harvest_and_use.solve_otp(scenario).throughput
        if policy == "otp_hsu":
            return harvest_store_use.solve_hsu(scenario).throughput
        raise ValueError(f"unknown policy {policy!r}")

    p0 = invert_power(thr, target, start=cfg.sigma0_sq * 1e9)
    return 10.0 * math.log10(p0 / cfg.sigma0_sq)


def _with_p0(cfg: ScenarioConfig, p0: float, pm_db: float | None,
             alpha0: float | None = None, m: float | None = None) -> Scenario:
    snr_db = 10.0 * math.log10(p0 / cfg.sigma0_sq)
    cfg = replace(cfg, p0=None, pm_over_p0_db=pm_db)
    return build_scenario(cfg, snr_db=snr_db, alpha0=alpha0, m=m)


# ---------------------------------------------------------------------------
# row solvers


def _fig3a_row(cfg: ScenarioConfig, snr_db: float) -> list[float]:
    scenario = build_scenario(replace(cfg, pm_over_p0_db=None), snr_db=snr_db)
    bounded = build_scenario(replace(cfg, pm_over_p0_db=20.0), snr_db=snr_db)
    return [
        snr_db,
        harvest_and_use.ctp_throughput(scenario).throughput,
        harvest_and_use.solve_otp(scenario).throughput,
        harvest_store_use.solve_hsu(scenario).throughput,
        harvest_store_use.solve_hsu(bounded).throughput,
    ]


def _fig3b_row(cfg: ScenarioConfig, alpha0: float) -> list[float]:
    target = _scalar_value(cfg.r0, 60.0)
    start = cfg.sigma0_sq * 1e9

    def p_for(policy: str) -> float:
        def thr(p0: float) -> float:
            scenario = _with_p0(cfg, p0, pm_db=None, alpha0=alpha0)
            if policy == "ctp":
                return harvest_and_use.ctp_throughput(scenario).throughput
            if policy == "otp":
                return harvest_and_use.solve_otp(scenario).throughput
            return harvest_store_use.solve_hsu(scenario).throughput

        return invert_power(thr, target, start=start)

    p_ctp = p_for("ctp")
    return [alpha0, 1.0, p_for("otp") / p_ctp, p_for("hsu") / p_ctp]


def _fig4_row(cfg: ScenarioConfig, snr_db: float) -> list[float]:
    scenario = build_scenario(replace(cfg, pm_over_p0_db=None), snr_db=snr_db)
    return [
        snr_db,
        fixed_rate.ctp_firc(scenario).throughput,
        fixed_rate.max_rate(scenario).r0,
        harvest_store_use.solve_hsu(scenario).throughput,
    ]


def _fig5a_row(cfg: ScenarioConfig, r0: float, m: float, seed: int) -> list[float]:
    scenario = build_scenario(replace(cfg, pm_over_p0_db=None), m=m)
    det = fixed_rate.min_power(scenario, r0).P0_min
    det_db = 10.0 * math.log10(det / cfg.sigma0_sq)
    if math.isinf(m):
        return [r0, m, det_db, 0.0, det_db]
    mc = fading_sim.monte_carlo(scenario, r0, cfg.trials, seed)
    mean_db = 10.0 * math.log10(mc.mean_avg_power / cfg.sigma0_sq)
    spread_db = 10.0 / math.log(10.0) * mc.std_avg_power / mc.mean_avg_power
    return [r0, m, mean_db, spread_db, det_db]


def _fig5b_row(cfg: ScenarioConfig, r0: float, m: float, seed: int) -> list[float]:
    scenario = build_scenario(replace(cfg, pm_over_p0_db=None), m=m)
    if math.isinf(m):
        alg_power = fixed_rate.min_power(scenario, r0).P0_min
    else:
        alg_power = fading_sim.monte_carlo(scenario, r0, cfg.trials, seed).mean_avg_power
    base = fading_sim.ctp_firc_fading_baseline(scenario, r0, cfg.trials, seed)
    gain_db = 10.0 * math.log10(base.mean_avg_power / alg_power)
    return [r0, m, gain_db]


# ---------------------------------------------------------------------------
# experiment drivers


def _rows_fig3a(cfg: ScenarioConfig):
    for snr in _sweep_values(cfg.snr_db, _DEFAULT_SNR_SWEEP):
        yield lambda snr=float(snr): _fig3a_row(cfg, snr)


def _rows_fig3b(cfg: ScenarioConfig):
    for alpha0 in _sweep_values(cfg.alpha0, Sweep(2.0, 5.0, 0.25)):
        yield lambda alpha0=float(alpha0): _fig3b_row(cfg, alpha0)


def _rows_fig4(cfg: ScenarioConfig):
    for snr in _sweep_values(cfg.snr_db, _DEFAULT_SNR_SWEEP):
        yield lambda snr=float(snr): _fig4_row(cfg, snr)


def _rows_fig5(cfg: ScenarioConfig, row_fn):
    stride = max(cfg.trials, 10_000)
    index = 0
    for r0 in _sweep_values(cfg.r0, _DEFAULT_R0_SWEEP):
        for m in cfg.m_list:
            seed = cfg.base_seed + index * stride
            index += 1
            yield lambda r0=float(r0), m=float(m), seed=seed: row_fn(cfg, r0, m, seed)


def _compute_rows(makers: Iterable[Callable[[], list[float]]], jobs: int) -> list[list[float]]:
    makers = list(makers)
    if jobs <= 1:
        return [make() for make in makers]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(make) for make in makers]
        return [f.result() for f in futures]


def _format_cell(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: Sequence[str], rows: list[list[float]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp")
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_format_cell(x) for x in row) + "\n")
        os.replace(tmp, path)
    finally:
        tmp.unlink(missing_ok=True)


def _run_single(cfg: ScenarioConfig) -> list[str]:
    scenario = build_scenario(cfg)
    lines = [f"policy = {cfg.policy}"]
    if cfg.policy == "ctp_hau":
        sol = harvest_and_use.ctp_throughput(scenario)
        lines.append(f"throughput = {sol.throughput!r}")
    elif cfg.policy == "otp_hau":
        sol = harvest_and_use.solve_otp(scenario)
        lines.append(f"lambda = {sol.lambda1!r}")
        lines.append(f"throughput = {sol.throughput!r}")
    elif cfg.policy == "otp_hsu":
        sol = harvest_store_use.solve_hsu(scenario)
        lines.append(f"lambda = {sol.lambda2!r}")
        lines.append(f"throughput = {sol.throughput!r}")
        lines.append(f"eta = {sol.eta!r}")
        lines.append(f"delta_t_m = {sol.delta_t_m!r}")
    else:  # firc_hsu
        sol = fixed_rate.max_rate(scenario)
        lines.append(f"t1 = {sol.t1!r}")
        lines.append(f"t2 = {sol.t2!r}")
        lines.append(f"instantaneous_rate = {sol.instantaneous_rate!r}")
        lines.append(f"throughput = {sol.r0!r}")
        lines.append(f"eta = {sol.eta!r}")
    return lines


def run_experiment(cfg: ScenarioConfig, jobs: int = 1) -> list[Path]:
    """Run the configured experiment; returns the CSV paths written.

    ``single`` solves one policy and prints its scalars instead of
    writing a file.
    """
    if cfg.experiment == "single":
        for line in _run_single(cfg):
            print(line)
        return []

    makers = {
        "fig3a": lambda: _rows_fig3a(cfg),
        "fig3b": lambda: _rows_fig3b(cfg),
        "fig4": lambda: _rows_fig4(cfg),
        "fig5a": lambda: _rows_fig5(cfg, _fig5a_row),
        "fig5b": lambda: _rows_fig5(cfg, _fig5b_row),
    }[cfg.experiment]()
    rows = _compute_rows(makers, jobs)
    out = Path(cfg.out_dir) / f"{cfg.experiment}.csv"
    _write_csv(out, CSV_COLUMNS[cfg.experiment], rows)
    print(f"{cfg.experiment}: wrote {len(rows)} rows to {out}")
    return [out]
