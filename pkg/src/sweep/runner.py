"""
Sweep and validation drivers.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import List, Optional, Tuple

from tqdm import tqdm

from src.bounds.joint import dt_genie, ensemble_converse, metaconverse, optimize_p
from src.bounds.preamble import (
    PreambleSplit,
    minimum_preamble_length,
    optimize_np,
    preamble_converse,
)
from src.bounds.results import BoundFlag, BoundKind, BoundResult, TargetProbabilities
from src.channel.biawgn import ChannelSpec
from src.config.settings import MonteCarloConfig, settings
from src.config.sweep_config import SweepConfig, ValidationConfig
from src.simulation.oracle import ValidationReport, validate_joint_bound
from src.sweep.rate_curve import RateCurve
from src.utils.helpers import derive_seed

logger = logging.getLogger(__name__)

PointResult = Tuple[BoundResult, Optional[float], Optional[int]]


def evaluate_point(kind: BoundKind, snr_db: float, n: int, targets: TargetProbabilities,
                   p_grid, mc: MonteCarloConfig) -> PointResult:
    """
    Evaluate one bound at one (snr, n) point.

    Returns:
        (result, p_star, n_p_star)
    """
    kind = BoundKind(kind)
    half = ChannelSpec.from_snr_db(snr_db, 0.5, n)
    rho = half.rho

    if kind is BoundKind.JOINT_ACH:
        p_star, result = optimize_p(n, rho, targets, p_grid, mc)
        return result, p_star, None
    if kind is BoundKind.ENSEMBLE_CONV:
        p_star, result = optimize_p(n, rho, targets, p_grid, mc, bound=ensemble_converse)
        return result, p_star, None
    if kind is BoundKind.METACONVERSE:
        return metaconverse(half, targets.eie, mc), 0.5, None
    if kind is BoundKind.DT_GENIE:
        return dt_genie(half, targets.eie, mc), 0.5, None
    if kind is BoundKind.PREAMBLE_ACH:
        n_p_star, result = optimize_np(n, rho, targets, mc)
        return result, 0.5, n_p_star

    n_p = minimum_preamble_length(n, rho, targets)
    if n_p is None:
        return BoundResult.zero(BoundKind.PREAMBLE_CONV, n, BoundFlag.INFEASIBLE_DETECTION, p=0.5), 0.5, None
    result = preamble_converse(half, PreambleSplit.from_total(n, n_p), targets.eie, mc)
    return result, 0.5, n_p


def run_sweep(config: SweepConfig, threads: Optional[int] = None, output: Optional[str] = None,
              show_progress: bool = True) -> Tuple[str, RateCurve]:
    """
    Compute every (snr, n, kind) point of a sweep and write the rate curve CSV.

    Each point gets a seed derived from (master_seed, snr index, n); all bound
    kinds at a point share it, so their sample sets coincide where their
    measures do. Points run in a thread pool; the output does not depend on
    the number of threads.

    Args:
        config: Parsed sweep configuration
        threads: Worker threads (defaults to config.threads)
        output: Output path (defaults to config.output)
        show_progress: Show a tqdm progress bar

    Returns:
        (path written, RateCurve)
    """
    threads = threads or config.threads
    targets = TargetProbabilities(efa=config.efa, emd=config.emd, eie=config.eie)

    tasks: List[Tuple[int, float, int, str]] = [
        (snr_index, snr_db, n, kind)
        for snr_index, snr_db in enumerate(config.snr_db_list)
        for n in config.n_list
        for kind in config.bound_kinds
    ]
    logger.info(f"Running sweep: {len(tasks)} points on {threads} threads")

    def work(task) -> PointResult:
        snr_index, snr_db, n, kind = task
        mc = config.mc_config(derive_seed(config.master_seed, snr_index, n))
        return evaluate_point(kind, snr_db, n, targets, config.p_grid, mc)

    curve = RateCurve()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {pool.submit(work, task): task for task in tasks}
        try:
            for future in tqdm(as_completed(futures), total=len(futures), desc="sweep",
                               disable=not show_progress):
                task = futures[future]
                result, p_star, n_p_star = future.result()
                curve.add(task[1], result, p_star=p_star, n_p_star=n_p_star)
        except Exception as e:
            logger.error(f"Sweep point failed: {e}")
            for future in futures:
                future.cancel()
            raise

    path = settings.resolve_output(output or config.output)
    return curve.write_csv(path), curve


def run_validation(config: ValidationConfig, threads: Optional[int] = None, output: Optional[str] = None,
                   show_progress: bool = True) -> Tuple[str, ValidationReport]:
    """
    Run the decoder validation and write the key: value report plus the
    per-codebook CSV.

    Args:
        config: Validation parameters
        threads: Worker threads for LLR sampling; the decoder trials run serially
        output: Report path override
        show_progress: Show tqdm progress bars

    Returns:
        (report path, ValidationReport)
    """
    spec = ChannelSpec.from_snr_db(config.snr_db, config.p, config.n)
    targets = TargetProbabilities(efa=config.efa, emd=config.emd, eie=config.eie)
    mc = config.mc_config()
    if threads:
        mc = mc.with_threads(threads)
    report = validate_joint_bound(
        spec,
        targets,
        mc=mc,
        n_codebooks=config.n_codebooks,
        trials=config.trials,
        m=config.m,
        gamma2_offset=config.gamma2_offset,
        show_progress=show_progress,
    )
    path = settings.resolve_output(output or config.output)
    report_path, _ = report.write(path)
    logger.info(f"Validation verdict: {'PASS' if report.passed else 'FAIL'}")
    return report_path, report
