"""
Brute-force joint detector/decoder for desk-scale validation of the joint
achievability bound.

The decoder first tests r(y) against gamma1 (packet present or idle), then
returns the smallest message index m whose information density
i(c_m, y) exceeds gamma2. Empirical false-alarm, misdetection and
inclusive-error rates are measured over random codebooks drawn from P_X and
compared with the bound's ensemble-averaged guarantees.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.bounds.joint import OperatingPoint, joint_achievability, joint_operating_point
from src.bounds.results import TargetProbabilities
from src.channel.biawgn import ChannelSpec, draw_inputs, llr_r
from src.config.settings import MonteCarloConfig, settings
from src.stats.samples import ProbEstimate
from src.utils.errors import DomainError, OutputError
from src.utils.helpers import derive_seed, ensure_parent, wilson_interval, write_report

logger = logging.getLogger(__name__)

IDLE = 0
DECODING_ERROR = -1

_FA_STREAM = 1
_MESSAGE_STREAM = 2
_CODEBOOK_KEY = 1
_TRIALS_KEY = 2


def _rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=keys)))


@dataclass(frozen=True)
class Codebook:
    """M codewords of length n with entries in {-sqrt(rho), +sqrt(rho)}."""

    codewords: np.ndarray
    rho: float
    p: float
    seed: int = 0

    def __post_init__(self):
        codewords = np.array(self.codewords, dtype=float)
        if codewords.ndim != 2 or codewords.shape[0] < 1:
            raise DomainError(f"codewords must be an M x n matrix with M >= 1, got shape {codewords.shape}")
        if not np.allclose(np.abs(codewords), math.sqrt(self.rho)):
            raise DomainError("codeword entries must be +-sqrt(rho); the idle symbol is reserved")
        codewords.setflags(write=False)
        object.__setattr__(self, "codewords", codewords)

    @classmethod
    def random(cls, spec: ChannelSpec, m: int, seed: int) -> "Codebook":
        """Draw M codewords i.i.d. from P_X."""
        codewords = draw_inputs(_rng(seed), int(m), spec)
        return cls(codewords=codewords, rho=spec.rho, p=spec.p, seed=seed)

    @property
    def m(self) -> int:
        return int(self.codewords.shape[0])

    @property
    def n(self) -> int:
        return int(self.codewords.shape[1])

    @property
    def spec(self) -> ChannelSpec:
        return ChannelSpec(rho=self.rho, p=self.p, n=self.n)


@dataclass(frozen=True)
class DecoderConfig:
    """Thresholds and randomization of the detection (1) and decoding (2) tests."""

    gamma1: float
    gamma2: float
    tau1: float = 0.0
    tau2: float = 0.0

    def __post_init__(self):
        for name in ("gamma1", "gamma2"):
            if math.isnan(getattr(self, name)):
                raise DomainError(f"{name} must not be NaN")
        for name in ("tau1", "tau2"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} must lie in [0,1], got {value}")


def _threshold(values: np.ndarray, gamma: float, tau: float, uniforms: np.ndarray) -> np.ndarray:
    return (values > gamma) | ((values == gamma) & (uniforms < tau))


def decode_batch(config: DecoderConfig, codebook: Codebook, ys: np.ndarray,
                 u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """
    Decode a batch of channel outputs.

    Args:
        config: Decoder thresholds
        codebook: Codebook in use
        ys: Outputs, shape (T, n)
        u1: Uniforms for the detection randomization, shape (T,)
        u2: Uniforms for the decoding randomization, shape (T, M)

    Returns:
        Outcomes: IDLE, DECODING_ERROR or a message index in 1..M
    """
    spec = codebook.spec
    r = llr_r(spec, ys)
    detected = _threshold(r, config.gamma1, config.tau1, u1)

    # i(c_m, y) = j(c_m, y) - r(y)
    info = ys @ codebook.codewords.T - 0.5 * spec.n * spec.rho - r[:, None]
    accepted = _threshold(info, config.gamma2, config.tau2, u2)
    first = np.argmax(accepted, axis=1) + 1
    decoded = np.where(accepted.any(axis=1), first, DECODING_ERROR)
    return np.where(detected, decoded, IDLE)


def decode(config: DecoderConfig, codebook: Codebook, y, rng: Optional[np.random.Generator] = None) -> int:
    """Decode a single output vector y; randomized ties use rng."""
    y = np.asarray(y, dtype=float)
    if y.shape != (codebook.n,):
        raise DomainError(f"y must have length n={codebook.n}, got shape {y.shape}")
    rng = rng or _rng(0)
    u1 = rng.random(1)
    u2 = rng.random((1, codebook.m))
    return int(decode_batch(config, codebook, y[None, :], u1, u2)[0])


@dataclass(frozen=True)
class EmpiricalErrors:
    """Empirical error rates with Wilson intervals, plus the raw counts."""

    p_fa: ProbEstimate
    p_md: ProbEstimate
    p_ie: ProbEstimate
    trials: int
    fa_count: int
    md_count: int
    ie_count: int

    @classmethod
    def from_counts(cls, fa_count: int, md_count: int, ie_count: int, trials: int,
                    confidence_level: float = 0.99) -> "EmpiricalErrors":
        def estimate(count: int) -> ProbEstimate:
            low, high = wilson_interval(count, trials, confidence_level)
            return ProbEstimate(value=count / trials, ci_low=low, ci_high=high,
                                n_samples=trials, source="wilson")

        return cls(estimate(fa_count), estimate(md_count), estimate(ie_count),
                   int(trials), int(fa_count), int(md_count), int(ie_count))


def measure_errors(spec: ChannelSpec, codebook: Codebook, config: DecoderConfig, trials: int,
                   seed: int, confidence_level: float = 0.99) -> EmpiricalErrors:
    """
    Measure FA over noise-only trials and MD/IE over uniform-message trials.

    Trials run in fixed-size chunks, each seeded from (seed, stream, chunk).
    """
    if trials < 1:
        raise DomainError(f"trials must be at least 1, got {trials}")
    if spec.n != codebook.n:
        raise DomainError(f"codebook length {codebook.n} does not match n={spec.n}")

    n, m = codebook.n, codebook.m
    rows = max(1, settings.chunk_elements // (n * (m + 1)))
    fa = md = ie = 0
    for index, start in enumerate(range(0, trials, rows)):
        count = min(rows, trials - start)

        rng = _rng(seed, _FA_STREAM, index)
        ys = rng.standard_normal((count, n))
        outcomes = decode_batch(config, codebook, ys, rng.random(count), rng.random((count, m)))
        fa += int(np.count_nonzero(outcomes != IDLE))

        rng = _rng(seed, _MESSAGE_STREAM, index)
        sent = rng.integers(0, m, count)
        ys = codebook.codewords[sent] + rng.standard_normal((count, n))
        outcomes = decode_batch(config, codebook, ys, rng.random(count), rng.random((count, m)))
        md += int(np.count_nonzero(outcomes == IDLE))
        ie += int(np.count_nonzero(outcomes != sent + 1))

    return EmpiricalErrors.from_counts(fa, md, ie, trials, confidence_level)


@dataclass(frozen=True)
class CheckResult:
    """One empirical-versus-guarantee comparison."""

    name: str
    empirical: ProbEstimate
    predicted: ProbEstimate
    limit: float
    passed: bool


@dataclass
class ValidationReport:
    """Outcome of a codebook-averaged validation run."""

    spec: ChannelSpec
    targets: TargetProbabilities
    m: int
    gamma2_offset: float
    operating_point: OperatingPoint
    codebook_seeds: List[int]
    per_codebook: List[EmpiricalErrors]
    pooled: EmpiricalErrors
    checks: Tuple[CheckResult, ...] = field(default_factory=tuple)
    containment_ok: bool = True

    @property
    def passed(self) -> bool:
        return self.containment_ok and all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_text(self) -> str:
        """Serialize as key: value lines."""
        op = self.operating_point
        lines = [
            f"verdict: {'PASS' if self.passed else 'FAIL'}",
            f"n: {self.spec.n}",
            f"rho: {self.spec.rho:.10g}",
            f"snr_db: {self.spec.snr_db:.10g}",
            f"p: {self.spec.p:.10g}",
            f"M: {self.m}",
            f"eps_fa: {self.targets.efa:.10g}",
            f"eps_md: {self.targets.emd:.10g}",
            f"eps_ie: {self.targets.eie:.10g}",
            f"n_codebooks: {len(self.per_codebook)}",
            f"trials_per_codebook: {self.pooled.trials // max(1, len(self.per_codebook))}",
            f"gamma1: {op.gamma1:.10g}",
            f"tau1: {op.tau1:.10g}",
            f"gamma2: {op.gamma2:.10g}",
            f"gamma2_offset: {self.gamma2_offset:.10g}",
            f"delta1: {op.delta1:.10g}",
            f"delta2: {op.delta2.value:.10g}",
            f"alpha2: {op.alpha2.value:.10g}",
            f"containment: {'PASS' if self.containment_ok else 'FAIL'}",
        ]
        for c in self.checks:
            key = c.name.lower()
            lines += [
                f"{key}_empirical: {c.empirical.value:.10g}",
                f"{key}_empirical_ci: [{c.empirical.ci_low:.10g}, {c.empirical.ci_high:.10g}]",
                f"{key}_bound: {c.predicted.value:.10g}",
                f"{key}_bound_ci: [{c.predicted.ci_low:.10g}, {c.predicted.ci_high:.10g}]",
                f"{key}_limit: {c.limit:.10g}",
                f"{key}_verdict: {'PASS' if c.passed else 'FAIL'}",
            ]
        return "\n".join(lines) + "\n"

    def per_codebook_frame(self) -> pd.DataFrame:
        rows = []
        for index, (seed, errors) in enumerate(zip(self.codebook_seeds, self.per_codebook)):
            rows.append({
                "codebook": index,
                "seed": seed,
                "trials": errors.trials,
                "fa_count": errors.fa_count,
                "md_count": errors.md_count,
                "ie_count": errors.ie_count,
                "p_fa": errors.p_fa.value,
                "p_md": errors.p_md.value,
                "p_ie": errors.p_ie.value,
            })
        return pd.DataFrame(rows)

    def write(self, path: str) -> Tuple[str, str]:
        """Write the text report and the per-codebook CSV next to it."""
        report_path = write_report(path, self.to_text())
        target = ensure_parent(path)
        csv_path = str(target.with_name(target.stem + "_codebooks.csv"))
        try:
            self.per_codebook_frame().to_csv(csv_path, index=False, float_format="%.10g")
        except OSError as e:
            logger.error(f"Error saving per-codebook errors: {e}")
            raise OutputError(f"cannot write {csv_path}: {e}") from e
        return report_path, csv_path


def validate_joint_bound(spec: ChannelSpec, targets: TargetProbabilities,
                         mc: Optional[MonteCarloConfig] = None, n_codebooks: int = 50,
                         trials: int = 100_000, m: Optional[int] = None,
                         gamma2_offset: float = 0.0, slack_halfwidths: float = 3.0,
                         show_progress: bool = False) -> ValidationReport:
    """
    Check the joint achievability guarantees against the brute-force decoder.

    Args:
        spec: Desk-scale channel (n <= 16 recommended)
        targets: Constraint triple used to set the detection threshold
        mc: Monte-Carlo configuration for the bound evaluation
        n_codebooks: Number of random codebooks averaged over
        trials: Trials per codebook (for FA and for MD/IE each)
        m: Codebook size; defaults to the size the bound certifies
        gamma2_offset: Added to the decoding threshold (negative values break the decoder)
        slack_halfwidths: Wilson half-widths allowed above the bound's upper CI
        show_progress: Show a progress bar over codebooks

    Returns:
        ValidationReport with one check per error type, evaluated on the
        codebook-averaged rates
    """
    if n_codebooks < 1:
        raise DomainError(f"n_codebooks must be at least 1, got {n_codebooks}")
    if trials < 1:
        raise DomainError(f"trials must be at least 1, got {trials}")
    mc = mc or settings.get_mc_config()

    if m is None:
        m = max(1, int(round(joint_achievability(spec, targets, mc).m)))
    op = joint_operating_point(spec, targets, m, mc)
    config = DecoderConfig(gamma1=op.gamma1, gamma2=op.gamma2 + gamma2_offset,
                           tau1=op.tau1, tau2=op.tau2)
    logger.info(f"Validating M={m} n={spec.n} over {n_codebooks} codebooks x {trials} trials")

    seeds, per_codebook = [], []
    for c in tqdm(range(n_codebooks), desc="codebooks", disable=not show_progress):
        codebook_seed = derive_seed(mc.seed, _CODEBOOK_KEY, c)
        codebook = Codebook.random(spec, m, codebook_seed)
        errors = measure_errors(spec, codebook, config, trials,
                                derive_seed(mc.seed, _TRIALS_KEY, c), mc.confidence_level)
        seeds.append(codebook_seed)
        per_codebook.append(errors)

    pooled = EmpiricalErrors.from_counts(
        sum(e.fa_count for e in per_codebook),
        sum(e.md_count for e in per_codebook),
        sum(e.ie_count for e in per_codebook),
        sum(e.trials for e in per_codebook),
        mc.confidence_level,
    )

    checks = []
    for name, empirical, predicted in (("FA", pooled.p_fa, op.rhs_fa),
                                       ("MD", pooled.p_md, op.rhs_md),
                                       ("IE", pooled.p_ie, op.rhs_ie)):
        limit = predicted.ci_high + slack_halfwidths * empirical.half_width
        passed = empirical.value <= limit
        checks.append(CheckResult(name, empirical, predicted, limit, passed))
        log = logger.info if passed else logger.warning
        log(f"{name}: empirical {empirical.value:.4e} vs bound {predicted.value:.4e} "
            f"(limit {limit:.4e}) -> {'PASS' if passed else 'FAIL'}")

    containment_ok = all(e.md_count <= e.ie_count for e in per_codebook)
    return ValidationReport(
        spec=spec,
        targets=targets,
        m=int(m),
        gamma2_offset=gamma2_offset,
        operating_point=op,
        codebook_seeds=seeds,
        per_codebook=per_codebook,
        pooled=pooled,
        checks=tuple(checks),
        containment_ok=containment_ok,
    )
