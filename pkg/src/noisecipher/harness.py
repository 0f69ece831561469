"""Experiment orchestration: config-driven encode/decode pipelines, an exact
bit-error oracle, parameter sweeps, attack runs, and report emission.

The default configuration reproduces the reference scenario used throughout
the tests: rates 0.25/0.75 (so the mean rate is exactly 0.5), 100 alpha and
100 beta carriers hidden among 10^4 decoys, and 10^4 random message bits.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np
from scipy.stats import binomtest

from .adversary import (
    ColumnStatistics,
    attack_report,
    column_statistics,
    column_uniformity,
    exhaustive_attack,
    workload_bound,
)
from .channel import ChannelModel, apply_channel_sequence, compose_flip_prob, effective_params
from .codec import DecodedBit, decode_message, encode_message
from .core import (
    KeyMatrix,
    NoiseParams,
    derive_seed,
    generate_partition,
    new_noise_params,
    partition_count_log2,
)
from .errors import Erasure, InvalidConfig, InvalidParams, NoiseCipherError, SearchSpaceTooLarge

DEFAULT_SEED = 7

# sub-stream indices under the experiment seed
_STREAM_PARTITION = 0
_STREAM_BITS = 1
_STREAM_ENCODE = 2
_STREAM_CHANNEL = 3

SWEEP_AXES = ("p_env", "m", "p_x", "p_y", "n_bits")

CSV_COLUMNS = [
    "axis",
    "value",
    "n_alpha",
    "n_beta",
    "n_gamma",
    "p_x",
    "p_y",
    "p_env",
    "n_bits",
    "trials",
    "seed",
    "bits_total",
    "errors",
    "erasures",
    "measured_ber",
    "ci_low",
    "ci_high",
    "oracle_ber",
    "oracle_wrong_order",
    "oracle_tie",
    "column_grand_mean",
    "column_max_abs_z",
    "column_chi2_pvalue",
    "min_statistics",
    "log2_ops",
    "log2_partition_count",
]


@dataclass
class ExperimentConfig:
    """Everything a decodability/attack experiment needs, JSON-mirrorable.

    ``bits`` pins the message explicitly; otherwise ``n_bits`` uniformly
    random bits are drawn per trial. ``attack_limit`` enables the
    exhaustive attack on the transmitted traffic when set (it stays off by
    default because full-size search spaces are astronomically large).
    """

    n_alpha: int = 100
    n_beta: int = 100
    n_gamma: int = 10_000
    p_x: float = 0.25
    p_y: float = 0.75
    p_env: float = 0.0
    n_bits: int = 10_000
    bits: list[int] | None = None
    seed: int = DEFAULT_SEED
    trials: int = 1
    attack_limit: int | None = None
    attack_top: int = 10
    report_path: str | None = None
    csv_path: str | None = None

    def validate(self) -> None:
        try:
            new_noise_params(self.p_x, self.p_y)
            ChannelModel(self.p_env)
            if self.n_alpha != self.n_beta or self.n_alpha < 1 or self.n_gamma < 0:
                raise InvalidParams(
                    f"sizes must satisfy n_alpha == n_beta >= 1 and n_gamma >= 0, "
                    f"got ({self.n_alpha}, {self.n_beta}, {self.n_gamma})"
                )
        except InvalidParams as exc:
            raise InvalidConfig(str(exc)) from exc
        if not isinstance(self.trials, int) or self.trials < 1:
            raise InvalidConfig(f"trial count must be a positive integer, got {self.trials!r}")
        if self.bits is not None:
            if not self.bits:
                raise InvalidConfig("explicit bit list must be non-empty")
            if any(b not in (0, 1) for b in self.bits):
                raise InvalidConfig("explicit bits must be 0 or 1")
        elif not isinstance(self.n_bits, int) or self.n_bits < 1:
            raise InvalidConfig(f"n_bits must be a positive integer, got {self.n_bits!r}")
        if self.attack_limit is not None and (
            not isinstance(self.attack_limit, int) or self.attack_limit < 1
        ):
            raise InvalidConfig(f"attack_limit must be a positive integer, got {self.attack_limit!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise InvalidConfig("config document must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise InvalidConfig(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**doc)
        cfg.validate()
        return cfg

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidConfig(f"config file {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)


@dataclass
class ExperimentReport:
    """Measured and exact error rates plus traffic statistics for one run."""

    config: ExperimentConfig
    bits_total: int
    errors: int
    erasures: int
    measured_ber: float
    ci_low: float
    ci_high: float
    oracle_ber: float
    oracle_wrong_order: float
    oracle_tie: float
    column_stats: dict
    workload: dict
    attack: dict | None
    status: str
    started_utc: str
    wall_clock_seconds: float

    def to_dict(self, include_meta: bool = True) -> dict:
        doc = {
            "config": self.config.to_dict(),
            "ber": {
                "bits_total": self.bits_total,
                "errors": self.errors,
                "erasures": self.erasures,
                "measured": self.measured_ber,
                "ci95": [self.ci_low, self.ci_high],
                "oracle": self.oracle_ber,
                "oracle_wrong_order": self.oracle_wrong_order,
                "oracle_tie": self.oracle_tie,
            },
            "column_stats": self.column_stats,
            "workload": self.workload,
            "attack": self.attack,
            "status": self.status,
        }
        if include_meta:
            doc["meta"] = {
                "started_utc": self.started_utc,
                "wall_clock_seconds": self.wall_clock_seconds,
            }
        return doc


# --- the exact decode-error oracle -------------------------------------------


def _exact_binom_pmf(m: int, p: Fraction) -> list[Fraction]:
    q = 1 - p
    return [math.comb(m, k) * p**k * q ** (m - k) for k in range(m + 1)]


def _exact_error_terms(
    params: NoiseParams, m: int, channel: ChannelModel | None
) -> tuple[Fraction, Fraction]:
    """(wrong-order probability, tie probability) as exact rationals.

    Flip counts on the two carrier classes are independent binomials at the
    effective post-channel rates; a sent bit is misread when the class that
    got the low rate shows at least as many flips as the other class.
    """
    if not isinstance(m, (int, np.integer)) or isinstance(m, bool) or m < 1:
        raise InvalidParams(f"class size m must be a positive integer, got {m!r}")
    p_env = channel.p_env if channel is not None else 0.0
    p_low = Fraction(compose_flip_prob(params.p_x, p_env))
    p_high = Fraction(compose_flip_prob(params.p_y, p_env))
    pmf_low = _exact_binom_pmf(m, p_low)
    pmf_high = _exact_binom_pmf(m, p_high)
    tail_low = [Fraction(0)] * (m + 2)
    for k in range(m, -1, -1):
        tail_low[k] = tail_low[k + 1] + pmf_low[k]
    wrong = sum((pmf_high[j] * tail_low[j + 1] for j in range(m + 1)), Fraction(0))
    tie = sum((pmf_low[j] * pmf_high[j] for j in range(m + 1)), Fraction(0))
    return wrong, tie


def exact_decode_error_probability(
    params: NoiseParams, m: int, channel: ChannelModel | None = None
) -> float:
    """P[decode != sent] for equal class sizes ``m``, ties counted as errors.

    Computed by direct convolution over the (m+1)^2 outcome grid in exact
    rational arithmetic, then rounded once at the end, so values far below
    float granularity (e.g. < 1e-10) come out right.
    """
    wrong, tie = _exact_error_terms(params, m, channel)
    return float(wrong + tie)


def exact_decode_error_breakdown(
    params: NoiseParams, m: int, channel: ChannelModel | None = None
) -> tuple[float, float]:
    """The two error components separately: (wrong order, exact tie)."""
    wrong, tie = _exact_error_terms(params, m, channel)
    return float(wrong), float(tie)


# --- experiment runner --------------------------------------------------------


def _column_summary(counts: np.ndarray, n_blocks: int, expected_rate: float) -> dict:
    stats = ColumnStatistics(
        counts=counts,
        n_blocks=n_blocks,
        per_position=counts / n_blocks,
        grand_mean=float(counts.sum() / (n_blocks * counts.shape[0])),
    )
    statistic, pvalue = column_uniformity(stats, expected_rate)
    z = (counts - n_blocks * expected_rate) / math.sqrt(
        n_blocks * expected_rate * (1.0 - expected_rate)
    )
    return {
        "n_blocks": n_blocks,
        "n_positions": int(counts.shape[0]),
        "expected_rate": expected_rate,
        "grand_mean": stats.grand_mean,
        "max_abs_z": float(np.max(np.abs(z))),
        "chi2_statistic": statistic,
        "chi2_pvalue": pvalue,
    }


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Generate a key, push bits through cipher and channel, decode, account.

    Fully deterministic given the config: the experiment seed is split into
    independent sub-streams for partition choice, message bits, encoding
    noise and channel noise. On failure after validation, a stub report
    marked ``"incomplete"`` is written to ``report_path`` (when set) before
    the error propagates.
    """
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    config.validate()
    try:
        report = _run_validated(config, started, t0)
    except NoiseCipherError as exc:
        if config.report_path:
            stub = {
                "config": config.to_dict(),
                "status": "incomplete",
                "error": {"type": type(exc).__name__, "message": str(exc)},
                "meta": {
                    "started_utc": started,
                    "wall_clock_seconds": time.perf_counter() - t0,
                },
            }
            _dump_json(stub, config.report_path)
        raise
    if config.report_path:
        write_report(report, config.report_path)
    if config.csv_path:
        write_csv([report], config.csv_path)
    return report


def _run_validated(config: ExperimentConfig, started: str, t0: float) -> ExperimentReport:
    params = new_noise_params(config.p_x, config.p_y)
    partition = generate_partition(
        config.n_alpha, config.n_beta, config.n_gamma, derive_seed(config.seed, _STREAM_PARTITION)
    )
    chan = ChannelModel(config.p_env)
    eff = effective_params(params, chan) if config.p_env > 0 else params

    col_counts = np.zeros(partition.n, dtype=np.int64)
    col_blocks = 0
    bits_total = errors = erasures = 0
    attack_traffic = [] if config.attack_limit is not None else None

    for trial in range(config.trials):
        if config.bits is not None:
            bits = list(config.bits)
        else:
            rng = np.random.default_rng(derive_seed(derive_seed(config.seed, _STREAM_BITS), trial))
            bits = rng.integers(0, 2, size=config.n_bits).tolist()
        matrix = encode_message(
            bits, partition, params, derive_seed(derive_seed(config.seed, _STREAM_ENCODE), trial)
        )
        blocks = matrix.blocks
        if config.p_env > 0:
            blocks = apply_channel_sequence(
                blocks, chan, derive_seed(derive_seed(config.seed, _STREAM_CHANNEL), trial)
            )
        stats = column_statistics(blocks)
        col_counts += stats.counts
        col_blocks += stats.n_blocks
        for sent, out in zip(bits, decode_message(KeyMatrix(blocks), partition, eff)):
            bits_total += 1
            if isinstance(out, DecodedBit):
                errors += out.bit != sent
            else:
                errors += 1
                erasures += isinstance(out, Erasure)
        if attack_traffic is not None:
            attack_traffic.extend(blocks)

    ci = binomtest(errors, bits_total).proportion_ci(confidence_level=0.95, method="wilson")
    oracle_wrong, oracle_tie = _exact_error_terms(params, config.n_alpha, chan)

    attack = None
    if config.attack_limit is not None:
        try:
            result = exhaustive_attack(
                attack_traffic,
                partition.n,
                config.n_alpha,
                config.n_beta,
                eff,
                config.attack_limit,
                truth=partition,
            )
            attack = attack_report(result, top=config.attack_top)
        except SearchSpaceTooLarge as exc:
            # at full-size parameters this branch is the security demonstration
            attack = {
                "error": "SearchSpaceTooLarge",
                "count": exc.count,
                "log2_count": exc.log2_count,
                "limit": config.attack_limit,
            }

    bound = workload_bound(config.n_alpha, config.n_beta, config.n_gamma)
    return ExperimentReport(
        config=config,
        bits_total=bits_total,
        errors=errors,
        erasures=erasures,
        measured_ber=errors / bits_total,
        ci_low=float(ci.low),
        ci_high=float(ci.high),
        oracle_ber=float(oracle_wrong + oracle_tie),
        oracle_wrong_order=float(oracle_wrong),
        oracle_tie=float(oracle_tie),
        column_stats=_column_summary(
            col_counts, col_blocks, compose_flip_prob(params.p_z, config.p_env)
        ),
        workload={
            "min_statistics": bound.min_statistics,
            "log2_ops": bound.operations_lower_bound_log2,
            "log2_partition_count": partition_count_log2(
                partition.n, config.n_alpha, config.n_beta
            ),
        },
        attack=attack,
        status="complete",
        started_utc=started,
        wall_clock_seconds=time.perf_counter() - t0,
    )


def sweep(config: ExperimentConfig, axis: str, values) -> list[ExperimentReport]:
    """Run one experiment per value along ``axis``; optionally emit combined CSV.

    ``axis`` is one of ``p_env``, ``m`` (both carrier class sizes at once),
    ``p_x``, ``p_y`` or ``n_bits``. Each point reuses the base config
    (including its seed) with only the axis field changed; per-point report
    and CSV paths are suppressed in favor of the combined CSV written to
    ``config.csv_path`` when that is set.
    """
    if axis not in SWEEP_AXES:
        raise InvalidConfig(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    values = list(values)
    if not values:
        raise InvalidConfig("sweep needs at least one value")
    reports = []
    for v in values:
        if axis == "m":
            point = replace(config, n_alpha=int(v), n_beta=int(v))
        elif axis == "n_bits":
            point = replace(config, n_bits=int(v))
        else:
            point = replace(config, **{axis: float(v)})
        point = replace(point, report_path=None, csv_path=None)
        reports.append(run_experiment(point))
    if config.csv_path:
        write_csv(reports, config.csv_path, axis=axis, values=values)
    return reports


# --- serialization ------------------------------------------------------------


def _dump_json(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_report(report: ExperimentReport, path) -> None:
    _dump_json(report.to_dict(), path)


def csv_row(report: ExperimentReport, axis: str = "", value="") -> list:
    cfg = report.config
    return [
        axis,
        value,
        cfg.n_alpha,
        cfg.n_beta,
        cfg.n_gamma,
        cfg.p_x,
        cfg.p_y,
        cfg.p_env,
        cfg.n_bits if cfg.bits is None else len(cfg.bits),
        cfg.trials,
        cfg.seed,
        report.bits_total,
        report.errors,
        report.erasures,
        report.measured_ber,
        report.ci_low,
        report.ci_high,
        report.oracle_ber,
        report.oracle_wrong_order,
        report.oracle_tie,
        report.column_stats["grand_mean"],
        report.column_stats["max_abs_z"],
        report.column_stats["chi2_pvalue"],
        report.workload["min_statistics"],
        report.workload["log2_ops"],
        report.workload["log2_partition_count"],
    ]


def write_csv(reports, path, axis: str | None = None, values=None) -> None:
    """One row per report under the fixed :data:`CSV_COLUMNS` schema."""
    if values is None:
        values = [""] * len(reports)
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for report, value in zip(reports, values):
            writer.writerow(csv_row(report, axis=axis or "", value=value))
