"""Noise-keyed cipher simulator.

Bits are transmitted as blocks of binary error indicators: two secret,
equal-sized position classes carry the bit value through which of them gets
the low flip rate, while optional decoy positions always flip at the mean
rate. The package bundles the codec, an environmental-noise channel, a
statistical adversary, and an experiment harness with an exact error
oracle.
"""

from .adversary import (
    AttackResult,
    ColumnStatistics,
    WorkloadBound,
    attack_report,
    column_statistics,
    column_uniformity,
    exhaustive_attack,
    score_partition,
    workload_bound,
)
from .channel import ChannelModel, apply_channel, apply_channel_sequence, compose_flip_prob, effective_params
from .codec import (
    DecodedBit,
    decode_bit,
    decode_message,
    encode_bit,
    encode_message,
    read_bits,
    read_blocks,
    write_bits,
    write_blocks,
)
from .core import (
    Block,
    KeyMatrix,
    NoiseParams,
    Partition,
    derive_seed,
    generate_partition,
    new_noise_params,
    partition_count,
    partition_count_log2,
    read_key_file,
    write_key_file,
)
from .errors import (
    EmptyInput,
    EmptyMessage,
    Erasure,
    FormatError,
    InvalidConfig,
    InvalidParams,
    LengthMismatch,
    NoiseCipherError,
    SearchSpaceTooLarge,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    exact_decode_error_breakdown,
    exact_decode_error_probability,
    run_experiment,
    sweep,
    write_csv,
    write_report,
)

__version__ = "0.1.0"

__all__ = [
    "AttackResult",
    "Block",
    "ChannelModel",
    "ColumnStatistics",
    "DecodedBit",
    "EmptyInput",
    "EmptyMessage",
    "Erasure",
    "ExperimentConfig",
    "ExperimentReport",
    "FormatError",
    "InvalidConfig",
    "InvalidParams",
    "KeyMatrix",
    "LengthMismatch",
    "NoiseCipherError",
    "NoiseParams",
    "Partition",
    "SearchSpaceTooLarge",
    "WorkloadBound",
    "apply_channel",
    "apply_channel_sequence",
    "attack_report",
    "column_statistics",
    "column_uniformity",
    "compose_flip_prob",
    "decode_bit",
    "decode_message",
    "derive_seed",
    "effective_params",
    "encode_bit",
    "encode_message",
    "exact_decode_error_breakdown",
    "exact_decode_error_probability",
    "exhaustive_attack",
    "generate_partition",
    "new_noise_params",
    "partition_count",
    "partition_count_log2",
    "read_bits",
    "read_blocks",
    "read_key_file",
    "run_experiment",
    "score_partition",
    "sweep",
    "workload_bound",
    "write_bits",
    "write_blocks",
    "write_csv",
    "write_key_file",
    "write_report",
]
