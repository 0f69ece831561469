"""Encode plaintext bits into noised blocks and decode them back.

Encoding a bit draws one independent Bernoulli flip per position: for bit 0
the alpha positions get the low rate ``p_x`` and beta the high rate ``p_y``;
for bit 1 the roles swap; gamma always gets the mean rate ``p_z``. Decoding
is a per-block likelihood-ratio test that, because both classes are the same
size, reduces to comparing the flip fractions seen on alpha and beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Block, KeyMatrix, NoiseParams, Partition, Seed, derive_seed
from .errors import EmptyMessage, Erasure, FormatError, InvalidParams, LengthMismatch

DecodeOutcome = "DecodedBit | Erasure | LengthMismatch"


@dataclass(frozen=True)
class DecodedBit:
    """One decoded bit with its evidence.

    ``llr`` is the log-likelihood ratio of the bit-0 hypothesis over the
    bit-1 hypothesis; positive means bit 0. A zero ratio is never stored
    here: that case is reported as an :class:`Erasure`.
    """

    bit: int
    f_alpha: float
    f_beta: float
    llr: float

    def __post_init__(self):
        if self.llr > 0 and self.bit != 0 or self.llr < 0 and self.bit != 1 or self.llr == 0:
            raise InvalidParams(f"bit {self.bit} inconsistent with llr {self.llr}")


def _class_indices(partition: Partition) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return (
        np.array(partition.alpha, dtype=np.intp),
        np.array(partition.beta, dtype=np.intp),
        np.array(partition.gamma, dtype=np.intp),
    )


def _flip_probabilities(partition: Partition, params: NoiseParams, bit: int) -> np.ndarray:
    """Per-position flip probability vector for encoding ``bit``."""
    a_idx, b_idx, g_idx = _class_indices(partition)
    probs = np.empty(partition.n, dtype=np.float64)
    probs[a_idx] = params.p_x if bit == 0 else params.p_y
    probs[b_idx] = params.p_y if bit == 0 else params.p_x
    probs[g_idx] = params.p_z
    return probs


def _draw_block(probs: np.ndarray, seed: Seed) -> Block:
    rng = np.random.default_rng(seed)
    return Block((rng.random(probs.shape[0]) < probs).astype(np.uint8))


def encode_bit(bit: int, partition: Partition, params: NoiseParams, seed: Seed) -> Block:
    """Encode one bit as a block of independent per-position flips."""
    if bit not in (0, 1):
        raise InvalidParams(f"bit must be 0 or 1, got {bit!r}")
    return _draw_block(_flip_probabilities(partition, params, bit), seed)


def encode_message(
    bits, partition: Partition, params: NoiseParams, seed: Seed
) -> KeyMatrix:
    """Encode a bit sequence, one block per bit.

    Row ``i`` uses the child seed ``derive_seed(seed, i)``, so rows are
    independent streams yet the whole matrix is reproducible from one seed
    (and could be produced in any order).
    """
    bits = [int(b) for b in bits]
    if not bits:
        raise EmptyMessage("cannot encode an empty bit sequence")
    if any(b not in (0, 1) for b in bits):
        raise InvalidParams("message bits must be 0 or 1")
    probs = (
        _flip_probabilities(partition, params, 0),
        _flip_probabilities(partition, params, 1),
    )
    blocks = [_draw_block(probs[b], derive_seed(seed, i)) for i, b in enumerate(bits)]
    return KeyMatrix(blocks=blocks, truth=bits)


def _bernoulli_loglik(k: int, m: int, p: float) -> float:
    """log P[Binomial(m, p) count == k], dropping the constant C(m, k) term.

    Zero-probability outcomes yield -inf; the 0 * log(0) corner is treated
    as 0 so deterministic rates (p = 0 or 1) stay exact.
    """
    if p == 0.0:
        return 0.0 if k == 0 else -math.inf
    if p == 1.0:
        return 0.0 if k == m else -math.inf
    return k * math.log(p) + (m - k) * math.log1p(-p)


def _finish_decode(k_a: int, k_b: int, partition: Partition, params: NoiseParams) -> DecodedBit:
    m_a, m_b = partition.n_alpha, partition.n_beta
    f_alpha = k_a / m_a
    f_beta = k_b / m_b
    # gamma positions have the same likelihood under both hypotheses, so they
    # contribute nothing to the ratio and are never inspected.
    loglik_bit0 = _bernoulli_loglik(k_a, m_a, params.p_x) + _bernoulli_loglik(k_b, m_b, params.p_y)
    loglik_bit1 = _bernoulli_loglik(k_a, m_a, params.p_y) + _bernoulli_loglik(k_b, m_b, params.p_x)
    if loglik_bit0 == loglik_bit1:
        raise Erasure(f_alpha=f_alpha, f_beta=f_beta)
    llr = loglik_bit0 - loglik_bit1
    return DecodedBit(bit=0 if llr > 0 else 1, f_alpha=f_alpha, f_beta=f_beta, llr=llr)


def decode_bit(block: Block, partition: Partition, params: NoiseParams) -> DecodedBit:
    """Likelihood-ratio decode of one block using only alpha and beta positions.

    Raises :class:`Erasure` on an exactly balanced ratio and
    :class:`LengthMismatch` if the block does not fit the partition. With
    equal class sizes the sign of the ratio equals the sign of
    ``f_beta - f_alpha``.
    """
    if len(block) != partition.n:
        raise LengthMismatch(f"block has {len(block)} positions, partition expects {partition.n}")
    a_idx, b_idx, _ = _class_indices(partition)
    k_a = int(block.errors[a_idx].sum())
    k_b = int(block.errors[b_idx].sum())
    return _finish_decode(k_a, k_b, partition, params)


def decode_message(matrix: KeyMatrix, partition: Partition, params: NoiseParams) -> list:
    """Decode every row independently, never failing fast.

    Returns one entry per block: a :class:`DecodedBit`, or the
    :class:`Erasure` / :class:`LengthMismatch` instance that row produced.
    Erasures are reported in place, never silently resolved.
    """
    a_idx, b_idx, _ = _class_indices(partition)
    good = [i for i, blk in enumerate(matrix.blocks) if len(blk) == partition.n]
    results: list = [None] * len(matrix.blocks)
    for i, blk in enumerate(matrix.blocks):
        if len(blk) != partition.n:
            results[i] = LengthMismatch(
                f"block {i} has {len(blk)} positions, partition expects {partition.n}"
            )
    if good:
        stacked = np.stack([matrix.blocks[i].errors for i in good])
        k_a_all = stacked[:, a_idx].sum(axis=1)
        k_b_all = stacked[:, b_idx].sum(axis=1)
        for row, k_a, k_b in zip(good, k_a_all, k_b_all):
            try:
                results[row] = _finish_decode(int(k_a), int(k_b), partition, params)
            except Erasure as tie:
                results[row] = tie
    return results


# --- wire formats: blocks as 0/1 lines, bits as one character per line ---


def write_blocks(path, blocks) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for blk in blocks:
            fh.write("".join("1" if e else "0" for e in blk.errors))
            fh.write("\n")


def read_blocks(path) -> list[Block]:
    """Parse a block file; all lines must be equal-length strings over {0,1}."""
    blocks: list[Block] = []
    width = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or set(line) - {"0", "1"}:
                raise FormatError(f"{path}:{lineno}: block lines must be non-empty over {{0,1}}")
            if width is None:
                width = len(line)
            elif len(line) != width:
                raise FormatError(
                    f"{path}:{lineno}: ragged block length {len(line)} (expected {width})"
                )
            blocks.append(Block(np.frombuffer(line.encode("ascii"), dtype=np.uint8) - ord("0")))
    return blocks


def write_bits(path, bits) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for b in bits:
            fh.write(f"{int(b)}\n")


def read_bits(path) -> list[int]:
    bits: list[int] = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if line not in ("0", "1"):
                raise FormatError(f"{path}:{lineno}: expected a single 0 or 1, got {line!r}")
            bits.append(int(line))
    return bits
