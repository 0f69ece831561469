"""Codec behavior: noising per class, likelihood-ratio decoding, wire formats."""

import math

import numpy as np
import pytest
from scipy.stats import chi2_contingency

from noisecipher import (
    Block,
    DecodedBit,
    EmptyMessage,
    Erasure,
    FormatError,
    InvalidParams,
    KeyMatrix,
    LengthMismatch,
    decode_bit,
    decode_message,
    derive_seed,
    encode_bit,
    encode_message,
    exact_decode_error_probability,
    generate_partition,
    new_noise_params,
    read_bits,
    read_blocks,
    write_bits,
    write_blocks,
)

PAPER_RATES = new_noise_params(0.25, 0.75)
EXTREME_RATES = new_noise_params(0.0, 1.0)


def flips_on(block, positions):
    return int(block.errors[list(positions)].sum())


class TestEncodeBit:
    def test_deterministic_extremes_bit0(self):
        part = generate_partition(4, 4, 12, seed=8)
        blk = encode_bit(0, part, EXTREME_RATES, seed=123)
        assert flips_on(blk, part.alpha) == 0
        assert flips_on(blk, part.beta) == len(part.beta)

    def test_deterministic_extremes_bit1(self):
        part = generate_partition(4, 4, 12, seed=8)
        blk = encode_bit(1, part, EXTREME_RATES, seed=123)
        assert flips_on(blk, part.alpha) == len(part.alpha)
        assert flips_on(blk, part.beta) == 0

    def test_decoys_flip_at_half_rate_under_extremes(self):
        part = generate_partition(1, 1, 48, seed=8)
        total = sum(
            flips_on(encode_bit(0, part, EXTREME_RATES, seed=s), part.gamma)
            for s in range(2_000)
        )
        draws = 2_000 * 48
        sigma = math.sqrt(draws * 0.25)
        assert abs(total - draws / 2) < 5 * sigma

    def test_alpha_flip_count_statistics(self):
        # reference rate 1/4 on a 100-wide carrier class: mean flip count 25
        part = generate_partition(100, 100, 0, seed=4)
        trials = 10_000
        total = sum(
            flips_on(encode_bit(0, part, PAPER_RATES, seed=s), part.alpha)
            for s in range(trials)
        )
        mean = total / trials
        sigma_mean = math.sqrt(100 * 0.25 * 0.75 / trials)
        assert abs(mean - 25.0) < 5 * sigma_mean

    def test_seed_determinism(self):
        part = generate_partition(3, 3, 4, seed=2)
        assert encode_bit(0, part, PAPER_RATES, seed=9) == encode_bit(0, part, PAPER_RATES, seed=9)

    def test_rejects_non_bit(self):
        part = generate_partition(1, 1, 0, seed=2)
        with pytest.raises(InvalidParams):
            encode_bit(2, part, PAPER_RATES, seed=0)


class TestEncodeMessage:
    def test_reference_bit_column(self):
        part = generate_partition(2, 2, 8, seed=6)
        matrix = encode_message([0, 1, 1, 0, 0, 1], part, PAPER_RATES, seed=77)
        assert len(matrix) == 6
        assert matrix.truth == [0, 1, 1, 0, 0, 1]
        assert all(len(blk) == part.n for blk in matrix.blocks)

    def test_single_bit(self):
        part = generate_partition(1, 1, 0, seed=6)
        assert len(encode_message([0], part, PAPER_RATES, seed=1)) == 1

    def test_empty_message_rejected(self):
        part = generate_partition(1, 1, 0, seed=6)
        with pytest.raises(EmptyMessage):
            encode_message([], part, PAPER_RATES, seed=1)

    def test_determinism(self):
        part = generate_partition(2, 2, 3, seed=6)
        bits = [0, 1, 0, 1, 1]
        assert encode_message(bits, part, PAPER_RATES, seed=5) == encode_message(
            bits, part, PAPER_RATES, seed=5
        )

    def test_rows_use_derived_child_seeds(self):
        part = generate_partition(2, 2, 3, seed=6)
        bits = [1, 0, 1]
        matrix = encode_message(bits, part, PAPER_RATES, seed=31)
        for i, bit in enumerate(bits):
            assert matrix.blocks[i] == encode_bit(bit, part, PAPER_RATES, derive_seed(31, i))


class TestDecodeBit:
    def test_clean_alpha_means_bit0(self):
        part = generate_partition(2, 2, 0, seed=3)
        errors = np.zeros(part.n, dtype=np.uint8)
        errors[list(part.beta)] = 1
        out = decode_bit(Block(errors), part, PAPER_RATES)
        assert (out.bit, out.f_alpha, out.f_beta) == (0, 0.0, 1.0)
        assert out.llr > 0

    def test_clean_beta_means_bit1(self):
        part = generate_partition(2, 2, 0, seed=3)
        errors = np.zeros(part.n, dtype=np.uint8)
        errors[list(part.alpha)] = 1
        out = decode_bit(Block(errors), part, PAPER_RATES)
        assert (out.bit, out.f_alpha, out.f_beta) == (1, 1.0, 0.0)
        assert out.llr < 0

    def test_exact_tie_is_an_erasure(self):
        part = generate_partition(1, 1, 0, seed=3)
        with pytest.raises(Erasure) as err:
            decode_bit(Block([1, 1]), part, PAPER_RATES)
        assert err.value.f_alpha == err.value.f_beta == 1.0

    def test_length_mismatch(self):
        part = generate_partition(2, 2, 0, seed=3)
        with pytest.raises(LengthMismatch):
            decode_bit(Block([0, 1]), part, PAPER_RATES)

    def test_llr_sign_equals_frequency_comparison(self):
        # with equal class sizes the LRT degenerates to comparing fractions
        rng = np.random.default_rng(12)
        part = generate_partition(5, 5, 6, seed=9)
        for _ in range(500):
            p_x = rng.uniform(0.01, 0.45)
            params = new_noise_params(p_x, rng.uniform(p_x + 0.05, 0.99))
            blk = Block(rng.integers(0, 2, size=part.n, dtype=np.uint8))
            try:
                out = decode_bit(blk, part, params)
            except Erasure as tie:
                assert tie.f_alpha == tie.f_beta
                continue
            assert math.copysign(1, out.llr) == math.copysign(1, out.f_beta - out.f_alpha)
            assert out.bit == (0 if out.f_beta > out.f_alpha else 1)

    def test_decoy_positions_are_ignored(self):
        rng = np.random.default_rng(13)
        part = generate_partition(3, 3, 10, seed=10)
        blk = encode_bit(1, part, PAPER_RATES, seed=55)
        out = decode_bit(blk, part, PAPER_RATES)
        for _ in range(20):
            tampered = np.array(blk.errors)
            tampered[list(part.gamma)] = rng.integers(0, 2, size=part.n_gamma)
            got = decode_bit(Block(tampered), part, PAPER_RATES)
            assert got == out


class TestDecodeMessage:
    def test_round_trip_reference_rates(self):
        part = generate_partition(100, 100, 0, seed=14)
        bits = [0, 1, 1, 0, 0, 1]
        matrix = encode_message(bits, part, PAPER_RATES, seed=3)
        decoded = decode_message(matrix, part, PAPER_RATES)
        assert [d.bit for d in decoded] == bits
        # failure odds per bit are below 1e-10, so a clean pass is expected
        assert exact_decode_error_probability(PAPER_RATES, 100) < 1e-10

    def test_empty_matrix(self):
        part = generate_partition(1, 1, 0, seed=14)
        assert decode_message(KeyMatrix(blocks=[]), part, PAPER_RATES) == []

    def test_error_isolation(self):
        part = generate_partition(2, 2, 0, seed=15)
        matrix = encode_message([0, 1, 0], part, PAPER_RATES, seed=8)
        corrupted = KeyMatrix(
            blocks=[matrix.blocks[0], Block([0, 1]), matrix.blocks[2]]
        )
        out = decode_message(corrupted, part, PAPER_RATES)
        assert isinstance(out[0], DecodedBit)
        assert isinstance(out[1], LengthMismatch)
        assert isinstance(out[2], DecodedBit)

    def test_erasures_reported_in_place(self):
        part = generate_partition(1, 1, 0, seed=15)
        out = decode_message(
            KeyMatrix(blocks=[Block([1, 1]), Block([0, 1])]), part, PAPER_RATES
        )
        assert isinstance(out[0], Erasure)
        assert isinstance(out[1], DecodedBit)

    def test_agrees_with_per_block_decode(self):
        part = generate_partition(3, 3, 5, seed=16)
        matrix = encode_message([0, 1] * 10, part, PAPER_RATES, seed=44)
        whole = decode_message(matrix, part, PAPER_RATES)
        for blk, out in zip(matrix.blocks, whole):
            assert decode_bit(blk, part, PAPER_RATES) == out


class TestStatisticalProperties:
    def test_relabel_symmetry(self):
        # flip counts on alpha under bit 0 match flip counts on beta under
        # bit 1 in distribution; chi-square on merged histograms
        part = generate_partition(6, 6, 4, seed=17)
        samples = 10_000
        a_counts = np.array(
            [
                flips_on(encode_bit(0, part, PAPER_RATES, derive_seed(1000, s)), part.alpha)
                for s in range(samples)
            ]
        )
        b_counts = np.array(
            [
                flips_on(encode_bit(1, part, PAPER_RATES, derive_seed(2000, s)), part.beta)
                for s in range(samples)
            ]
        )
        table = merged_histogram_pair(a_counts, b_counts, m=6)
        assert chi2_contingency(table).pvalue > 0.01

    @pytest.mark.parametrize("rates", [PAPER_RATES, new_noise_params(0.1, 0.4)])
    def test_marginal_flip_rate_is_the_mean_rate(self, rates):
        # under uniformly random bits every position flips at p_z marginally
        part = generate_partition(2, 2, 3, seed=18)
        trials = 100_000
        rng = np.random.default_rng(19)
        bits = rng.integers(0, 2, size=trials).tolist()
        matrix = encode_message(bits, part, rates, seed=20)
        counts = np.zeros(part.n, dtype=np.int64)
        for blk in matrix.blocks:
            counts += blk.errors
        sigma = math.sqrt(trials * rates.p_z * (1 - rates.p_z))
        assert np.all(np.abs(counts - trials * rates.p_z) < 5 * sigma)

    @pytest.mark.parametrize("m", [1, 5])
    def test_round_trip_error_rate_matches_oracle(self, m):
        part = generate_partition(m, m, 0, seed=21)
        trials = 20_000
        rng = np.random.default_rng(22)
        bits = rng.integers(0, 2, size=trials).tolist()
        matrix = encode_message(bits, part, PAPER_RATES, seed=23)
        outcomes = decode_message(matrix, part, PAPER_RATES)
        errors = sum(
            1
            for sent, out in zip(bits, outcomes)
            if not isinstance(out, DecodedBit) or out.bit != sent
        )
        expected = exact_decode_error_probability(PAPER_RATES, m)
        sigma = math.sqrt(expected * (1 - expected) / trials)
        assert abs(errors / trials - expected) < 5 * sigma


def merged_histogram_pair(a_counts, b_counts, m):
    """2xK contingency table with sparse count bins pooled from the right."""
    hist_a = np.bincount(a_counts, minlength=m + 1)
    hist_b = np.bincount(b_counts, minlength=m + 1)
    cols_a, cols_b = [], []
    acc_a = acc_b = 0
    for k in range(m + 1):
        acc_a += int(hist_a[k])
        acc_b += int(hist_b[k])
        if acc_a + acc_b >= 25:
            cols_a.append(acc_a)
            cols_b.append(acc_b)
            acc_a = acc_b = 0
    if acc_a + acc_b:
        cols_a[-1] += acc_a
        cols_b[-1] += acc_b
    return np.array([cols_a, cols_b])


class TestWireFormats:
    def test_blocks_round_trip(self, tmp_path):
        part = generate_partition(2, 2, 1, seed=24)
        matrix = encode_message([0, 1, 1], part, PAPER_RATES, seed=25)
        path = tmp_path / "blocks.txt"
        write_blocks(path, matrix.blocks)
        assert read_blocks(path) == matrix.blocks
        lines = path.read_text().splitlines()
        assert all(len(line) == part.n and set(line) <= {"0", "1"} for line in lines)

    def test_bits_round_trip(self, tmp_path):
        path = tmp_path / "bits.txt"
        write_bits(path, [0, 1, 1, 0])
        assert read_bits(path) == [0, 1, 1, 0]

    def test_bad_block_character_rejected(self, tmp_path):
        path = tmp_path / "blocks.txt"
        path.write_text("0102\n")
        with pytest.raises(FormatError):
            read_blocks(path)

    def test_ragged_blocks_rejected(self, tmp_path):
        path = tmp_path / "blocks.txt"
        path.write_text("0101\n est010\n")
        with pytest.raises(FormatError):
            read_blocks(path)

    def test_bad_bit_line_rejected(self, tmp_path):
        path = tmp_path / "bits.txt"
        path.write_text("0\n2\n")
        with pytest.raises(FormatError):
            read_bits(path)
