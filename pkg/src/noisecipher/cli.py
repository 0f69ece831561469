"""Command-line interface.

Subcommands mirror the pipeline: ``keygen`` writes the shared secret,
``encode`` turns bits into block lines, ``channel`` adds environmental
noise, ``decode`` recovers bits, ``attack`` runs the exhaustive adversary,
``simulate``/``sweep`` drive full experiments. Every command exits 0 on
success; on failure a one-line JSON error document goes to stderr and the
exit code is nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .adversary import attack_report, exhaustive_attack
from .channel import ChannelModel, apply_channel_sequence, effective_params
from .codec import (
    DecodedBit,
    decode_message,
    encode_message,
    read_bits,
    read_blocks,
    write_bits,
    write_blocks,
)
from .core import (
    KeyMatrix,
    derive_seed,
    generate_partition,
    new_noise_params,
    read_key_file,
    write_key_file,
)
from .errors import Erasure, NoiseCipherError
from .harness import ExperimentConfig, run_experiment, sweep, write_csv, write_report


class UsageError(NoiseCipherError):
    """Bad command-line arguments."""


class _Parser(argparse.ArgumentParser):
    # raise instead of exiting so errors come out as JSON like everything else
    def error(self, message):
        raise UsageError(message)


def _emit(doc: dict) -> None:
    print(json.dumps(doc, sort_keys=True))


def _cmd_keygen(args) -> int:
    params = new_noise_params(args.px, args.py)
    partition = generate_partition(args.alpha, args.beta, args.gamma, args.seed)
    write_key_file(args.out, partition, params)
    _emit({"out": args.out, "n": partition.n, "p_x": params.p_x, "p_y": params.p_y})
    return 0


def _cmd_encode(args) -> int:
    partition, params = read_key_file(args.key)
    if args.bits is not None:
        bits = read_bits(args.bits)
    else:
        rng = np.random.default_rng(derive_seed(args.seed, 0))
        bits = rng.integers(0, 2, size=args.random).tolist()
    matrix = encode_message(bits, partition, params, derive_seed(args.seed, 1))
    write_blocks(args.out, matrix.blocks)
    if args.truth_out:
        write_bits(args.truth_out, matrix.truth)
    _emit({"out": args.out, "blocks": len(matrix), "n": partition.n})
    return 0


def _cmd_channel(args) -> int:
    blocks = read_blocks(args.infile)
    noisy = apply_channel_sequence(blocks, ChannelModel(args.p_env), args.seed)
    write_blocks(args.out, noisy)
    _emit({"out": args.out, "blocks": len(noisy), "p_env": args.p_env})
    return 0


def _cmd_decode(args) -> int:
    partition, params = read_key_file(args.key)
    if args.p_env > 0:
        params = effective_params(params, ChannelModel(args.p_env))
    blocks = read_blocks(args.infile)
    outcomes = decode_message(KeyMatrix(blocks), partition, params)
    counts = {"bits": 0, "erasures": 0, "length_mismatches": 0}
    with open(args.out, "w", encoding="ascii", newline="\n") as fh:
        for out in outcomes:
            if isinstance(out, DecodedBit):
                fh.write(f"{out.bit}\n")
                counts["bits"] += 1
            elif isinstance(out, Erasure):
                fh.write("e\n")
                counts["erasures"] += 1
            else:
                fh.write("x\n")
                counts["length_mismatches"] += 1
    _emit({"out": args.out, "blocks": len(outcomes), **counts})
    return 0


def _cmd_attack(args) -> int:
    blocks = read_blocks(args.blocks)
    params = new_noise_params(args.px, args.py)
    truth = None
    if args.key:
        truth, _ = read_key_file(args.key)
    result = exhaustive_attack(
        blocks, args.n, args.alpha, args.beta, params, args.limit, truth=truth
    )
    report = attack_report(result, top=args.top)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _emit({"out": args.out, "evaluated": report["evaluated"], "truth_rank": report["truth_rank"]})
    return 0


def _cmd_simulate(args) -> int:
    config = ExperimentConfig.from_json_file(args.config) if args.config else ExperimentConfig()
    if args.out:
        config.report_path = args.out
    if args.csv:
        config.csv_path = args.csv
    report = run_experiment(config)
    _emit(
        {
            "status": report.status,
            "bits": report.bits_total,
            "errors": report.errors,
            "measured_ber": report.measured_ber,
            "oracle_ber": report.oracle_ber,
            "out": config.report_path,
        }
    )
    return 0


def _cmd_sweep(args) -> int:
    config = ExperimentConfig.from_json_file(args.config) if args.config else ExperimentConfig()
    raw = [v for v in args.values.split(",") if v != ""]
    values = [int(v) for v in raw] if args.axis in ("m", "n_bits") else [float(v) for v in raw]
    config.csv_path = None  # single combined CSV below
    reports = sweep(config, args.axis, values)
    write_csv(reports, args.csv, axis=args.axis, values=values)
    _emit({"csv": args.csv, "points": len(reports), "axis": args.axis})
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="noisecipher", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate a partition + rates key file")
    p.add_argument("--alpha", type=int, required=True, help="number of alpha positions")
    p.add_argument("--beta", type=int, required=True, help="number of beta positions")
    p.add_argument("--gamma", type=int, required=True, help="number of decoy positions")
    p.add_argument("--px", type=float, required=True, help="low flip rate")
    p.add_argument("--py", type=float, required=True, help="high flip rate")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="key file path (JSON)")
    p.set_defaults(handler=_cmd_keygen)

    p = sub.add_parser("encode", help="encode bits into block lines")
    p.add_argument("--key", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--bits", help="file with one bit per line")
    src.add_argument("--random", type=int, help="draw this many random bits instead")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="block file path")
    p.add_argument("--truth-out", help="also write the encoded bits, one per line")
    p.set_defaults(handler=_cmd_encode)

    p = sub.add_parser("channel", help="pass blocks through the environmental BSC")
    p.add_argument("--p-env", dest="p_env", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_channel)

    p = sub.add_parser("decode", help="decode block lines back to bits")
    p.add_argument("--key", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True, help="one 0/1 per line; e = erasure, x = bad length")
    p.add_argument(
        "--p-env",
        dest="p_env",
        type=float,
        default=0.0,
        help="decode at rates adjusted for this channel noise level",
    )
    p.set_defaults(handler=_cmd_decode)

    p = sub.add_parser("attack", help="exhaustive partition search over intercepted blocks")
    p.add_argument("--blocks", required=True)
    p.add_argument("--n", type=int, required=True, help="block length")
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--beta", type=int, required=True)
    p.add_argument("--px", type=float, required=True)
    p.add_argument("--py", type=float, required=True)
    p.add_argument("--limit", type=int, required=True, help="candidate budget")
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--key", help="key file with the true partition (reports truth_rank)")
    p.add_argument("--out", required=True, help="attack report path (JSON)")
    p.set_defaults(handler=_cmd_attack)

    p = sub.add_parser("simulate", help="run one experiment (defaults reproduce the reference scenario)")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--out", help="report path (JSON)")
    p.add_argument("--csv", help="single-row CSV path")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("sweep", help="run one experiment per value along an axis")
    p.add_argument("--config", help="base experiment config JSON")
    p.add_argument("--axis", required=True, choices=["p_env", "m", "p_x", "p_y", "n_bits"])
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--csv", required=True, help="combined CSV path")
    p.set_defaults(handler=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except UsageError as exc:
        print(json.dumps({"error": "UsageError", "message": str(exc)}), file=sys.stderr)
        return 2
    except (NoiseCipherError, OSError) as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
