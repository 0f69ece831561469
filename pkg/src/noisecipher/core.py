"""Core domain types for the noise-keyed cipher.

The shared secret is a partition of block positions into three classes:
``alpha`` and ``beta`` (equal-sized, the information carriers) and ``gamma``
(decoys). A transmitted block is a vector of binary error indicators; the
flip rate applied to each class depends on the bit being sent, so the two
bit values differ only in which class got the low rate. This module holds
those types, their validation, secret generation, and the combinatorics of
the attacker's candidate space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, InvalidParams

# Anything numpy.random.default_rng accepts as a seed.
Seed = int | np.random.SeedSequence


def derive_seed(seed: Seed, index: int) -> np.random.SeedSequence:
    """Deterministic child seed for row/trial ``index`` of a seeded stream.

    Pure function of its inputs: unlike ``SeedSequence.spawn`` it keeps no
    counter state, so repeated calls always yield the same child.
    """
    if isinstance(seed, np.random.SeedSequence):
        entropy = seed.entropy
        spawn_key = tuple(seed.spawn_key) + (index,)
    else:
        entropy = seed
        spawn_key = (index,)
    return np.random.SeedSequence(entropy=entropy, spawn_key=spawn_key)


@dataclass(frozen=True)
class NoiseParams:
    """The two intentional flip rates and their mean.

    ``p_x`` is the low rate, ``p_y`` the high rate. ``p_z`` is pinned to
    their arithmetic mean: it is both the rate applied to decoy positions
    and the marginal flip rate of every position once key bits are
    balanced, which is what makes traffic featureless to an observer.
    """

    p_x: float
    p_y: float
    p_z: float

    def __post_init__(self):
        for name in ("p_x", "p_y", "p_z"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and 0.0 <= v <= 1.0):
                raise InvalidParams(f"{name} must be a probability in [0, 1], got {v!r}")
        if not self.p_x < self.p_y:
            raise InvalidParams(
                f"need p_x < p_y for the bit values to be distinguishable, "
                f"got p_x={self.p_x}, p_y={self.p_y}"
            )
        mean = (self.p_x + self.p_y) / 2.0
        if abs(self.p_z - mean) > math.ulp(mean):
            raise InvalidParams(f"p_z must equal (p_x + p_y)/2 = {mean}, got {self.p_z}")


def new_noise_params(p_x: float, p_y: float) -> NoiseParams:
    """Build NoiseParams with ``p_z`` computed as the arithmetic mean."""
    if not (isinstance(p_x, (int, float)) and isinstance(p_y, (int, float))):
        raise InvalidParams("p_x and p_y must be numbers")
    if not (0.0 <= p_x <= 1.0 and 0.0 <= p_y <= 1.0):
        raise InvalidParams(f"rates must lie in [0, 1], got ({p_x}, {p_y})")
    return NoiseParams(p_x=float(p_x), p_y=float(p_y), p_z=(float(p_x) + float(p_y)) / 2.0)


@dataclass(frozen=True)
class Partition:
    """The shared secret: disjoint alpha/beta/gamma position sets over a block.

    Positions are stored as ascending tuples. ``alpha`` and ``beta`` must be
    the same size (at least 1 each); ``gamma`` may be empty (the basic
    scheme) or non-empty (the extended scheme with decoy positions).
    """

    n: int
    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    gamma: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(sorted(int(i) for i in self.alpha)))
        object.__setattr__(self, "beta", tuple(sorted(int(i) for i in self.beta)))
        object.__setattr__(self, "gamma", tuple(sorted(int(i) for i in self.gamma)))
        if len(self.alpha) != len(self.beta) or len(self.alpha) < 1:
            raise InvalidParams(
                f"alpha and beta must be equal-sized and non-empty, "
                f"got {len(self.alpha)} and {len(self.beta)}"
            )
        combined = self.alpha + self.beta + self.gamma
        if len(set(combined)) != len(combined):
            raise InvalidParams("alpha, beta and gamma must be pairwise disjoint")
        if sorted(combined) != list(range(self.n)):
            raise InvalidParams(f"classes must cover exactly the positions 0..{self.n - 1}")

    @property
    def n_alpha(self) -> int:
        return len(self.alpha)

    @property
    def n_beta(self) -> int:
        return len(self.beta)

    @property
    def n_gamma(self) -> int:
        return len(self.gamma)

    def mirrored(self) -> Partition:
        """The partition with the alpha and beta labels swapped.

        Statistically indistinguishable from the original to an attacker
        without known plaintext; attacks recover a partition only up to
        this relabeling.
        """
        return Partition(n=self.n, alpha=self.beta, beta=self.alpha, gamma=self.gamma)


def generate_partition(n_alpha: int, n_beta: int, n_gamma: int, seed: Seed) -> Partition:
    """Draw a uniformly random interleaving of the three classes.

    The class assignment is a pure function of ``seed``: the positions
    0..n-1 are permuted uniformly and the first ``n_alpha`` go to alpha,
    the next ``n_beta`` to beta, the rest to gamma.
    """
    for name, v in (("n_alpha", n_alpha), ("n_beta", n_beta), ("n_gamma", n_gamma)):
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 0:
            raise InvalidParams(f"{name} must be a non-negative integer, got {v!r}")
    if n_alpha != n_beta or n_alpha < 1:
        raise InvalidParams(
            f"need n_alpha == n_beta >= 1, got n_alpha={n_alpha}, n_beta={n_beta}"
        )
    n = int(n_alpha) + int(n_beta) + int(n_gamma)
    order = np.random.default_rng(seed).permutation(n)
    return Partition(
        n=n,
        alpha=tuple(int(i) for i in order[:n_alpha]),
        beta=tuple(int(i) for i in order[n_alpha : n_alpha + n_beta]),
        gamma=tuple(int(i) for i in order[n_alpha + n_beta :]),
    )


@dataclass(eq=False)
class Block:
    """One transmitted block: a vector of per-position binary error indicators.

    Indicator 1 means the position was flipped relative to the base symbol.
    The array is copied and frozen on construction, so blocks are safe to
    share across threads.
    """

    errors: np.ndarray

    def __post_init__(self):
        arr = np.array(self.errors, dtype=np.uint8, copy=True)
        if arr.ndim != 1:
            raise InvalidParams(f"block indicators must be one-dimensional, got shape {arr.shape}")
        if arr.size and arr.max() > 1:
            raise InvalidParams("block indicators must be 0 or 1")
        arr.setflags(write=False)
        self.errors = arr

    def __len__(self) -> int:
        return self.errors.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Block):
            return NotImplemented
        return len(self) == len(other) and bool(np.array_equal(self.errors, other.errors))


@dataclass
class KeyMatrix:
    """An ordered sequence of blocks, one per transmitted bit.

    ``truth`` carries the plaintext bits in simulation and test contexts
    only; it is never part of what an adversary observes.
    """

    blocks: list[Block]
    truth: list[int] | None = None

    def __post_init__(self):
        if self.truth is not None:
            if len(self.truth) != len(self.blocks):
                raise InvalidParams(
                    f"truth length {len(self.truth)} != block count {len(self.blocks)}"
                )
            if any(b not in (0, 1) for b in self.truth):
                raise InvalidParams("truth bits must be 0 or 1")
            self.truth = [int(b) for b in self.truth]

    def __len__(self) -> int:
        return len(self.blocks)


def partition_count(n: int, n_alpha: int, n_beta: int) -> int:
    """Exact number of ordered (alpha, beta) assignments over ``n`` positions.

    C(n, n_alpha) * C(n - n_alpha, n_beta), as an arbitrary-precision
    integer. This is the attacker's candidate space; gamma is whatever is
    left over, so it adds no further factor.
    """
    for name, v in (("n", n), ("n_alpha", n_alpha), ("n_beta", n_beta)):
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 0:
            raise InvalidParams(f"{name} must be a non-negative integer, got {v!r}")
    if n_alpha + n_beta > n:
        raise InvalidParams(f"n_alpha + n_beta = {n_alpha + n_beta} exceeds n = {n}")
    return math.comb(int(n), int(n_alpha)) * math.comb(int(n) - int(n_alpha), int(n_beta))


def partition_count_log2(n: int, n_alpha: int, n_beta: int) -> float:
    """Base-2 logarithm of :func:`partition_count` (exact integer under the log)."""
    return math.log2(partition_count(n, n_alpha, n_beta))


# --- key file (the unit of key exchange between the encode and decode CLIs) ---

_KEY_FIELDS = ("n", "alpha", "beta", "gamma", "p_x", "p_y")


def write_key_file(path, partition: Partition, params: NoiseParams) -> None:
    """Write the shared secret as a JSON document with sorted position arrays."""
    doc = {
        "n": partition.n,
        "alpha": list(partition.alpha),
        "beta": list(partition.beta),
        "gamma": list(partition.gamma),
        "p_x": params.p_x,
        "p_y": params.p_y,
    }
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def read_key_file(path) -> tuple[Partition, NoiseParams]:
    """Read and fully re-validate a key file written by :func:`write_key_file`."""
    with open(path, "r", encoding="ascii") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"key file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or set(doc) != set(_KEY_FIELDS):
        raise FormatError(f"key file must contain exactly the fields {list(_KEY_FIELDS)}")
    try:
        partition = Partition(
            n=int(doc["n"]), alpha=doc["alpha"], beta=doc["beta"], gamma=doc["gamma"]
        )
        params = new_noise_params(doc["p_x"], doc["p_y"])
    except (TypeError, ValueError) as exc:
        raise FormatError(f"malformed key file {path}: {exc}") from exc
    return partition, params
