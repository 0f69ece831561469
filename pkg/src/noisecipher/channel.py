"""Environmental noise as an independent binary symmetric channel.

The channel flips each transmitted position with a fixed probability
``p_env``, on top of the cipher's intentional noise. Two independent flip
stages compose in closed form, which lets the decoder run on effective
post-channel rates instead of modeling the channel explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Block, NoiseParams, Seed, derive_seed, new_noise_params
from .errors import InvalidParams


@dataclass(frozen=True)
class ChannelModel:
    """A BSC with per-position flip probability ``p_env`` in [0, 0.5).

    At 0.5 the channel output is independent of its input and no scheme can
    survive it, so that value is rejected outright.
    """

    p_env: float

    def __post_init__(self):
        if not (isinstance(self.p_env, (int, float)) and 0.0 <= self.p_env < 0.5):
            raise InvalidParams(f"p_env must lie in [0, 0.5), got {self.p_env!r}")


def apply_channel(block: Block, channel: ChannelModel, seed: Seed) -> Block:
    """Flip each indicator independently with probability ``p_env``."""
    rng = np.random.default_rng(seed)
    flips = (rng.random(len(block)) < channel.p_env).astype(np.uint8)
    return Block(block.errors ^ flips)


def apply_channel_sequence(blocks, channel: ChannelModel, seed: Seed) -> list[Block]:
    """Apply the channel to each block with the per-row child seed ``derive_seed(seed, i)``."""
    return [apply_channel(blk, channel, derive_seed(seed, i)) for i, blk in enumerate(blocks)]


def compose_flip_prob(p: float, e: float) -> float:
    """Probability that exactly one of two independent flips occurs: p + e - 2pe."""
    if not (0.0 <= p <= 1.0 and 0.0 <= e <= 1.0):
        raise InvalidParams(f"flip probabilities must lie in [0, 1], got ({p}, {e})")
    return p + e - 2.0 * p * e

def effective_params(params: NoiseParams, channel: ChannelModel) -> NoiseParams:
    """The post-channel rates the decoder should use.

    Each intentional rate is pushed through the BSC cascade; the mean is
    linear under that map, so the resulting p_z equals the cascaded p_z.
    """
    p_x = compose_flip_prob(params.p_x, channel.p_env)
    p_y = compose_flip_prob(params.p_y, channel.p_env)
    if p_x >= p_y:
        raise InvalidParams(
            f"channel at p_env={channel.p_env} destroys the rate gap "
            f"(composed rates {p_x} and {p_y})"
        )
    out = new_noise_params(p_x, p_y)
    assert math.isclose(
        out.p_z, compose_flip_prob(params.p_z, channel.p_env), rel_tol=1e-12, abs_tol=1e-15
    )
    return out
