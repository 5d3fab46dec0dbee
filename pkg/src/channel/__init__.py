"""
Binary-input AWGN channel model and LLR samplers.
"""

from .biawgn import (
    ChannelSpec,
    Measure,
    Statistic,
    clear_sample_cache,
    draw_inputs,
    llr_i,
    llr_j,
    llr_r,
    mutual_information,
    sample_llr,
)

__all__ = [
    "ChannelSpec",
    "Measure",
    "Statistic",
    "clear_sample_cache",
    "draw_inputs",
    "llr_i",
    "llr_j",
    "llr_r",
    "mutual_information",
    "sample_llr",
]
