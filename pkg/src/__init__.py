"""
Detection-and-Decoding Bounds - Main Package

Finite-blocklength rate bounds for packets that must be detected as well as
decoded over a binary-input AWGN channel, together with the Monte-Carlo
Neyman-Pearson engine that evaluates them and a brute-force decoder that
checks the achievability guarantees.
"""

__version__ = "1.0.0"
__author__ = "Bounds Toolkit Team"
