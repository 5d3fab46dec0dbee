"""
Configuration settings for the detection-and-decoding bounds toolkit.
"""

import os
from dataclasses import dataclass, replace
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


@dataclass(frozen=True)
class MonteCarloConfig:
    """Sampling budget and estimator knobs shared by every bound evaluation."""

    samples: int = 1_000_000
    seed: int = 2019
    confidence_level: float = 0.99
    min_effective_samples: float = 10.0
    moderate_tail_factor: float = 10.0
    threads: int = 1
    prune_np_scan: bool = False

    def __post_init__(self):
        if self.samples <= 0:
            raise ValueError(f"samples must be positive, got {self.samples}")
        if not 0.0 < self.confidence_level < 1.0:
            raise ValueError(f"confidence_level must lie in (0,1), got {self.confidence_level}")
        if self.threads <= 0:
            raise ValueError(f"threads must be positive, got {self.threads}")

    def with_seed(self, seed: int) -> "MonteCarloConfig":
        return replace(self, seed=int(seed))

    def with_threads(self, threads: int) -> "MonteCarloConfig":
        return replace(self, threads=int(threads))


class Settings:
    """Process-level defaults for the bounds toolkit."""

    def __init__(self):
        # Output directory override (the only value taken from the environment)
        self.output_dir: str = os.getenv("BOUNDS_OUTPUT_DIR", "")

        # Monte-Carlo defaults
        self.default_samples: int = 1_000_000
        self.default_seed: int = 2019
        self.confidence_level: float = 0.99
        self.min_effective_samples: float = 10.0
        self.moderate_tail_factor: float = 10.0
        self.threads: int = 1

        # Sampling engine
        self.chunk_elements: int = 2 ** 22
        self.sample_cache_size: int = 16
        self.quadrature_order: int = 120

        # Paths
        self.results_path: str = "./results"
        self.log_file: str = ""

    def validate(self) -> bool:
        """Validate configuration settings."""
        if self.default_samples <= 0:
            return False
        if self.confidence_level <= 0 or self.confidence_level >= 1:
            return False
        if self.chunk_elements <= 0:
            return False
        if self.threads <= 0:
            return False
        return True

    def get_mc_config(self) -> MonteCarloConfig:
        """Get the default Monte-Carlo configuration."""
        return MonteCarloConfig(
            samples=self.default_samples,
            seed=self.default_seed,
            confidence_level=self.confidence_level,
            min_effective_samples=self.min_effective_samples,
            moderate_tail_factor=self.moderate_tail_factor,
            threads=self.threads,
        )

    def resolve_output(self, path: str) -> str:
        """Apply the BOUNDS_OUTPUT_DIR override to an output path."""
        if self.output_dir:
            return os.path.join(self.output_dir, os.path.basename(path))
        return path


# Global settings instance
settings = Settings()
