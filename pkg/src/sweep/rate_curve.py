"""
Rate curves: tables of bound values over SNR, blocklength and bound kind.
"""

import logging
from typing import Iterable, List, Optional

import pandas as pd

from src.bounds.results import BoundResult
from src.utils.errors import OutputError
from src.utils.helpers import ensure_parent

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

COLUMNS = ["snr_db", "n", "bound_kind", "rate", "log2M", "ci_low", "ci_high",
           "p_star", "n_p_star", "flags"]


class RateCurve:
    """
    Rows of (snr_db, n, bound_kind, rate, log2M, ci_low, ci_high, p_star,
    n_p_star, flags). The ci columns are in bits per channel use, like rate.
    """

    def __init__(self, rows: Optional[Iterable[dict]] = None):
        self.rows: List[dict] = list(rows or [])

    def __len__(self) -> int:
        return len(self.rows)

    def add(self, snr_db: float, result: BoundResult, p_star: Optional[float] = None,
            n_p_star: Optional[int] = None):
        """Append one bound evaluation."""
        n = result.n
        self.rows.append({
            "snr_db": float(snr_db),
            "n": int(n),
            "bound_kind": result.bound_kind.value,
            "rate": result.rate,
            "log2M": result.log2m,
            "ci_low": result.ci_low / n,
            "ci_high": result.ci_high / n,
            "p_star": p_star if p_star is not None else result.params.get("p"),
            "n_p_star": n_p_star,
            "flags": result.flag_string(),
        })

    def to_frame(self) -> pd.DataFrame:
        """Rows sorted by (snr_db, bound_kind, n)."""
        frame = pd.DataFrame(self.rows, columns=COLUMNS)
        frame["n_p_star"] = frame["n_p_star"].astype("Int64")
        return frame.sort_values(["snr_db", "bound_kind", "n"], kind="mergesort").reset_index(drop=True)

    def write_csv(self, path: str) -> str:
        """Write the curve with a versioned header comment line."""
        target = ensure_parent(path)
        try:
            with open(target, "w", encoding="utf-8", newline="") as f:
                f.write(f"# rate-curve schema v{SCHEMA_VERSION}\n")
                self.to_frame().to_csv(f, index=False, float_format="%.10g", lineterminator="\n")
        except OSError as e:
            logger.error(f"Error saving rate curve: {e}")
            raise OutputError(f"cannot write {path}: {e}") from e
        logger.info(f"Saved {len(self.rows)} rows to {target}")
        return str(target)

    @classmethod
    def read_csv(cls, path: str) -> pd.DataFrame:
        """Load a rate curve written by write_csv."""
        return pd.read_csv(path, comment="#", dtype={"n_p_star": "Int64"})
