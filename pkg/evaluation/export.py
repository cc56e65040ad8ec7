"""
Gradient-histogram statistics file.

Per snapshot: one comma-separated row per bin (`bin_lo,bin_hi,U,A`)
followed by a summary row `# epoch=<e> task=<ate|asc> labels=<N>`.
U counts the labels of the whole epoch; A is the running count at its end.
"""

from pathlib import Path
from typing import Iterable, List

from losses.ghm import HistogramSnapshot
from utils.errors import DataError
from utils.logging import get_logger


logger = get_logger(__name__)


def format_gradient_stats(snapshots: Iterable[HistogramSnapshot]) -> str:
    lines: List[str] = []
    for snap in snapshots:
        m = snap.bins
        for j in range(m):
            lines.append(f"{j / m:.6f},{(j + 1) / m:.6f},{int(snap.counts[j])},{float(snap.ema[j]):.6f}")
        lines.append(f"# epoch={snap.epoch} task={snap.task} labels={snap.n_labels}")
    return "\n".join(lines) + ("\n" if lines else "")


def export_gradient_stats(snapshots: Iterable[HistogramSnapshot], path: Path, append: bool = False) -> Path:
    """Write the snapshots to path; with append, add them after the existing ones."""
    snapshots = list(snapshots)
    if not snapshots:
        raise DataError("no histogram snapshots to export")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a" if append else "w", encoding="utf-8", newline="\n") as f:
            f.write(format_gradient_stats(snapshots))
    except OSError as e:
        raise DataError(f"cannot write gradient statistics to {path}: {e}") from e
    logger.info(f"Wrote {len(snapshots)} histogram snapshots to {path}")
    return path
