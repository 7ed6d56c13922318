"""Run-directory reporting: per-cycle curve plots and cross-mode comparison.

Reports are derived entirely from the persisted checkpoint, so they can be
regenerated at any time without re-training. Each optimization cycle gets one
accuracy and one loss figure with the training and validation series; when
several run directories are compared, a per-cycle best-objective table and
total wall-clock per mode come out as CSV and formatted text.
"""
from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .controller import Checkpoint, load_checkpoint

log = logging.getLogger(__name__)

_TRAIN_COLOR = "tab:orange"
_VAL_COLOR = "tab:blue"


def is_run_dir(path) -> bool:
    return (Path(path) / "checkpoint.json").is_file()


def _plot_series(ax, epochs, train, val, ylabel):
    ax.plot(epochs, train, color=_TRAIN_COLOR, label="training")
    ax.plot(epochs, val, color=_VAL_COLOR, label="validation")
    ax.set_xlabel("epoch")
    ax.set_ylabel(ylabel)
    ax.legend()


def plot_cycles(ckpt: Checkpoint, out_dir) -> list[Path]:
    """One accuracy and one loss image per optimization cycle (cycle >= 1)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for record in ckpt.records:
        if record.cycle == 0 or record.history is None:
            continue
        h = record.history
        epochs = range(h.epochs)
        for metric, train, val in (
            ("accuracy", h.train_acc, h.val_acc),
            ("loss", h.train_loss, h.val_loss),
        ):
            fig, ax = plt.subplots(figsize=(6, 3))
            _plot_series(ax, epochs, train, val, metric)
            ax.set_title(f"cycle {record.cycle}: {metric}")
            fig.tight_layout()
            path = out / f"cycle_{record.cycle:02d}_{metric}.png"
            fig.savefig(path, dpi=100)
            plt.close(fig)
            written.append(path)
    return written


def best_per_cycle(ckpt: Checkpoint) -> list[float]:
    best = []
    for record in ckpt.records:
        prev = best[-1] if best else record.objective
        best.append(min(prev, record.objective))
    return best


def comparison_table(checkpoints: dict[str, Checkpoint]) -> tuple[list[str], list[list]]:
    """Rows of (cycle, best-so-far per mode); short runs pad with blanks."""
    names = sorted(checkpoints)
    columns = {name: best_per_cycle(checkpoints[name]) for name in names}
    n_rows = max(len(c) for c in columns.values())
    rows = []
    for cycle in range(n_rows):
        row = [cycle]
        for name in names:
            col = columns[name]
            row.append(col[cycle] if cycle < len(col) else "")
        rows.append(row)
    return ["cycle"] + names, rows


def write_comparison(checkpoints: dict[str, Checkpoint], out_dir) -> tuple[Path, Path]:
    header, rows = comparison_table(checkpoints)
    out = Path(out_dir)
    csv_path = out / "comparison.csv"
    csv_path.write_text(
        "\n".join([",".join(header)] + [",".join(str(v) for v in row) for row in rows]) + "\n"
    )

    widths = [max(len(str(h)), 12) for h in header]
    lines = ["  ".join(str(h).ljust(w) for h, w in zip(header, widths))]
    for row in rows:
        cells = [
            f"{v:.6f}".ljust(w) if isinstance(v, float) else str(v).ljust(w)
            for v, w in zip(row, widths)
        ]
        lines.append("  ".join(cells))
    lines.append("")
    for name in sorted(checkpoints):
        total = sum(r.wall_clock_s for r in checkpoints[name].records)
        lines.append(f"total wall clock [{name}]: {total:.2f} s")
    text_path = out / "comparison.txt"
    text_path.write_text("\n".join(lines) + "\n")
    return csv_path, text_path


def report_directory(directory) -> list[Path]:
    """Report a single run dir, or every run dir directly under a parent."""
    root = Path(directory)
    if is_run_dir(root):
        runs = {root.name or "run": root}
    else:
        runs = {p.name: p for p in sorted(root.iterdir()) if p.is_dir() and is_run_dir(p)}
    if not runs:
        raise FileNotFoundError(f"no run artifacts under {root}")

    written = []
    checkpoints = {}
    for name, run_dir in runs.items():
        ckpt = load_checkpoint(run_dir / "checkpoint.json")
        checkpoints[name] = ckpt
        written.extend(plot_cycles(ckpt, run_dir / "plots"))
    csv_path, text_path = write_comparison(checkpoints, root)
    written.extend([csv_path, text_path])
    print(text_path.read_text(), end="")
    return written
