"""Matplotlib figures for ledger reports and SLA windows (written to files)."""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402

from .ledger import Ledger  # noqa: E402
from .payloads import PayloadKind  # noqa: E402
from .sla_oracle import SlaSpec, WindowResult  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 100,
}


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def ledger_activity(ledger: Ledger, path: str | Path) -> Path:
    """Stacked bars: transactions per block, split by payload kind."""
    counts = [Counter(tx.kind for tx in block.txs) for block in ledger.chain]
    kinds = [k for k in PayloadKind if any(c[k] for c in counts)]
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(6.4, 3.2))
        bottom = [0] * len(counts)
        cmap = plt.get_cmap("tab20")
        for n, kind in enumerate(kinds):
            heights = [c[kind] for c in counts]
            ax.bar(range(len(counts)), heights, bottom=bottom, label=kind.name, color=cmap(n % 20))
            bottom = [b + h for b, h in zip(bottom, heights)]
        ax.set_xlabel("block")
        ax.xaxis.set_major_locator(MaxNLocator(integer=True))
        ax.set_ylabel("transactions")
        ax.yaxis.set_major_locator(MaxNLocator(integer=True))
        ax.set_title(f"ledger activity ({len(ledger.chain)} blocks)")
        if kinds:
            ax.legend(ncol=2, frameon=False)
        fig.tight_layout()
        return _save(fig, Path(path))


def sla_window(result: WindowResult, sla: SlaSpec, path: str | Path) -> Path:
    """Measurement values in a window against the SLA threshold."""
    values = [float(v) for v in result.values]
    t = float(sla.threshold_t)
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(6.4, 3.2))
        below = [(i, v) for i, v in enumerate(values) if v < t]
        above = [(i, v) for i, v in enumerate(values) if not v < t]
        if below:
            ax.scatter(*zip(*below), s=6, color="tab:blue", label="below threshold")
        if above:
            ax.scatter(*zip(*above), s=6, color="tab:red", label="at/above threshold")
        ax.axhline(t, color="k", lw=0.8, ls="--", label=f"threshold {sla.threshold_t}")
        achieved = "n/a" if result.total == 0 else f"{float(result.achieved_fraction):.4f}"
        ax.set_title(f"{sla.metric}: window {result.start}..{result.end}, "
                     f"achieved {achieved} vs required {float(sla.required_fraction):.4f}")
        ax.set_xlabel("measurement")
        ax.xaxis.set_major_locator(MaxNLocator(integer=True))
        ax.set_ylabel(sla.metric)
        ax.legend(frameon=False)
        fig.tight_layout()
        return _save(fig, Path(path))
