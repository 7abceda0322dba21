"""Figures written next to the JSON/TSV reports of search and campaign runs."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STATUS_COLORS = {"SAT": "#1b7837", "UNSAT": "#b2182b", "UNKNOWN": "#878787"}

_RC = {
    "figure.figsize": (7.0, 4.0),
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
    "savefig.bbox": "tight",
}


def plot_search(events: Sequence[dict], path: str | Path,
                window: tuple[int, int] | None = None) -> Path:
    """mu of every evaluated point in search order, record points highlighted."""
    path = Path(path)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        xs_ok = [i for i, e in enumerate(events) if e["status"] == "usable"]
        xs_bad = [i for i, e in enumerate(events) if e["status"] != "usable"]
        ax.scatter(xs_ok, [events[i]["mu"] for i in xs_ok], s=6, c="#4393c3", label="scored")
        if xs_bad:
            ax.scatter(xs_bad, [events[i]["mu"] or 0 for i in xs_bad], s=8, marker="x",
                       c="#d6604d", label="screened out")
        rec = [(i, e["mu"]) for i, e in enumerate(events) if e.get("record")]
        if rec:
            ax.step([i for i, _ in rec] + [max(len(events) - 1, rec[-1][0])],
                    [m for _, m in rec] + [rec[-1][1]], where="post", c="k", lw=1, label="best so far")
        if window:
            ax.axhspan(window[0], window[1], color="#fee08b", alpha=0.35, lw=0, label="shortlist window")
        ax.set_xlabel("evaluation")
        ax.set_ylabel("input bits fixed by UP")
        ax.legend(loc="lower right", frameon=False)
        fig.savefig(path)
        plt.close(fig)
    return path


def plot_campaign(results: Sequence[dict], path: str | Path, title: str = "") -> Path:
    """Solve-time histogram split by verdict, plus verdict shares."""
    path = Path(path)
    with plt.rc_context(_RC):
        fig, (ax_t, ax_c) = plt.subplots(1, 2, gridspec_kw={"width_ratios": [3, 1]})
        times = {s: [r["wall_time"] for r in results if r["verdict"] == s] for s in STATUS_COLORS}
        nonempty = [s for s in STATUS_COLORS if times[s]]
        if nonempty:
            ax_t.hist([times[s] for s in nonempty], bins=20, stacked=True,
                      color=[STATUS_COLORS[s] for s in nonempty], label=nonempty)
            ax_t.legend(frameon=False)
        ax_t.set_xlabel("solve time (s)")
        ax_t.set_ylabel("instances")
        n = max(1, len(results))
        ax_c.bar(list(STATUS_COLORS), [100 * len(times[s]) / n for s in STATUS_COLORS],
                 color=list(STATUS_COLORS.values()))
        ax_c.set_ylabel("% of instances")
        ax_c.set_ylim(0, 100)
        if title:
            fig.suptitle(title)
        fig.savefig(path)
        plt.close(fig)
    return path
