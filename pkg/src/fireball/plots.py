"""Figure rendering for explosion reports.

matplotlib is imported lazily and pointed at the file-only Agg backend so
the library works headless and without matplotlib unless a figure is
actually requested.
"""

from __future__ import annotations

_METRICS = ("ram_cost", "state_size", "decoded_size_or_flag")
_TITLES = {
    "ram_cost": "machine work (ram cost)",
    "state_size": "final state footprint (nodes)",
    "decoded_size_or_flag": "decoded normal form size",
}


def render_explosion_figure(rows: list[dict], path: str) -> str:
    """Plot the per-machine growth curves of an explosion report and write
    them to path (format taken from the extension).  Returns path.  Cells
    holding flags instead of numbers are skipped point-wise."""
    if not rows:
        raise ValueError("no rows to plot")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    family = rows[0]["family"]
    machines = sorted({row["machine"] for row in rows})
    fig, axes = plt.subplots(1, len(_METRICS), figsize=(4 * len(_METRICS), 3.4))
    for ax, metric in zip(axes, _METRICS):
        for machine in machines:
            points = [
                (row["n"], row[metric])
                for row in rows
                if row["machine"] == machine and isinstance(row[metric], int)
            ]
            if points:
                xs, ys = zip(*points)
                ax.plot(xs, ys, marker="o", markersize=3, label=machine)
        ax.set_title(_TITLES[metric], fontsize=10)
        ax.set_xlabel("n")
        ax.set_yscale("log")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=8)
    fig.suptitle(f"family {family!r}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
