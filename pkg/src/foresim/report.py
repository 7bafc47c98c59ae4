"""Comparison figures for the report path.

Renders baseline-vs-intervened time series (ego speed, effective
acceleration, front gap) to PNG files next to the delimited output. Uses
the Agg backend so the CLI works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  backend must be set first

_SERIES = (
    ("speed", "ego speed [m/s]", lambda row: row.scene.ego.v),
    ("accel", "ego accel [m/s^2]", lambda row: row.a_eff),
    ("front_gap", "front gap [m]", lambda row: row.front_gap),
)


def _finite(values):
    return [v if v < 1e308 else float("nan") for v in values]


def render_figures(report: dict, out_dir: Path) -> list[Path]:
    """Write one PNG per tracked series; return the created paths."""
    base_loop, int_loop = report["_loops"]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = report["scenario"]
    paths = []
    for key, label, getter in _SERIES:
        fig, ax = plt.subplots(figsize=(8, 4))
        for loop, style, tag in ((base_loop, "C0-", "baseline"),
                                 (int_loop, "C1--", "intervened")):
            times = [row.time for row in loop.rows]
            ax.plot(times, _finite([getter(row) for row in loop.rows]),
                    style, label=tag)
        ax.set_xlabel("time [s]")
        ax.set_ylabel(label)
        ax.set_title(f"{name}: {key}")
        ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = out_dir / f"{name}_{key}.png"
        fig.savefig(path, dpi=100)
        plt.close(fig)
        paths.append(path)
    return paths
