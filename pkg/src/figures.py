from typing import IO, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

# fixed id salt so the emitted SVG is byte-stable across runs
matplotlib.rcParams["svg.hashsalt"] = "reachable-sets"


def plot_reachable_boxes(
    out: IO,
    targets: np.ndarray,
    centers: np.ndarray,
    radii: np.ndarray,
    title: Optional[str] = None,
) -> None:
    """Targets as dots, each sample's output box as an outlined rectangle."""
    fig, ax = plt.subplots(figsize=(6, 6), dpi=100)
    for (cx, cy), (rx, ry) in zip(centers, radii):
        ax.add_patch(
            Rectangle((cx - rx, cy - ry), 2 * rx, 2 * ry, fill=False, edgecolor="tab:blue", linewidth=0.6)
        )
    ax.scatter(targets[:, 0], targets[:, 1], s=6, color="black", zorder=3)

    lo = np.minimum((centers - radii).min(axis=0), targets.min(axis=0))
    hi = np.maximum((centers + radii).max(axis=0), targets.max(axis=0))
    pad = 0.05 * np.maximum(hi - lo, 1e-6)
    ax.set_xlim(lo[0] - pad[0], hi[0] + pad[0])
    ax.set_ylim(lo[1] - pad[1], hi[1] + pad[1])
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
