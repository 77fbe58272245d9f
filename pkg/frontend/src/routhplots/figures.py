"""The three figure layouts.

Every kind maps to a fixed figure size and axis policy so identical inputs
render identical images.  Only plotting transforms happen here (polar to
Cartesian for display); all physics numbers come from the CSV.
"""

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import SchemaError, load_table  # noqa: E402

KINDS = ("orbit_pair", "dsp_timeseries", "energy_pair")


@dataclass
class PlotSpec:
    kind: str
    inputs: tuple
    output: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if len(self.inputs) != 1:
            raise SchemaError(f"{self.kind} takes exactly one CSV, "
                              f"got {len(self.inputs)}")


def _orbit_pair(path):
    """Unreduced 3D trajectory (left) and its (r, z) shape curve (right).

    Works on a full satellite trajectory or on a reduced run that carries
    the reconstructed angle column.
    """
    df = load_table(path, ["t", "r", "theta", "z"])
    fig = plt.figure(figsize=(10.0, 4.5))
    ax3 = fig.add_subplot(1, 2, 1, projection="3d")
    x = df["r"] * np.cos(df["theta"])
    y = df["r"] * np.sin(df["theta"])
    ax3.plot(x, y, df["z"], lw=0.6, color="tab:blue")
    ax3.set_box_aspect((1, 1, 1))
    lim = float(max(np.max(np.abs(v)) for v in (x, y, df["z"])))
    for setter in (ax3.set_xlim, ax3.set_ylim, ax3.set_zlim):
        setter(-lim, lim)
    ax3.set_xlabel("x")
    ax3.set_ylabel("y")
    ax3.set_zlabel("z")
    ax3.set_title("trajectory")

    ax = fig.add_subplot(1, 2, 2)
    ax.plot(df["r"], df["z"], lw=0.8, color="tab:blue")
    ax.set_aspect("equal")
    ax.set_xlabel("r")
    ax.set_ylabel("z")
    ax.set_title("shape curve")
    fig.tight_layout()
    return fig


def _dsp_timeseries(path):
    """Shape coordinate histories plus the in-plane trace of the second rod."""
    df = load_table(path, ["t", "r1", "r2", "phi"])
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(8.0, 7.0),
                                      height_ratios=[1.0, 1.4])
    for col, color in (("r1", "tab:blue"), ("r2", "tab:orange"),
                       ("phi", "tab:green")):
        top.plot(df["t"], df[col], lw=0.8, color=color, label=col)
    top.set_xlabel("t")
    top.legend(loc="upper right")
    top.set_title("shape coordinates")

    bottom.plot(df["r2"] * np.cos(df["phi"]), df["r2"] * np.sin(df["phi"]),
                lw=0.6, color="tab:orange")
    bottom.set_aspect("equal")
    bottom.set_xlabel("r2 cos(phi)")
    bottom.set_ylabel("r2 sin(phi)")
    bottom.set_title("second rod relative trace")
    fig.tight_layout()
    return fig


def _energy_pair(path):
    """Paired relative energy-drift panels from a compare report."""
    df = load_table(path, ["t", "drift_a", "drift_b"])
    fig, (left, right) = plt.subplots(1, 2, figsize=(10.0, 4.0))
    left.plot(df["t"], df["drift_a"], lw=0.8, color="tab:blue")
    right.plot(df["t"], df["drift_b"], lw=0.8, color="tab:red")
    for ax, label in ((left, "run a"), (right, "run b")):
        ax.set_xlabel("t")
        ax.set_ylabel("relative energy drift")
        ax.set_title(label)
        ax.ticklabel_format(axis="y", style="sci", scilimits=(-2, 2))
    fig.tight_layout()
    return fig


_RENDERERS = {"orbit_pair": _orbit_pair,
              "dsp_timeseries": _dsp_timeseries,
              "energy_pair": _energy_pair}


def render(spec):
    """Render one PlotSpec to a matplotlib Figure (caller saves/closes)."""
    return _RENDERERS[spec.kind](spec.inputs[0])


def save(fig, path):
    fig.savefig(path, dpi=150)
    plt.close(fig)
