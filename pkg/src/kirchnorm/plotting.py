"""PNG figures written next to the CSV scans (headless Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 120,
    "font.size": 9,
    "axes.labelsize": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
    "lines.linewidth": 1.3,
    "savefig.bbox": "tight",
}


def _save(fig, path: Path) -> Path:
    fig.savefig(path)
    plt.close(fig)
    return Path(path)


def plot_field(path, u, title: str = "") -> Path:
    """Line plot in 1D, image in 2D, mid-plane slice in 3D."""
    grid = u.grid
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if grid.dim == 1:
            ax.plot(grid.axis, u.samples)
            ax.set_xlabel("x")
            ax.set_ylabel("u")
        else:
            img = u.samples if grid.dim == 2 else u.samples[:, :, grid.points_per_dim // 2]
            ext = (grid.axis[0], grid.axis[-1], grid.axis[0], grid.axis[-1])
            im = ax.imshow(img.T, origin="lower", extent=ext, cmap="viridis")
            fig.colorbar(im, ax=ax, label="u")
            ax.set_xlabel("x1")
            ax.set_ylabel("x2")
            ax.grid(False)
        ax.set_title(title)
        return _save(fig, path)


def _mark(ax, meta, keys):
    for key in keys:
        val = meta.get(key)
        if isinstance(val, (int, float)) and np.isfinite(val) and val > 0:
            ax.axvline(val, ls=":", lw=0.8, color="0.4")
            ax.annotate(key, (val, 1.0), xycoords=("data", "axes fraction"), fontsize=7,
                        ha="left", va="top")


def plot_scan(path, kind: str, data: dict, meta: dict | None = None, title: str = "") -> Path:
    meta = meta or {}
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if kind == "phi_scan":
            t = np.asarray(data["t"])
            ax.plot(t, data["phi"], label="phi")
            ax.plot(t, data["psi"], ls="--", label="psi")
            ax.axhline(0.0, color="k", lw=0.6)
            ax.set_xscale("log")
            ax.set_xlabel("t = ||grad u||")
            phi = np.asarray(data["phi"])
            span = max(np.max(np.abs(phi[np.isfinite(phi)])), 1e-12)
            ax.set_ylim(-1.2 * span, 1.2 * span)
            _mark(ax, meta, ("t1", "r1", "t2", "r2"))
            ax.legend()
        elif kind in ("fiber_curve", "path"):
            ax.plot(data["t"], data["energy"], marker="o" if kind == "path" else None, ms=3)
            ax.set_xscale("log")
            ax.set_xlabel("dilation t")
            ax.set_ylabel("I(t * u)")
            if "m_c" in meta:
                ax.axhline(meta["m_c"], ls="--", color="C3", lw=0.8, label="m_c")
                ax.legend()
        elif kind == "lattice":
            y = np.stack([np.asarray(data[k]) for k in ("y1", "y2", "y3")], axis=1)
            signed = meta.get("dim", 1) == 1
            r = y[:, 0] if signed else np.linalg.norm(y, axis=1)
            sc = ax.scatter(r, data["s"], c=data["energy"], s=8, cmap="magma")
            fig.colorbar(sc, ax=ax, label="energy")
            ax.set_xlabel("y" if signed else "|y|")
            ax.set_ylabel("s")
        elif kind == "profile":
            ax.plot(data["x"], data["u"])
            ax.set_xlabel("x")
        else:
            plt.close(fig)
            raise ValueError(f"no figure for scan kind {kind!r}")
        ax.set_title(title)
        return _save(fig, path)
