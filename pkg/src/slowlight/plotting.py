"""Optional PNG figures written next to the CSV files."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _map(ax, z, tau, data, title):
    im = ax.imshow(
        data,
        origin="lower",
        aspect="auto",
        extent=(tau[0], tau[-1], z[0], z[-1]),
        cmap="viridis",
        interpolation="nearest",
    )
    ax.set_xlabel("t")
    ax.set_ylabel("z")
    ax.set_title(title)
    return im


def render_run(run, out_dir, prefix: str = "", oracle=None) -> list[Path]:
    """Field and spin-wave maps, exit-slice traces and (optionally) the oracle overlay."""
    plt = _pyplot()
    out_dir = Path(out_dir)
    f, a, geo = run.field, run.atoms, run.geo
    written = []

    fig, axes = plt.subplots(1, 3, figsize=(15, 4.2), constrained_layout=True)
    for ax, data, title in zip(
        axes,
        (np.abs(f.psi), np.abs(a.x), np.abs(a.c_big_m)),
        ("|Psi|", "|C_m|", "|C_M|"),
    ):
        fig.colorbar(_map(ax, f.z, f.tau, data, title), ax=ax)
        for t_ev in geo.event_times():
            ax.axvline(t_ev, color="w", lw=0.6, ls="--")
    path = out_dir / f"{prefix}maps.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(8, 4), constrained_layout=True)
    ax.plot(f.tau, np.abs(f.psi[0]), label="z = 0")
    ax.plot(f.tau, np.abs(f.psi[-1]), label=f"z = {f.z[-1]:g}")
    if oracle is not None:
        ax.plot(oracle.tau, np.abs(oracle.psi[-1]), "k--", lw=0.8, label="closed form, exit")
    ax.set_xlabel("t")
    ax.set_ylabel("|Psi|")
    ax.legend()
    path = out_dir / f"{prefix}traces.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written
