"""Figures rendered from scenario artifacts (matplotlib, Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import io as aio  # noqa: E402


def _save(fig, out: Path, name: str) -> str:
    fig.tight_layout()
    fig.savefig(out / name, dpi=110)
    plt.close(fig)
    return name


def _evolve(cfg, out: Path) -> list[str]:
    figs = []
    wave = aio.read_csv(out / "wave.csv")
    if "y" not in wave:
        fig, ax = plt.subplots(figsize=(6, 4))
        for t in np.unique(wave["t"]):
            sel = wave["t"] == t
            ax.plot(wave["x"][sel], wave["rho"][sel], lw=1, label=f"t={t:g}")
        ax.set_xlabel("x")
        ax.set_ylabel("rho")
        ax.legend(fontsize=6, ncol=2)
        figs.append(_save(fig, out, "density.png"))
    if (out / "residuals.csv").exists():
        res = aio.read_csv(out / "residuals.csv")
        fig, ax = plt.subplots(figsize=(6, 4))
        for lv in np.unique(res["level"]):
            sel = res["level"] == lv
            n = int(res["n"][sel][0])
            ax.semilogy(res["t"][sel], res["hj_l2"][sel], "-", label=f"HJ n={n}")
            ax.semilogy(res["t"][sel], res["continuity_l2"][sel], "--", label=f"continuity n={n}")
        ax.set_xlabel("t")
        ax.set_ylabel("L2 residual")
        ax.legend(fontsize=7)
        figs.append(_save(fig, out, "residuals.png"))
    return figs


def _trajectories(cfg, out: Path) -> list[str]:
    tab = aio.read_csv(out / "trajectories.csv")
    fig, ax = plt.subplots(figsize=(6, 4))
    for s in np.unique(tab["seed_index"]):
        sel = tab["seed_index"] == s
        ax.plot(tab["t"][sel], tab["x"][sel], lw=0.8, color="C0")
    ax.set_xlabel("t")
    ax.set_ylabel("x")
    return [_save(fig, out, "trajectories.png")]


def _vortex(cfg, out: Path) -> list[str]:
    figs = []
    if (out / "profile.csv").exists():
        prof = aio.read_csv(out / "profile.csv")
        fig, (a1, a2) = plt.subplots(1, 2, figsize=(9, 4))
        for t in np.unique(prof["t"]):
            sel = prof["t"] == t
            a1.plot(prof["r_over_sigma"][sel], prof["omega"][sel], lw=1, label=f"t={t:.3g}")
            a2.plot(prof["r_over_sigma"][sel], prof["v"][sel], lw=1)
        for ax, lab in ((a1, "omega"), (a2, "v")):
            ax.set_xlim(0, 8)
            ax.set_xlabel("r / sigma")
            ax.set_ylabel(lab)
        a1.legend(fontsize=6)
        figs.append(_save(fig, out, "profile.png"))
    if (out / "ensemble.csv").exists():
        ens = aio.read_csv(out / "ensemble.csv")
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(ens["r_over_sigma"], ens["mean_omega"], label="average")
        ax.fill_between(ens["r_over_sigma"], ens["mean_omega"] - 3 * ens["stderr"],
                        ens["mean_omega"] + 3 * ens["stderr"], alpha=0.3)
        ax.set_xlim(0, 8)
        ax.set_xlabel("r / sigma")
        ax.set_ylabel("mean omega")
        figs.append(_save(fig, out, "ensemble.png"))
    return figs


def _torus(cfg, out: Path) -> list[str]:
    figs = []
    p = cfg.params
    if p["b_list"]:
        k = len(p["b_list"])
        fig, axes = plt.subplots(1, k, figsize=(2.6 * k, 2.8), squeeze=False)
        for i, (ax, b) in enumerate(zip(axes[0], p["b_list"])):
            m = aio.read_csv(out / f"mesh_{i:02d}_b{b:g}.csv")
            # medial cut phi = 0 in the (x, z) plane
            sel = m["phi"] == 0.0
            ax.plot(m["x"][sel], m["z"][sel], ".", ms=1)
            ax.plot(-m["x"][sel], m["z"][sel], ".", ms=1, color="C0")
            ax.set_aspect("equal")
            ax.set_title(f"b={b:g}", fontsize=8)
        figs.append(_save(fig, out, "cross_sections.png"))
    dc = out / "double_cover.csv"
    if dc.exists():
        tab = aio.read_csv(dc)
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(np.degrees(tab["tube_angle"] - tab["tube_angle"][0]), tab["dot"])
        ax.set_xlabel("tube angle travelled (deg)")
        ax.set_ylabel("frame . initial frame")
        figs.append(_save(fig, out, "double_cover.png"))
    return figs


def _flow(cfg, out: Path) -> list[str]:
    sf = aio.read_csv(out / "stream_function.csv")
    nx, ny = cfg.params["field_shape"]
    X, Y, P = (sf[k].reshape(nx, ny) for k in ("x", "y", "psi"))
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.contour(X, Y, P, levels=31, linewidths=0.5, colors="0.6")
    lines = aio.read_csv(out / "streamlines.csv")
    for i in np.unique(lines["line_index"]):
        sel = lines["line_index"] == i
        ax.plot(lines["x"][sel], lines["y"][sel], lw=0.9, color="C0")
    st = aio.read_csv(out / "stagnation.csv")
    ax.plot(st["x"], st["y"], "o", color="C3")
    ax.add_patch(plt.Circle((0, 0), cfg.params["cylinder_radius"], color="0.85"))
    ax.set_aspect("equal")
    return [_save(fig, out, "streamlines.png")]


_RENDER = {"evolve": _evolve, "trajectories": _trajectories, "vortex": _vortex, "torus": _torus,
           "flow_scene": _flow}


def render(cfg, out_dir) -> list[str]:
    """Write the figures for a finished run; returns their file names."""
    return _RENDER[cfg.kind](cfg, Path(out_dir))
