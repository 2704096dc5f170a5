"""Figure rendering for sweep results.

Turns the sweep CSV into PNG files next to the delimited data: one
acceptance-ratio plot per core count, the solved-period distance curve,
and the period-vector gap between the adaptive scheme and the fixed
ones.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_STYLE = {
    "hydra_c": dict(color="tab:blue", marker="o"),
    "hydra": dict(color="tab:orange", marker="s"),
    "hydra_tmax": dict(color="tab:green", marker="^"),
    "global_tmax": dict(color="tab:red", marker="v"),
}


def _group_mid(row) -> float:
    return (float(row["u_lo"]) + float(row["u_hi"])) / 2.0 / int(row["cores"])


def render_report(rows: list[dict], outdir) -> list[Path]:
    """Render all figures for parsed sweep rows; returns written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    cores_values = sorted({int(r["cores"]) for r in rows})
    schemes = sorted({r["scheme"] for r in rows})

    for m in cores_values:
        fig, ax = plt.subplots(figsize=(6, 4))
        for scheme in schemes:
            pts = sorted(((_group_mid(r), float(r["acceptance_ratio"]))
                          for r in rows
                          if int(r["cores"]) == m and r["scheme"] == scheme))
            if pts:
                ax.plot([p[0] for p in pts], [p[1] for p in pts],
                        label=scheme, **_STYLE.get(scheme, {}))
        ax.set_xlabel("normalized utilization U/M")
        ax.set_ylabel("acceptance ratio")
        ax.set_title(f"Acceptance ratio, M={m}")
        ax.set_ylim(-0.02, 1.05)
        ax.grid(alpha=0.3)
        ax.legend()
        path = outdir / f"acceptance_ratio_m{m}.png"
        fig.savefig(path, dpi=150, bbox_inches="tight")
        plt.close(fig)
        written.append(path)

    fig, ax = plt.subplots(figsize=(6, 4))
    for m in cores_values:
        pts = sorted(((_group_mid(r), float(r["mean_norm_distance"]))
                      for r in rows
                      if int(r["cores"]) == m and r["scheme"] == "hydra_c"
                      and r["mean_norm_distance"] != ""))
        if pts:
            ax.plot([p[0] for p in pts], [p[1] for p in pts],
                    marker="o", label=f"M={m}")
    ax.set_xlabel("normalized utilization U/M")
    ax.set_ylabel("||T* - Tmax|| / ||Tmax||")
    ax.set_title("Distance between solved and maximum period vectors")
    ax.grid(alpha=0.3)
    ax.legend()
    path = outdir / "period_distance.png"
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    for m in cores_values:
        fig, ax = plt.subplots(figsize=(6, 4))
        any_pts = False
        for scheme in schemes:
            if scheme == "hydra_c":
                continue
            pts = sorted(((_group_mid(r), float(r["mean_norm_distance"]))
                          for r in rows
                          if int(r["cores"]) == m and r["scheme"] == scheme
                          and r["mean_norm_distance"] != ""))
            if pts:
                any_pts = True
                ax.plot([p[0] for p in pts], [p[1] for p in pts],
                        label=f"{scheme} vs hydra_c", **_STYLE.get(scheme, {}))
        if not any_pts:
            plt.close(fig)
            continue
        ax.set_xlabel("normalized utilization U/M")
        ax.set_ylabel("||T_scheme - T*|| / ||Tmax||")
        ax.set_title(f"Period-vector gap to the adaptive scheme, M={m}")
        ax.grid(alpha=0.3)
        ax.legend()
        path = outdir / f"period_gap_m{m}.png"
        fig.savefig(path, dpi=150, bbox_inches="tight")
        plt.close(fig)
        written.append(path)

    return written
