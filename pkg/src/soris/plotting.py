"""Rendering of the replication tables to figure files."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

FIG_STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 150,
    "axes.grid": True,
    "grid.linestyle": "--",
    "grid.alpha": 0.5,
    "font.size": 10,
    "legend.fontsize": 9,
}


def _downlink(rows):
    return [r for r in rows if r.get("link", "downlink") == "downlink"]


def _series(rows, key):
    seen = []
    for r in rows:
        if r[key] not in seen:
            seen.append(r[key])
    return seen


def render_figure(figure_id, header, rows, out_path):
    """Line/bar rendering of one replication table; returns the file path."""
    with plt.rc_context(FIG_STYLE):
        fig, ax = plt.subplots()
        if figure_id in ("fig5", "fig6", "fig8", "fig9"):
            metric = "e_theta" if figure_id in ("fig6", "fig9") else "e_h"
            data = _downlink(rows)
            for frac in _series(data, "spacing_frac"):
                pts = [r for r in data if r["spacing_frac"] == frac]
                ax.semilogy([r["set_name"] for r in pts],
                            [r[metric] for r in pts],
                            marker="o", label=f"spacing {frac}λ")
            ax.set_xlabel("transmit-element set")
            ax.set_ylabel("average MSE")
        elif figure_id == "fig10":
            data = _downlink(rows)
            for kind in _series(data, "predictor"):
                pts = [r for r in data if r["predictor"] == kind]
                ax.loglog([r["n_f"] for r in pts], [r["e_h"] for r in pts],
                          marker="o", label=kind.upper())
            ax.set_xlabel("active elements")
            ax.set_ylabel("average MSE (magnitude)")
        elif figure_id == "fig11":
            data = _downlink(rows)
            for count in _series(data, "n_f"):
                pts = [r for r in data if r["n_f"] == count]
                ax.semilogy([r["sigma"] for r in pts], [r["e_h"] for r in pts],
                            marker="o", label=f"{count} active")
            ax.set_xlabel("estimator error std σ")
            ax.set_ylabel("average MSE (magnitude)")
        else:  # fig12
            groups = []
            for r in rows:
                key = (r["predictor"], r["n_f"] if r["predictor"] != "ideal" else None)
                if key not in groups:
                    groups.append(key)
            for tag, count in groups:
                pts = [r for r in rows if r["predictor"] == tag
                       and (tag == "ideal" or r["n_f"] == count)]
                label = "ideal CSI" if tag == "ideal" else f"{count} active"
                ax.semilogy([r["n"] for r in pts], [r["ber"] for r in pts],
                            marker="o", label=label)
            ax.set_xlabel("surface size N")
            ax.set_ylabel("BER")
        ax.legend()
        fig.tight_layout()
        fig.savefig(out_path)
        plt.close(fig)
    return out_path
