"""Figure rendering for traces and sweeps.

Everything is written as SVG with a fixed hash salt and no embedded
creation date, so identical inputs give byte-identical files.  Long
traces are thinned to a bounded point count before drawing; the
thinning is a fixed stride, hence deterministic.
"""

import math
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import ConfigError  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "faultfoc"

MAX_POINTS = 20000


def save_figure(fig, path) -> None:
    """Write a figure as deterministic SVG and release it."""
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _columns(data, names):
    missing = [c for c in names if c not in data]
    if missing:
        raise ConfigError(f"trace is missing columns: {', '.join(missing)}")
    n = len(data[names[0]])
    step = max(1, math.ceil(n / MAX_POINTS))
    return {c: data[c][::step] for c in names}


def _panel_dq(ax, d) -> None:
    ax.plot(d["t"], d["i_d"], label="i_d")
    ax.plot(d["t"], d["i_q"], label="i_q")
    ax.plot(d["t"], d["i_d_ref"], "--", label="i_d ref")
    ax.plot(d["t"], d["i_q_ref"], "--", label="i_q ref")
    ax.set_ylabel("current (A)")
    ax.set_title("rotating-frame currents")
    ax.legend(loc="upper right", ncols=2)


_panel_dq.columns = ("t", "i_d", "i_q", "i_d_ref", "i_q_ref")


def _panel_abc(ax, d) -> None:
    for name in ("i_a", "i_b", "i_c"):
        ax.plot(d["t"], d[name], label=name)
    ax.set_ylabel("current (A)")
    ax.set_title("phase currents")
    ax.legend(loc="upper right", ncols=3)


_panel_abc.columns = ("t", "i_a", "i_b", "i_c")


def _panel_speed(ax, d) -> None:
    ax.plot(d["t"], d["omega_m"])
    ax.set_ylabel("speed (rad/s)")
    ax.set_title("mechanical speed")


_panel_speed.columns = ("t", "omega_m")


TRACE_PANELS = {"dq": _panel_dq, "abc": _panel_abc, "speed": _panel_speed}


def trace_columns(trace) -> dict:
    """Column mapping of a Trace, named like the CSV export."""
    return {"t": trace.t,
            "i_a": trace.i_abc[:, 0], "i_b": trace.i_abc[:, 1],
            "i_c": trace.i_abc[:, 2],
            "i_d": trace.i_dq[:, 0], "i_q": trace.i_dq[:, 1],
            "i_d_ref": trace.i_dq_ref[:, 0], "i_q_ref": trace.i_dq_ref[:, 1],
            "u_ref_alpha": trace.u_ref_s[:, 0],
            "u_ref_beta": trace.u_ref_s[:, 1],
            "s_a": trace.switch[:, 0], "s_b": trace.switch[:, 1],
            "s_c": trace.switch[:, 2],
            "omega_m": trace.omega_m, "m_m": trace.m_m,
            "flags": trace.flags}


def render_trace_panels(data, out_dir, panels=("dq", "abc", "speed"),
                        stem: str = "trace") -> list[pathlib.Path]:
    """Render the requested panels, one SVG per panel.

    data maps column names (as in the CSV export) to equal-length
    arrays.  Returns the written paths in panel order.
    """
    out_dir = pathlib.Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in panels:
        try:
            panel = TRACE_PANELS[name]
        except KeyError:
            raise ConfigError(f"unknown panel {name!r}; choose from "
                              f"{', '.join(sorted(TRACE_PANELS))}") from None
        fig, ax = plt.subplots(figsize=(8.0, 3.2), layout="constrained")
        panel(ax, _columns(data, panel.columns))
        ax.set_xlabel("time (s)")
        ax.grid(True, alpha=0.3)
        path = out_dir / f"{stem}_{name}.svg"
        save_figure(fig, path)
        written.append(path)
    return written


def render_sweep(sweep, path) -> None:
    """Distortion-vs-injection-angle curve with the minimum marked."""
    fig, ax = plt.subplots(figsize=(6.0, 3.6), layout="constrained")
    ax.plot(sweep.phi0_deg, 100.0 * sweep.thd, marker="o", markersize=3)
    best = sweep.argmin_deg
    ax.axvline(best, color="tab:red", linestyle="--", alpha=0.7,
               label=f"minimum at {best:g} deg")
    ax.set_xlabel("injection angle (deg)")
    ax.set_ylabel("THD of i_a (%)")
    ax.set_title("distortion vs injection angle")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper right")
    save_figure(fig, path)
