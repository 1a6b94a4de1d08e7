"""Render figures from adosim CSV outputs.

All statistics come from the consumed CSVs; nothing is recomputed here
beyond plotting transforms. Line conventions: solid lines are the adaptive
design, dashed lines the fixed design, and black marks conditions whose
specified prior is the informative one (labelled "informative" or equal to
the population id). Rendering is deterministic: fixed style, fixed canvas,
and no timestamps in the image metadata.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import pandas as pd  # noqa: E402

FIGURE_IDS = ("irt-efd", "irt-results", "memreten-paramest",
              "memreten-model", "totalent", "linearp")

SUMMARY_COLUMNS = ("condition_id", "design", "utility_kind", "prior_id",
                   "population_id", "trial", "mean_log_p_true", "se_log",
                   "mean_p_true", "se_linear", "n_reps")
EFD_COLUMNS = ("population_id", "stimulus", "response_variability",
               "surprisal", "hindsight", "total", "global_utility")

LINESTYLES = {"ado": "-", "fixed": "--", "random": ":"}
PALETTE = ("tab:blue", "tab:cyan", "tab:green", "tab:orange", "tab:purple",
           "tab:red", "tab:olive", "tab:brown", "tab:pink", "tab:gray")

DPI = 150


class SchemaError(ValueError):
    """The input CSV lacks a column the figure needs."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure to render: its id, input CSV, and output image path."""

    figure_id: str
    input_path: str
    output_path: str


def load_csv(path: str, required) -> pd.DataFrame:
    """Read a CSV, skipping `#` comment lines, and check its columns."""
    df = pd.read_csv(path, comment="#")
    for col in required:
        if col not in df.columns:
            raise SchemaError(f"input {path!r} is missing column {col!r}")
    return df


def _informative(prior_id: str, population_id: str) -> bool:
    return prior_id == "informative" or prior_id == population_id


def _line_label(keys, values) -> str:
    return ", ".join(str(v) for k, v in zip(keys, values))


def _draw_summary(ax, df: pd.DataFrame, value_col: str, err_col: str):
    """Mean lines with standard-error bands, one per condition."""
    group_keys = ["design", "utility_kind", "prior_id", "population_id"]
    colors = {}
    for values, sub in df.groupby(group_keys, sort=False):
        design, utility, prior_id, population_id = values
        sub = sub.sort_values("trial")
        if _informative(prior_id, population_id):
            color = "black"
        else:
            key = (utility, prior_id, population_id)
            if key not in colors:
                colors[key] = PALETTE[len(colors) % len(PALETTE)]
            color = colors[key]
        style = LINESTYLES.get(design, "-.")
        varying = [v for k, v in zip(group_keys, values)
                   if df[k].nunique() > 1]
        label = ", ".join(str(v) for v in varying) or str(design)
        ax.plot(sub["trial"], sub[value_col], style, color=color, label=label)
        ax.fill_between(sub["trial"], sub[value_col] - sub[err_col],
                        sub[value_col] + sub[err_col], color=color, alpha=0.2,
                        linewidth=0)
    ax.set_xlabel("trial")
    if len(df):
        ax.legend(fontsize=7)


def _summary_figure(df: pd.DataFrame, value_col: str, err_col: str,
                    ylabel: str, pooled_only: bool = False):
    if pooled_only and len(df) and (df["population_id"] == "pooled").any():
        df = df[df["population_id"] == "pooled"]
    elif len(df) and (df["population_id"] == "pooled").any():
        df = df[df["population_id"] != "pooled"]
    fig, ax = plt.subplots(figsize=(6, 4))
    _draw_summary(ax, df, value_col, err_col)
    ax.set_ylabel(ylabel)
    return fig


def fig_irt_results(df):
    return _summary_figure(df, "mean_log_p_true", "se_log",
                           "log posterior probability of the true parameter")


def fig_memreten_paramest(df):
    return _summary_figure(df, "mean_log_p_true", "se_log",
                           "log posterior probability of the true parameter",
                           pooled_only=True)


def fig_memreten_model(df):
    return _summary_figure(df, "mean_log_p_true", "se_log",
                           "log posterior probability of the true model")


def fig_totalent(df):
    return _summary_figure(df, "mean_log_p_true", "se_log",
                           "log posterior probability of the true model")


def fig_linearp(df):
    return _summary_figure(df, "mean_p_true", "se_linear",
                           "posterior probability of the true value")


def fig_irt_efd(df):
    """Four panels: total divergence with the design criterion, then the
    three additive components, per population."""
    fig, axes = plt.subplots(2, 2, figsize=(9, 6.5), sharex=True)
    panels = (("total", "expected divergence"),
              ("response_variability", "response variability"),
              ("surprisal", "surprisal"),
              ("hindsight", "hindsight"))
    colors = {}
    for ax, (col, title) in zip(axes.ravel(), panels):
        for pop_id, sub in df.groupby("population_id", sort=False):
            sub = sub.sort_values("stimulus")
            if pop_id == "informative":
                color = "black"
            else:
                if pop_id not in colors:
                    colors[pop_id] = PALETTE[len(colors) % len(PALETTE)]
                color = colors[pop_id]
            ax.plot(sub["stimulus"], sub[col], "-", color=color, label=str(pop_id))
        ax.set_title(title, fontsize=9)
        ax.set_xlabel("stimulus")
    if len(df):
        first = df[df["population_id"] == df["population_id"].iloc[0]]
        first = first.sort_values("stimulus")
        axes[0, 0].plot(first["stimulus"], first["global_utility"], ":",
                        color="dimgray", label="design criterion")
        axes[0, 0].legend(fontsize=7)
    fig.tight_layout()
    return fig


_RENDERERS = {
    "irt-efd": (fig_irt_efd, EFD_COLUMNS),
    "irt-results": (fig_irt_results, SUMMARY_COLUMNS),
    "memreten-paramest": (fig_memreten_paramest, SUMMARY_COLUMNS),
    "memreten-model": (fig_memreten_model, SUMMARY_COLUMNS),
    "totalent": (fig_totalent, SUMMARY_COLUMNS),
    "linearp": (fig_linearp, SUMMARY_COLUMNS),
}


def render(spec: FigureSpec) -> str:
    """Render one figure and write it to the spec's output path."""
    if spec.figure_id not in _RENDERERS:
        raise ValueError(f"unknown figure id {spec.figure_id!r}; "
                         f"known: {', '.join(FIGURE_IDS)}")
    make, required = _RENDERERS[spec.figure_id]
    df = load_csv(spec.input_path, required)
    fig = make(df)
    # Software/Date metadata would break byte-level reproducibility
    fig.savefig(spec.output_path, dpi=DPI,
                metadata={"Software": None, "creationDate": None})
    plt.close(fig)
    return spec.output_path
