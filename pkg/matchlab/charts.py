"""
Campaign Charts
Static plotly HTML of a campaign summary
"""
import logging
from pathlib import Path

import pandas as pd
import plotly.express as px

logger = logging.getLogger(__name__)

STATUS_COLORS = {
    "ok": "#2E7D32",
    "findings": "#F9A825",
    "failures": "#C62828",
    "skipped": "#9E9E9E",
}


def summary_figure(metrics: pd.DataFrame, title: str):
    """Stacked bars of ok / findings / failures / skipped per instance class"""
    long = metrics.melt(
        id_vars="instance_class",
        value_vars=[c for c in STATUS_COLORS if c in metrics.columns],
        var_name="status",
        value_name="count",
    )
    fig = px.bar(
        long,
        x="instance_class",
        y="count",
        color="status",
        color_discrete_map=STATUS_COLORS,
        title=title,
        labels={"instance_class": "Instance class", "count": "Instances", "status": "Outcome"},
    )
    fig.update_layout(
        barmode="stack",
        plot_bgcolor="rgba(0,0,0,0)",
        margin=dict(l=20, r=20, t=60, b=20),
        legend=dict(orientation="h", yanchor="bottom", y=1.02, xanchor="right", x=1),
    )
    return fig


def write_summary_html(metrics: pd.DataFrame, path, title: str) -> Path:
    path = Path(path)
    if metrics.empty:
        logger.warning("Empty summary, skipping %s", path)
        return None
    summary_figure(metrics, title).write_html(path, include_plotlyjs="cdn")
    logger.info("Wrote chart %s", path)
    return path
