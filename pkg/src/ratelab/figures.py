"""
Sweep Figures
Plotly charts of sweep metrics and rate fits for the dashboard
"""

from typing import Sequence

import numpy as np
import pandas as pd
import plotly.graph_objects as go

from src.ratelab.rate_fit import RateFit
from src.ratelab.sweep import SweepRow

FIT_COLORS = {
    "log_over_sqrt": "#f39c12",
    "inv_sqrt": "#2ecc71",
    "inv": "#e74c3c",
    "power": "#9b59b6",
}


def create_rate_chart(
    rows: Sequence[SweepRow], fits: Sequence[RateFit], metric: str = "d"
) -> go.Figure:
    """Log-log chart of one metric against n with every fitted curve overlaid"""
    ok = [row for row in rows if row.ok and getattr(row, metric) > 0]
    n = np.array([row.n for row in ok], dtype=float)
    y = np.array([getattr(row, metric) for row in ok])

    fig = go.Figure()
    fig.add_trace(go.Scatter(
        x=n, y=y,
        mode='markers',
        name=f'measured {metric}',
        marker=dict(size=10, color='#3498db'),
        hovertemplate='n=%{x}<br>' + metric + '=%{y:.4e}<extra></extra>'
    ))

    if n.size:
        dense = np.geomspace(n.min(), n.max(), 200)
        for fit in fits:
            name = fit.model if fit.model != "power" else f"power (alpha={fit.alpha:.3f})"
            fig.add_trace(go.Scatter(
                x=dense, y=fit.predict(dense),
                mode='lines',
                name=name + (" [chosen]" if fit.chosen else ""),
                line=dict(
                    color=FIT_COLORS.get(fit.model, '#888'),
                    width=4 if fit.chosen else 2,
                    dash='solid' if fit.chosen else 'dash',
                ),
            ))

    fig.update_layout(
        xaxis=dict(type='log', title='n'),
        yaxis=dict(type='log', title=metric),
        height=450,
        title=f"<b>{metric} vs n</b>",
        margin=dict(l=20, r=20, t=60, b=20),
    )
    return fig


def create_rate_shape_chart(rows: Sequence[SweepRow]) -> go.Figure:
    """d sqrt(n) / ln n against n; a bounded curve is the log_over_sqrt upper-bound shape"""
    ok = [row for row in rows if row.ok and row.n > 1]
    n = np.array([row.n for row in ok], dtype=float)
    shape = np.array([row.d for row in ok]) * np.sqrt(n) / np.log(n)

    fig = go.Figure()
    fig.add_trace(go.Scatter(
        x=n, y=shape,
        mode='lines+markers',
        name='d sqrt(n) / ln n',
        line=dict(color='#2ecc71', width=3),
    ))
    fig.update_layout(
        xaxis=dict(type='log', title='n'),
        yaxis=dict(title='d sqrt(n) / ln n', rangemode='tozero'),
        height=350,
        title="<b>Rate shape</b>",
        margin=dict(l=20, r=20, t=60, b=20),
    )
    return fig


def fits_table(fits: Sequence[RateFit]) -> pd.DataFrame:
    columns = ["model", "constant", "alpha", "rss", "chosen"]
    return pd.DataFrame([fit.to_dict() for fit in fits], columns=columns)
