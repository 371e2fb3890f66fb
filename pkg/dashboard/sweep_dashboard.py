"""
Convergence Sweep Dashboard
Interactive sweeps of W_n against N(0, 1) with rate fits and reloadable JSON bundles
"""

import streamlit as st
import pandas as pd
import sys
from pathlib import Path

# Add src to path
sys.path.append(str(Path(__file__).parent.parent))

from src.config import SKEWED_MIXTURE, RunConfig, dyadic_range
from src.errors import LabError
from src.ratelab import (
    chosen_fit,
    create_rate_chart,
    create_rate_shape_chart,
    emit_report,
    fit_rate,
    fits_table,
    load_report,
    rows_frame,
    run_sweep,
    sweep_invariants,
)

st.set_page_config(
    page_title="Entropic CLT Lab",
    page_icon="📉",
    layout="wide"
)

st.markdown("""
<style>
    .stMetric {
        background: linear-gradient(135deg, #667eea 0%, #764ba2 100%);
        padding: 20px;
        border-radius: 10px;
        box-shadow: 0 4px 15px rgba(0,0,0,0.3);
    }

    .big-title {
        font-size: 38px;
        font-weight: bold;
        background: linear-gradient(90deg, #667eea 0%, #764ba2 50%, #f093fb 100%);
        -webkit-background-clip: text;
        -webkit-text-fill-color: transparent;
        text-align: center;
        margin-bottom: 10px;
    }
</style>
""", unsafe_allow_html=True)

METRICS = ["d", "kl_wg", "kl_gw", "l1", "sup_edgeworth_error", "e_delta_sq"]


def init_state():
    """Initialize session"""
    if 'initialized' not in st.session_state:
        st.session_state.initialized = True
        st.session_state.rows = []
        st.session_state.source = None


@st.cache_data(show_spinner=False)
def cached_sweep(families: tuple, lo: int, hi: int, k: int, workers: int):
    """Sweep rows keyed by the sidebar settings"""
    config = RunConfig(families=list(families), ns=dyadic_range(lo, hi), k=k, workers=workers)
    return run_sweep(config.specs(), config.ns, config)


def sidebar():
    with st.sidebar:
        st.markdown("## 🎛️ Sweep Settings")
        families = st.text_area(
            "Families (one token per line)",
            value=SKEWED_MIXTURE,
            help="kind:p1,p2 tokens, cycled over the summands",
        )
        col_a, col_b = st.columns(2)
        with col_a:
            lo = st.selectbox("n from", [2, 4, 8, 16], index=2)
        with col_b:
            hi = st.selectbox("n to", [64, 128, 256, 512, 1024, 2048], index=3)
        k = st.radio("Edgeworth order", [0, 1, 2], index=2, horizontal=True)
        workers = st.slider("Worker threads", 1, 8, 1)

        if st.button("▶️ Run sweep", use_container_width=True):
            tokens = tuple(t.strip() for t in families.splitlines() if t.strip())
            try:
                with st.spinner("Computing densities..."):
                    st.session_state.rows = cached_sweep(tokens, lo, hi, k, workers)
                st.session_state.source = ", ".join(tokens)
            except LabError as e:
                st.error(f"Sweep rejected: {e}")

        st.markdown("---")
        st.markdown("### 📂 Load Report")
        uploaded = st.text_input("JSON bundle path", value="outputs/sweep.json")
        if st.button("Load", use_container_width=True):
            path = Path(uploaded)
            if path.exists():
                st.session_state.rows, _, _ = load_report(path)
                st.session_state.source = str(path)
            else:
                st.warning(f"{path} not found")


def main():
    """Main dashboard"""
    init_state()
    sidebar()

    st.markdown('<h1 class="big-title">📉 ENTROPIC CLT LAB</h1>', unsafe_allow_html=True)
    rows = st.session_state.rows
    if not rows:
        st.info("Run a sweep or load a JSON bundle from the sidebar.")
        return
    st.caption(f"Source: {st.session_state.source}")

    metric = st.selectbox("Metric", METRICS, index=0)
    try:
        fits = fit_rate(rows, metric)
    except LabError as e:
        st.warning(f"No rate fit: {e}")
        fits = []

    invariants = sweep_invariants(rows)
    met1, met2, met3, met4 = st.columns(4)
    with met1:
        st.metric("Rows", len(rows), delta=f"{sum(not r.ok for r in rows)} failed", delta_color="inverse")
    with met2:
        st.metric("Chosen model", chosen_fit(fits).model if fits else "-")
    with met3:
        st.metric("Power alpha", f"{fits[-1].alpha:.3f}" if fits else "-")
    with met4:
        st.metric("Invariants", f"{sum(invariants.values())}/{len(invariants)}")

    st.markdown("---")
    chart_col, shape_col = st.columns(2)
    with chart_col:
        st.markdown("### 📊 Decay against n")
        st.plotly_chart(create_rate_chart(rows, fits, metric), use_container_width=True)
    with shape_col:
        st.markdown("### 📈 Rate shape")
        st.caption("d sqrt(n) / ln n stays bounded under the log_over_sqrt rate")
        st.plotly_chart(create_rate_shape_chart(rows), use_container_width=True)

    if fits:
        st.markdown("### 🧮 Rate fits")
        st.dataframe(fits_table(fits), use_container_width=True, hide_index=True)

    st.markdown("### 📋 Sweep rows")
    st.dataframe(rows_frame(rows), use_container_width=True, hide_index=True)

    failed = [r for r in rows if not r.ok]
    if failed:
        st.dataframe(
            pd.DataFrame([{"n": r.n, "reason": r.reason} for r in failed]),
            use_container_width=True,
            hide_index=True,
        )

    if st.button("💾 Write reports to outputs/"):
        written = emit_report(rows, fits, output_dir="outputs", metric=metric)
        st.success(f"Wrote {', '.join(str(p) for p in written.values())}")


if __name__ == "__main__":
    main()
