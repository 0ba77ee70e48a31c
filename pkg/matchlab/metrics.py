"""
Campaign Metrics
Per-instance outcome tables and per-class summaries for campaign reports
"""
import numpy as np
import pandas as pd

STATUSES = ("ok", "failure", "finding", "skipped")

# Optional per-target columns and how they roll up per instance class
FLAG_COLUMNS = {
    "matched": "sum",
    "locally_matched": "sum",
    "criterion_ok": "sum",
    "strong": "sum",
    "slack": "min",
    "stabilizer_order": "max",
}


def format_percentage(value: float) -> str:
    """Format number as percentage"""
    if pd.isna(value):
        return "0.00%"
    return f"{value:.2f}%"


def format_number(value: float) -> str:
    """Format number with comma separators"""
    if pd.isna(value):
        return "0"
    return f"{value:,.0f}"


def outcomes_frame(rows: list) -> pd.DataFrame:
    """One row per instance, in campaign order"""
    if not rows:
        return pd.DataFrame(columns=["index", "instance_class", "status"])
    df = pd.DataFrame(rows)
    df = df.sort_values("index", kind="stable").reset_index(drop=True)
    for status in STATUSES:
        df[f"_{status}"] = (df["status"] == status).astype(int)
    for col, agg_func in FLAG_COLUMNS.items():
        if col not in df.columns:
            continue
        if agg_func == "sum":
            df[col] = df[col].fillna(False).astype(bool).astype(int)
        else:
            df[col] = pd.to_numeric(df[col])
    return df


def calculate_kpis(df: pd.DataFrame) -> dict:
    """
    Campaign totals

    - instances: number of instances checked
    - failures / findings / skipped: counts by status
    - success_rate: (ok + findings) / (instances - skipped) * 100
    """
    if df.empty:
        return {"instances": 0, "ok": 0, "failures": 0, "findings": 0, "skipped": 0, "success_rate": 0.0}

    instances = int(len(df))
    ok = int(df["_ok"].sum())
    failures = int(df["_failure"].sum())
    findings = int(df["_finding"].sum())
    skipped = int(df["_skipped"].sum())

    checked = instances - skipped
    success_rate = ((ok + findings) / checked * 100) if checked > 0 else 0.0

    return {
        "instances": instances,
        "ok": ok,
        "failures": failures,
        "findings": findings,
        "skipped": skipped,
        "success_rate": round(success_rate, 2),
    }


def calculate_class_metrics(df: pd.DataFrame) -> pd.DataFrame:
    """Metrics grouped by instance class (a group, or a field and dimension)"""
    if df.empty or "instance_class" not in df.columns:
        return pd.DataFrame()

    agg_dict = {
        "index": "count",
        "_ok": "sum",
        "_failure": "sum",
        "_finding": "sum",
        "_skipped": "sum",
    }
    for col, agg_func in FLAG_COLUMNS.items():
        if col in df.columns:
            agg_dict[col] = agg_func

    # sort=False keeps classes in campaign order
    metrics = df.groupby("instance_class", sort=False).agg(agg_dict).reset_index()

    metrics = metrics.rename(columns={
        "index": "instances",
        "_ok": "ok",
        "_failure": "failures",
        "_finding": "findings",
        "_skipped": "skipped",
    })

    checked = metrics["instances"] - metrics["skipped"]
    metrics["success_rate"] = np.where(
        checked > 0,
        (metrics["ok"] + metrics["findings"]) / checked.where(checked > 0, 1) * 100,
        0
    ).round(2)

    if "matched" in metrics.columns and "locally_matched" in metrics.columns:
        # empirical frequency of matched pairs that are not locally matched
        unmatched_local = (df["matched"] == 1) & (df["locally_matched"] == 0)
        counts = unmatched_local.groupby(df["instance_class"], sort=False).sum()
        metrics["matched_not_local"] = metrics["instance_class"].map(counts).fillna(0).astype(int)

    return metrics


def prepare_export_data(metrics: pd.DataFrame) -> pd.DataFrame:
    """Readable column headers for summary.csv"""
    if metrics.empty:
        return metrics
    rename_map = {
        "instance_class": "Instance class",
        "instances": "Instances",
        "ok": "OK",
        "failures": "Failures",
        "findings": "Findings",
        "skipped": "Skipped",
        "success_rate": "Success rate (%)",
    }
    return metrics.rename(columns=rename_map)


def summary_records(metrics: pd.DataFrame) -> list:
    """JSON-native records (no numpy scalars) for report.json"""
    if metrics.empty:
        return []
    return [
        {key: (value.item() if hasattr(value, "item") else value) for key, value in record.items()}
        for record in metrics.to_dict(orient="records")
    ]
