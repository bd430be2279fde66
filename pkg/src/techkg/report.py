"""Figure and table rendering for pipeline artifacts.

Everything here draws from the plain-JSON stage artifacts, so a report
can be regenerated from a job directory without re-running any stage.
Figures are written as PNG files next to a tab-separated metrics table.
"""

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # file output only; no display server in scope

import matplotlib.pyplot as plt

log = logging.getLogger(__name__)

MAX_TERM_BARS = 30


def render_term_figure(scores: list, path) -> None:
    """Horizontal bars of min nPMI per kept term, best on top."""
    rows = sorted(scores, key=lambda s: -s["min_npmi"])[:MAX_TERM_BARS]
    fig, ax = plt.subplots(figsize=(8, max(2.0, 0.35 * len(rows) + 1)))
    labels = [r.get("label", r["term_id"]) for r in rows]
    values = [r["min_npmi"] for r in rows]
    colors = ["#2a7" if r.get("newly_detected") else "#47a" for r in rows]
    ax.barh(range(len(rows)), values, color=colors)
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(labels, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("min nPMI across genres")
    ax.set_title("Kept terms")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_cluster_figure(topicmap: dict, path) -> None:
    """Histogram of topic-map cluster sizes."""
    sizes: dict = {}
    for node in topicmap.get("nodes", []):
        sizes[node["cluster"]] = sizes.get(node["cluster"], 0) + 1
    counts = sorted(sizes.values(), reverse=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(range(1, len(counts) + 1), counts, color="#47a")
    ax.set_xlabel("cluster (by size rank)")
    ax.set_ylabel("terms")
    ax.set_title(f"{len(counts)} clusters over {sum(counts)} terms")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_validation_figure(validation: dict, path) -> None:
    """Violation counts by rule, after quarantine."""
    by_rule = validation.get("summary", {}).get("by_rule", {})
    names = sorted(by_rule)
    values = [by_rule[n] for n in names]
    fig, ax = plt.subplots(figsize=(7, 4))
    bars = ax.bar(range(len(names)), values, color="#a44")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("residual violations")
    removed = validation.get("summary", {}).get("removed_axiom_count", 0)
    ax.set_title(f"Consistency check ({removed} axioms quarantined)")
    ax.bar_label(bars)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def metrics_rows(artifacts: dict) -> list:
    """Flat (metric, value) pairs for the delimited summary table."""
    rows = []
    scores = artifacts.get("scores")
    if scores is not None:
        rows.append(("kept_terms", len(scores["scores"])))
        rows.append(
            ("newly_detected", sum(1 for s in scores["scores"] if s["newly_detected"]))
        )
    topicmap = artifacts.get("topicmap")
    if topicmap is not None:
        stats = topicmap.get("stats", {})
        for key in ("node_count", "edge_count", "cluster_count", "clusters_gt2"):
            if key in stats:
                rows.append((key, stats[key]))
    validation = artifacts.get("validation")
    if validation is not None:
        summary = validation.get("summary", {})
        rows.append(("violations_residual", summary.get("violation_count", 0)))
        rows.append(("axioms_quarantined", summary.get("removed_axiom_count", 0)))
    kg_stats = artifacts.get("kg_stats")
    if kg_stats is not None:
        for key in ("axiom_count", "class_count", "object_property_count"):
            rows.append((key, kg_stats[key]))
    return rows


def render_report(artifacts: dict, out_dir) -> dict:
    """Write every figure whose source artifact is present, plus the
    metrics table. Returns a manifest of written files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    figures = []

    scores = artifacts.get("scores")
    if scores is not None and scores["scores"]:
        path = out / "term_scores.png"
        render_term_figure(scores["scores"], path)
        figures.append(path.name)
    if artifacts.get("topicmap") is not None:
        path = out / "cluster_sizes.png"
        render_cluster_figure(artifacts["topicmap"], path)
        figures.append(path.name)
    if artifacts.get("validation") is not None:
        path = out / "validation.png"
        render_validation_figure(artifacts["validation"], path)
        figures.append(path.name)

    rows = metrics_rows(artifacts)
    table = out / "report.tsv"
    lines = ["metric\tvalue"] + [f"{k}\t{v}" for k, v in rows]
    table.write_text("\n".join(lines) + "\n", encoding="utf-8")
    log.info("report: %d figures, %d metrics -> %s", len(figures), len(rows), out)
    return {"figures": figures, "table": table.name, "metrics": dict(rows)}
