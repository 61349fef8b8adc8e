import os
import csv
import json
import logging
from typing import Any, Dict, Iterable, List, Optional, Sequence

from tabulate import tabulate

from pii_detection.core import DetectionSpan
from session.core import redact_value
from harness.runner import ProtectionMode, RunReport

logger = logging.getLogger(__name__)

SUMMARY_FIELDS = ["scenario", "mode", "tau", "alpha", "trigger_turn", "exposure_final", "exposure_ever", "final_cpe"]

def _tau_label(tau: float) -> str:
    return str(float(tau))

def _turn_label(turn: Optional[int]) -> str:
    return f"Turn {turn}" if turn is not None else "-"

class ReportFormatter:
    """Formats harness results into terminal or markdown tables."""

    @staticmethod
    def format_summary(rows: Sequence[Dict[str, Any]], tablefmt: str = "grid") -> str:
        """One row per run, in the stable summary field order."""
        if not rows:
            return "📋 No runs to display."
        table_data = [[row.get(f) for f in SUMMARY_FIELDS] for row in rows]
        return tabulate(table_data, headers=SUMMARY_FIELDS, tablefmt=tablefmt, stralign="left")

    @staticmethod
    def format_trigger_matrix(matrix: Dict[str, Dict[float, Optional[int]]], tablefmt: str = "grid") -> str:
        """Scenario x threshold table of trigger turns."""
        if not matrix:
            return "📋 No sweep results to display."
        taus = sorted({tau for row in matrix.values() for tau in row})
        headers = ["Scenario"] + [f"τ = {_tau_label(t)}" for t in taus]
        table_data = [
            [scenario] + [_turn_label(row.get(tau)) for tau in taus]
            for scenario, row in sorted(matrix.items())
        ]
        return tabulate(table_data, headers=headers, tablefmt=tablefmt, stralign="center")

    @staticmethod
    def format_exposure_comparison(rows: Sequence[Dict[str, Any]], tau: float, tablefmt: str = "grid") -> str:
        """Baseline vs CAMP exposure per scenario at one threshold."""
        by_scenario: Dict[str, Dict[str, Dict[str, Any]]] = {}
        for row in rows:
            if float(row["tau"]) != float(tau):
                continue
            by_scenario.setdefault(row["scenario"], {})[row["mode"]] = row
        if not by_scenario:
            return f"📋 No runs at τ = {_tau_label(tau)}."
        headers = ["Scenario", "Baseline Exp.", "CAMP Exp.", "Final CPE", "Trigger"]
        table_data = []
        for scenario, modes in sorted(by_scenario.items()):
            baseline = modes.get(ProtectionMode.PER_TURN_BASELINE.value, {})
            camp = modes.get(ProtectionMode.CAMP.value, {})
            table_data.append([
                scenario,
                baseline.get("exposure_final", "-"),
                camp.get("exposure_final", "-"),
                f"{camp['final_cpe']:.2f}" if "final_cpe" in camp else "-",
                _turn_label(camp.get("trigger_turn")),
            ])
        title = f"## Exposure at τ = {_tau_label(tau)}\n\n"
        return title + tabulate(table_data, headers=headers, tablefmt=tablefmt, stralign="center")

    @staticmethod
    def format_cpe_series(report: RunReport, tablefmt: str = "grid") -> str:
        table_data = []
        for index, value in enumerate(report.cpe_series):
            marker = "⚠️ trigger" if report.trigger_turn == index + 1 else ""
            table_data.append([index + 1, f"{value:.2f}", marker])
        header = f"{report.scenario_id} ({report.mode.value}, τ = {_tau_label(report.tau)}, α = {report.alpha})\n"
        return header + tabulate(table_data, headers=["Turn", "CPE", ""], tablefmt=tablefmt, stralign="left")

    @staticmethod
    def format_detections(spans: Sequence[DetectionSpan], reveal: bool = False, tablefmt: str = "grid") -> str:
        """Detected spans; values are redacted unless `reveal` is set. Offsets count characters."""
        if not spans:
            return "✅ No PII detected."
        table_data = [[r["type"], r["start"], r["end"], r["surface"]] for r in detection_records(spans, reveal)]
        headers = ["Type", "Start (char)", "End (char)", "Value"]
        return tabulate(table_data, headers=headers, tablefmt=tablefmt, stralign="left")

def detection_records(spans: Sequence[DetectionSpan], reveal: bool = False) -> List[Dict[str, Any]]:
    """One (type, start, end, surface) record per span, offsets in characters."""
    return [
        {
            "type": s.entity_type.value,
            "start": s.start,
            "end": s.end,
            "surface": s.text if reveal else redact_value(s.text),
        }
        for s in spans
    ]

def _series_name(report: RunReport) -> str:
    if report.mode is ProtectionMode.CAMP:
        return f"{report.scenario_id}_{_tau_label(report.tau)}"
    return f"{report.scenario_id}_{report.mode.value.lower()}_{_tau_label(report.tau)}"

def _write_json(path: str, data: Any) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=False)
        f.write("\n")

def emit_report(reports: Sequence[RunReport], out_dir: str) -> List[str]:
    """Write the summary, per-run CPE series, graph evolution and audit files; return their paths.

    Files written for identical reports are byte-identical.
    """
    if not reports:
        raise ValueError("At least one report is required")
    os.makedirs(out_dir, exist_ok=True)
    written = []

    rows = summary_rows(reports)
    summary_json = os.path.join(out_dir, "summary.json")
    _write_json(summary_json, {"runs": rows})
    written.append(summary_json)

    summary_csv = os.path.join(out_dir, "summary.csv")
    with open(summary_csv, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SUMMARY_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
    written.append(summary_csv)

    for report in reports:
        name = _series_name(report)
        series_path = os.path.join(out_dir, f"cpe_series_{name}.csv")
        with open(series_path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["turn", "cpe"])
            for index, value in enumerate(report.cpe_series):
                writer.writerow([index, round(value, 4)])
        written.append(series_path)

        if report.mode is ProtectionMode.CAMP:
            graph_path = os.path.join(out_dir, f"graph_evolution_{name}.json")
            _write_json(graph_path, {"scenario": report.scenario_id, "tau": report.tau, "turns": report.graph_evolution})
            audit_path = os.path.join(out_dir, f"audit_{name}.json")
            _write_json(audit_path, dict(report.audit, scenario=report.scenario_id, tau=report.tau))
            written.extend([graph_path, audit_path])

    logger.info(f"Wrote {len(written)} report files to {out_dir}")
    return written

def load_summary(in_dir: str) -> List[Dict[str, Any]]:
    """Read back the run records written by emit_report."""
    path = os.path.join(in_dir, "summary.json")
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    return list(data.get("runs", []))

def summary_rows(reports: Iterable[RunReport]) -> List[Dict[str, Any]]:
    return [r.summary_row() for r in reports]
