import os
import sys
import json
import argparse
import logging
from typing import List, Optional

from dotenv import load_dotenv

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from pii_detection.core import PiiDetectionError
from pii_detection.entity_mappings import DEFAULT_SENSITIVITY, SensitivityWeights
from pii_detection.extractor import build_default_recognizers, detect
from session.core import SessionError
from session.risk import EdgePolicy, RiskConfig
from harness.scenario import HarnessError, bundled_scenarios, load_scenario
from harness.runner import ProtectionMode, run_scenario, sweep, trigger_matrix
from formatter.output import ReportFormatter, detection_records, emit_report, load_summary, summary_rows

logger = logging.getLogger(__name__)

DEFAULT_TAUS = [1.5, 2.0, 2.5]

def _parse_taus(value: str) -> List[float]:
    try:
        return [float(t) for t in value.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Invalid threshold list: {value!r}")

def _weights(path: Optional[str]) -> SensitivityWeights:
    return SensitivityWeights.from_file(path) if path else DEFAULT_SENSITIVITY

def _scenarios(path: Optional[str]):
    return [load_scenario(path)] if path else bundled_scenarios()

def cmd_run_scenario(args) -> int:
    weights = _weights(args.weights)
    config = RiskConfig(alpha=args.alpha, tau=args.tau, weights=weights,
                        include_hard_blocked_in_score=args.score_blocked,
                        edge_policy=EdgePolicy(args.edge_policy))
    recognizers = build_default_recognizers(args.gazetteers, weights)
    modes = [ProtectionMode.parse(m) for m in args.mode.split(",")]
    reports = []
    for spec in _scenarios(args.scenario):
        for mode in modes:
            report = run_scenario(spec, mode, config, args.seed, recognizers)
            reports.append(report)
            print(ReportFormatter.format_cpe_series(report))
    print(ReportFormatter.format_summary(summary_rows(reports)))
    if args.out:
        paths = emit_report(reports, args.out)
        print(f"📁 Wrote {len(paths)} files to {args.out}")
    return 0

def cmd_sweep(args) -> int:
    weights = _weights(args.weights)
    recognizers = build_default_recognizers(args.gazetteers, weights)
    base = RiskConfig(alpha=args.alpha, weights=weights)
    reports = []
    for spec in _scenarios(args.scenario):
        reports.extend(sweep(spec, args.taus, args.alpha, args.seed, recognizers, base))
        if args.with_baselines:
            for tau in args.taus:
                config = RiskConfig(alpha=args.alpha, tau=tau, weights=weights)
                for mode in (ProtectionMode.PER_TURN_BASELINE, ProtectionMode.NONE):
                    reports.append(run_scenario(spec, mode, config, args.seed, recognizers))
    print(ReportFormatter.format_trigger_matrix(trigger_matrix(reports)))
    if args.out:
        paths = emit_report(reports, args.out)
        print(f"📁 Wrote {len(paths)} files to {args.out}")
    return 0

def cmd_extract(args) -> int:
    recognizers = build_default_recognizers(args.gazetteers, _weights(args.weights))
    text = args.text if args.text is not None else sys.stdin.read()
    spans = detect(text, recognizers)
    if args.json:
        records = detection_records(spans, reveal=args.reveal)
        print(json.dumps({"offset_unit": "character", "spans": records}, indent=2, ensure_ascii=False))
    else:
        print(ReportFormatter.format_detections(spans, reveal=args.reveal))
    return 0

def cmd_serve(args) -> int:
    import uvicorn
    from service.app import create_app
    from service.config import ServiceConfig

    config = ServiceConfig.from_env(
        port=args.port,
        upstream_url=args.upstream,
        upstream_model=args.model,
        tau=args.tau,
        alpha=args.alpha,
        session_ttl=args.ttl,
        weights_file=args.weights,
        gazetteer_dir=args.gazetteers,
        seed=args.seed,
    )
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=config.port, log_level="warning")
    return 0

def cmd_report(args) -> int:
    rows = load_summary(args.input)
    print(ReportFormatter.format_summary(rows, tablefmt=args.format))
    if not rows:
        return 0
    taus = sorted({float(r["tau"]) for r in rows})
    tau = args.tau if args.tau is not None else (2.0 if 2.0 in taus else taus[0])
    print()
    print(ReportFormatter.format_exposure_comparison(rows, tau, tablefmt=args.format))
    return 0

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="camp",
        description="Session-aware PII exposure tracking and retroactive pseudonymization for LLM chats",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def detection_options(p):
        p.add_argument("--weights", help="YAML file of entity weight overrides")
        p.add_argument("--gazetteers", help="directory of gazetteer phrase files")

    run = sub.add_parser("run-scenario", help="replay scenarios under one or more protection modes")
    run.add_argument("--scenario", help="scenario fixture (default: every bundled fixture)")
    run.add_argument("--mode", default="camp", help="camp, baseline, none, or a comma-separated list")
    run.add_argument("--tau", type=float, default=2.0)
    run.add_argument("--alpha", type=float, default=0.3)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--edge-policy", default=EdgePolicy.SESSION_COMPLETE.value,
                     choices=[p.value for p in EdgePolicy])
    run.add_argument("--score-blocked", action="store_true", help="include hard-blocked types in the CPE score")
    run.add_argument("--out", help="directory for summary and series files")
    detection_options(run)
    run.set_defaults(func=cmd_run_scenario)

    sw = sub.add_parser("sweep-thresholds", help="trigger turn per threshold")
    sw.add_argument("--scenario", help="scenario fixture (default: every bundled fixture)")
    sw.add_argument("--taus", type=_parse_taus, default=DEFAULT_TAUS, help="comma-separated, ascending")
    sw.add_argument("--alpha", type=float, default=0.3)
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--with-baselines", action="store_true", help="also run baseline and unprotected modes")
    sw.add_argument("--out", help="directory for summary and series files")
    detection_options(sw)
    sw.set_defaults(func=cmd_sweep)

    ex = sub.add_parser("extract", help="detect PII in a text (stdin if --text is omitted)")
    ex.add_argument("--text")
    ex.add_argument("--reveal", action="store_true", help="print detected values instead of redacted forms")
    ex.add_argument("--json", action="store_true", help="print (type, start, end, surface) records as JSON")
    detection_options(ex)
    ex.set_defaults(func=cmd_extract)

    serve = sub.add_parser("serve", help="run the chat proxy service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int)
    serve.add_argument("--upstream", help="chat-completion endpoint URL")
    serve.add_argument("--model")
    serve.add_argument("--tau", type=float)
    serve.add_argument("--alpha", type=float)
    serve.add_argument("--ttl", type=float, help="idle session TTL in seconds")
    serve.add_argument("--seed", type=int)
    detection_options(serve)
    serve.set_defaults(func=cmd_serve)

    rep = sub.add_parser("report", help="summarize a directory written by run-scenario or sweep-thresholds")
    rep.add_argument("--in", dest="input", required=True)
    rep.add_argument("--tau", type=float, help="threshold for the exposure comparison")
    rep.add_argument("--format", default="grid", help="tabulate table format, e.g. grid or github")
    rep.set_defaults(func=cmd_report)
    return parser

def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the script."""
    load_dotenv()
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    try:
        return args.func(args)
    except (PiiDetectionError, SessionError, HarnessError, OSError, ValueError) as e:
        logger.error(f"Error: {str(e)}")
        return 1

if __name__ == "__main__":
    sys.exit(main())
