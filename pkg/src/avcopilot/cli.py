"""Command-line entry points: serve the pipeline, run the evaluations.

Usage::

    avcopilot serve --port 8000 --backend rule|http [--map F] [--registry F]
                    [--ablation no-status|zero-shot|kb-only] [--frontend DIR]
    avcopilot eval translate --corpus F --backend rule|http
                    [--ablation A] --out DIR
    avcopilot eval scenario --runs N --schedule F --out DIR [--backend B]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .evalharness import (
    default_corpus,
    load_corpus,
    run_scenario_eval,
    run_translation_eval,
    write_scenario_outputs,
    write_translation_outputs,
    format_stats_table,
)
from .pipeline import default_schedule, load_schedule
from .registry import default_registry
from .service import build_pipeline, create_app
from .translation import AblationMode, HttpBackend, RuleBackend


def _read(path: str | None) -> str | None:
    return Path(path).read_text(encoding="utf-8") if path else None


def _ablation(name: str | None) -> AblationMode:
    return AblationMode(name) if name else AblationMode.BASELINE


def _backend(name: str):
    if name == "rule":
        return RuleBackend()
    if name == "http":
        return HttpBackend()
    raise SystemExit(f"unknown backend {name!r}")


def _add_backend_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backend", choices=["rule", "http"], default="rule")
    parser.add_argument(
        "--ablation", choices=[m.value for m in AblationMode if m is not AblationMode.BASELINE]
    )


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    pipeline = build_pipeline(
        backend_name=args.backend,
        map_text=_read(args.map),
        registry_text=_read(args.registry),
        ablation=_ablation(args.ablation),
        log_dir=args.log_dir,
    )
    app = create_app(pipeline, static_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_eval_translate(args: argparse.Namespace) -> int:
    registry = default_registry()
    corpus_text = _read(args.corpus)
    corpus = load_corpus(corpus_text, registry) if corpus_text else default_corpus(registry)
    stats, cases = run_translation_eval(corpus, _backend(args.backend), _ablation(args.ablation))
    write_translation_outputs(args.out, stats, cases)
    sys.stdout.write(format_stats_table([stats]))
    sys.stdout.write(
        f"accuracy {stats.accuracy_fraction} = {stats.accuracy_pct:.1f}% "
        f"(outputs in {args.out})\n"
    )
    return 0


def cmd_eval_scenario(args: argparse.Namespace) -> int:
    schedule_text = _read(args.schedule)
    schedule = load_schedule(schedule_text) if schedule_text else default_schedule()

    def factory():
        return build_pipeline(
            backend_name=args.backend,
            map_text=_read(args.map),
            registry_text=_read(args.registry),
            ablation=_ablation(args.ablation),
        )

    report = run_scenario_eval(args.runs, schedule, factory)
    write_scenario_outputs(args.out, report)
    sys.stdout.write(
        f"TSR {report.as_dict()['tsr_fraction']} = {report.tsr_pct:.1f}%  "
        f"execution median {report.execution_ms['median']:.3f} ms  "
        f"feedback median {report.feedback_s['median']:.3f} s\n"
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="avcopilot", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP/WS service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--map", help="map file (default: shipped map)")
    serve.add_argument("--registry", help="registry file (default: shipped registry)")
    serve.add_argument("--log-dir", help="session log directory")
    serve.add_argument("--frontend", help="static console assets to serve at /")
    _add_backend_args(serve)
    serve.set_defaults(func=cmd_serve)

    evalp = sub.add_parser("eval", help="run an evaluation")
    evalsub = evalp.add_subparsers(dest="experiment", required=True)

    translate = evalsub.add_parser("translate", help="translation accuracy/latency eval")
    translate.add_argument("--corpus", help="corpus file (default: shipped corpus)")
    translate.add_argument("--out", required=True)
    _add_backend_args(translate)
    translate.set_defaults(func=cmd_eval_translate)

    scenario = evalsub.add_parser("scenario", help="N-run scripted scenario reliability eval")
    scenario.add_argument("--runs", type=int, required=True)
    scenario.add_argument("--schedule", help="schedule file (default: shipped schedule)")
    scenario.add_argument("--map", help="map file (default: shipped map)")
    scenario.add_argument("--registry", help="registry file (default: shipped registry)")
    scenario.add_argument("--out", required=True)
    _add_backend_args(scenario)
    scenario.set_defaults(func=cmd_eval_scenario)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
