"""Command line front end.

Runs in-process by default; with ``--url`` it becomes a thin client of a
running service (``actbridge serve``).

Exit codes: 0 success (for ``check``: satisfactory), 2 unsatisfactory, 1 error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .abox import parse_triples
from .codec import RawMessage, Syntax
from .ec import parse_observations, sorted_obs
from .mediator import Mediator, StageError, SystemRegistry, run_harness
from .mediator.registry import DEFAULT_REGISTRY
from .ontology import load_many, realize


def _read(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")


def _post(url: str, endpoint: str, payload: dict) -> dict:
    import httpx

    resp = httpx.post(url.rstrip("/") + endpoint, json=payload, timeout=30.0)
    data = resp.json()
    if resp.status_code != 200:
        stage = f" ({data['stage']})" if data.get("stage") else ""
        raise RuntimeError(f"{data.get('error', resp.text)}{stage}")
    return data


def _raw(registry: SystemRegistry, source: str, text: str, syntax: Optional[str]) -> RawMessage:
    return RawMessage(Syntax.parse(syntax) if syntax else registry.system(source).default_syntax, text)


def cmd_convert(args: argparse.Namespace) -> int:
    text = _read(args.inp)
    if args.url:
        data = _post(args.url, "/convert", {"from": args.source, "to": args.target, "message": text,
                                             "syntax": args.syntax})
        sys.stdout.write(data["message"])
        if args.trace:
            print(f"# stages: {' '.join(data['provenance']['stages'])}", file=sys.stderr)
        return 0
    registry = SystemRegistry.load(args.config)
    with Mediator(registry, log=(lambda line: print(line, file=sys.stderr)) if args.trace else None) as med:
        result = med.convert(_raw(registry, args.source, text, args.syntax), args.source, args.target)
    assert result.raw is not None
    sys.stdout.write(result.raw.text)
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    text = _read(args.inp)
    gamma_text = _read(args.gamma) if args.gamma else ""
    if args.url:
        gamma = [o.render() for o in sorted_obs(parse_observations(gamma_text))]
        data = _post(args.url, "/check", {"from": args.source, "to": args.target, "message": text,
                                           "syntax": args.syntax, "gamma": gamma, "trace": args.trace})
        sys.stdout.write(data["report"])
        if args.trace and data.get("trace"):
            sys.stdout.write("trace:\n" + data["trace"])
        return 0 if data["satisfactory"] else 2
    registry = SystemRegistry.load(args.config)
    with Mediator(registry) as med:
        result = med.convert(_raw(registry, args.source, text, args.syntax), args.source, args.target,
                             check_gamma=parse_observations(gamma_text), refuse=False)
    report = result.report
    assert report is not None
    sys.stdout.write(report.to_text())
    if args.trace:
        sys.stdout.write("trace:\n" + report.trace_text())
    return 0 if report.satisfactory else 2


def cmd_reason(args: argparse.Namespace) -> int:
    abox_text = _read(args.abox)
    if args.url:
        onto_text = "\n".join(_read(p) for p in args.ontology)
        data = _post(args.url, "/reason", {"ontology": onto_text, "abox": abox_text})
        sys.stdout.write(data["derived"])
        return 0
    derived = realize(load_many(args.ontology), parse_triples(abox_text))
    sys.stdout.write(derived.to_text())
    return 0


def cmd_harness(args: argparse.Namespace) -> int:
    result = run_harness(args.config, args.scenario, transport=args.transport, transcript_path=args.transcript)
    if args.trace or not args.transcript:
        sys.stdout.write(result.transcript_text())
    for key, inbox in result.deliveries.items():
        for raw in inbox:
            print(f"# delivered to {key}", file=sys.stderr)
            print(raw.text, file=sys.stderr)
    return result.status


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(args.config), host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="actbridge", description="Convert agent messages between systems.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=str(DEFAULT_REGISTRY), help="system registry file")
    common.add_argument("--url", help="use a running service instead of converting in-process")
    common.add_argument("--trace", action="store_true", help="dump derivations / pipeline stages")
    sub = parser.add_subparsers(dest="command", required=True)

    def routed(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--from", dest="source", required=True)
        p.add_argument("--to", dest="target", required=True)
        p.add_argument("--in", dest="inp", required=True, help="message file, '-' for stdin")
        p.add_argument("--syntax", help="fipa-acl, kqml or assertion-block (default: the system's)")
        return p

    routed("convert", "convert a message to the target system").set_defaults(func=cmd_convert)
    check = routed("check", "decide whether the conversion is satisfactory")
    check.add_argument("--gamma", help="observations at t0, one per line")
    check.set_defaults(func=cmd_check)

    reason = sub.add_parser("reason", parents=[common], help="print the assertions an ABox entails")
    reason.add_argument("--ontology", action="append", required=True)
    reason.add_argument("--abox", required=True)
    reason.set_defaults(func=cmd_reason)

    harness = sub.add_parser("harness", parents=[common], help="run a scenario through per-system managers")
    harness.add_argument("--scenario", required=True)
    harness.add_argument("--transport", choices=["inproc", "tcp"])
    harness.add_argument("--transcript", help="write the transcript here")
    harness.set_defaults(func=cmd_harness)

    serve = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, LookupError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
