"""``vaqc`` command line: parse, optimize, analyze, select, transpile, simulate,
qaoa, vqe and serve.

Exit codes: 0 success, 1 domain error (``<stage>: message`` on stderr),
2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analyzer, codegen, hybrid, optimizer, service, simulator, transpiler, vaql


class StageError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise StageError("input", str(exc)) from None


def _load_circuit(path: str):
    try:
        return vaql.parse_vaql(_read(path))
    except vaql.SourceError as exc:
        raise StageError("parse", f"{path}:{exc}") from None


def _load_registry(path: str):
    try:
        return analyzer.load_registry(path)
    except (OSError, ValueError, TypeError, KeyError) as exc:
        raise StageError("registry", str(exc)) from None


def _emit_json(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def cmd_parse(args) -> None:
    sys.stdout.write(vaql.print_vaql(_load_circuit(args.file)))


def cmd_optimize(args) -> None:
    res = optimizer.optimize(_load_circuit(args.file), args.objective)
    text = vaql.print_vaql(res.circuit)
    if args.report:
        _emit_json({"circuit": text, "remap": {str(k): v for k, v in sorted(res.remap.items())},
                    "reports": [r.to_dict() for r in res.reports]})
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> None:
    _emit_json(analyzer.profile(_load_circuit(args.file)).to_dict())


def cmd_select(args) -> None:
    circuit = _load_circuit(args.file)
    registry = _load_registry(args.backends)
    result = analyzer.select_backend(circuit, registry, args.objective, args.shots, args.trust)
    _emit_json(result.to_dict())


def cmd_transpile(args) -> None:
    circuit = _load_circuit(args.file)
    registry = _load_registry(args.backends)
    backend = next((b for b in registry if b.id == args.backend), None)
    if backend is None:
        raise StageError("select", f"unknown backend id {args.backend!r}")
    try:
        program = transpiler.transpile(circuit, backend)
    except transpiler.TranspileError as exc:
        raise StageError(f"transpile/{exc.stage}", exc.message) from None
    if args.emit == "vaql":
        sys.stdout.write(vaql.print_vaql(program.circuit))
    elif args.emit == "json":
        sys.stdout.write(program.to_json() + "\n")
    else:
        sys.stdout.write(codegen.EMITTERS[args.emit](program))


def cmd_simulate(args) -> None:
    circuit = _load_circuit(args.file)
    try:
        hist = simulator.execute(circuit, args.shots, args.seed)
    except simulator.SimulationError as exc:
        raise StageError("simulate", str(exc)) from None
    sys.stdout.write(hist.to_json() + "\n")


def cmd_qaoa(args) -> None:
    try:
        graph = hybrid.Graph.from_json(args.graph)
        result = hybrid.run_qaoa(graph, args.p, args.grid, args.shots, args.seed)
    except (OSError, ValueError, KeyError) as exc:
        raise StageError("qaoa", str(exc)) from None
    sys.stdout.write(result.to_json() + "\n")


def cmd_vqe(args) -> None:
    try:
        obs = hybrid.Observable.from_json(args.observable)
        result = hybrid.run_vqe(obs, args.reps, args.restarts, args.seed)
    except (OSError, ValueError, TypeError) as exc:
        raise StageError("vqe", str(exc)) from None
    sys.stdout.write(result.to_json() + "\n")


def cmd_serve(args) -> None:
    registry = _load_registry(args.backends) if args.backends else []
    print(f"serving on port {args.port}", file=sys.stderr)
    service.serve(registry, args.port, args.workers, args.journal)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vaqc", description="Vendor-agnostic quantum circuit toolchain.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="reprint a .vaql file in canonical form")
    p.add_argument("file")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("optimize", help="hardware-independent optimization")
    p.add_argument("file")
    p.add_argument("--objective", choices=["size", "depth"], default="size")
    p.add_argument("--report", action="store_true", help="emit JSON with the circuit and pass reports")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("analyze", help="circuit profile as JSON")
    p.add_argument("file")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("select", help="rank backends for a circuit")
    p.add_argument("file")
    p.add_argument("--backends", required=True)
    p.add_argument("--objective", choices=["success", "cost"], default="success")
    p.add_argument("--shots", type=int, default=1024)
    p.add_argument("--trust", nargs="+", metavar="VENDOR", default=None)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("transpile", help="compile for one backend")
    p.add_argument("file")
    p.add_argument("--backends", required=True)
    p.add_argument("--backend", required=True)
    p.add_argument("--emit", choices=["vaql", "qasm2", "quil", "json"], default="vaql")
    p.set_defaults(func=cmd_transpile)

    p = sub.add_parser("simulate", help="sample a measured circuit")
    p.add_argument("file")
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("qaoa", help="QAOA for MaxCut")
    p.add_argument("--graph", required=True)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--grid", type=int, default=32)
    p.add_argument("--shots", type=int, default=1024)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_qaoa)

    p = sub.add_parser("vqe", help="variational eigensolver")
    p.add_argument("--observable", required=True)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_vqe)

    p = sub.add_parser("serve", help="run the job service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--backends")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--journal")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except StageError as exc:
        print(f"{exc.stage}: {exc}", file=sys.stderr)
        return 1
    except (simulator.SimulationError, optimizer.TemplateError, analyzer.RegistryError,
            transpiler.TranspileError, hybrid.HybridError, ValueError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
