import argparse
import logging
import os
import socket
import sys
from typing import Any, Optional

from dotenv import load_dotenv

from core.config import get_config, reload_config
from core.errors import EXIT_FAILED_VERDICT, EXIT_OK, MaxBanditError
from core.response import error_response

dotenv_path = os.path.join(os.path.dirname(os.path.abspath(__file__)), '.env')
load_dotenv(dotenv_path=dotenv_path)
reload_config()

logger = logging.getLogger(__name__)


def configure_logging(default_level: str = "WARNING"):
    """Console logging at MAXBANDIT_LOG (or default_level), plus an optional DEBUG file log."""
    config = get_config()
    root_logger = logging.getLogger()
    logging.basicConfig(
        level=config.effective_log_level(default_level),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    root_logger.setLevel(config.effective_log_level(default_level))

    if not config.log_file:
        return
    try:
        file_handler = logging.FileHandler(config.log_file, mode='a')
        file_handler.setLevel(logging.DEBUG)
        file_formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(process)d - %(threadName)s '
            '[%(module)s.%(funcName)s:%(lineno)d] - %(message)s'
        )
        file_handler.setFormatter(file_formatter)
        root_logger.addHandler(file_handler)
        root_logger.setLevel(logging.DEBUG)
        logger.debug(f"Detailed file logging configured to: {config.log_file}")
    except Exception as e:
        sys.stderr.write(f"CRITICAL: Failed to set up file logging to '{config.log_file}': {e}\n")


def safe_print(text):
    # Keep stdio clean when serving MCP over a pipe
    if not sys.stderr.isatty():
        logger.debug(f"[MCP Server] {text}")
        return

    try:
        print(text, file=sys.stderr)
    except UnicodeEncodeError:
        print(text.encode('ascii', errors='replace').decode(), file=sys.stderr)


def _emit(report: Any, args) -> None:
    """Print the JSON report to stdout and optionally write it to --out."""
    from harness.results_io import dumps, emit_results

    if getattr(args, "out", None):
        emit_results(report, args.format, args.out)
    sys.stdout.write(dumps(report))


def _pac(args):
    from bandit.algorithms import PacParams
    return PacParams(eps=args.eps, delta=args.delta)


def cmd_bounds(args) -> int:
    from bounds.bounds import case_comparison
    from bounds.bounds_tools import load_for_bounds

    instance = load_for_bounds(args.instance, args.eps0_override)
    verdict = case_comparison(instance, _pac(args), clamp_L=not args.no_clamp_L)
    _emit(verdict, args)
    return EXIT_OK


def cmd_simulate(args) -> int:
    from harness.harness import ExperimentSpec, run_trials
    from harness.results_io import dumps, emit_results
    from rewards.instance_io import load_instance

    spec = ExperimentSpec(
        instance=load_instance(args.instance),
        pac=_pac(args),
        algorithm=args.alg,
        trials=args.trials,
        master_seed=args.seed,
        workers=args.workers,
        max_samples=args.max_samples,
        clamp_L=not args.no_clamp_L,
        literal_argument=args.literal_me_argument,
    )
    per_trial_csv = args.out if args.out and args.format == "csv" else None
    report = run_trials(spec, per_trial_csv)
    if args.out and args.format == "json":
        emit_results(report, "json", args.out)
    sys.stdout.write(dumps(report))
    return EXIT_OK if report.passed else EXIT_FAILED_VERDICT


def cmd_examples(args) -> int:
    from harness.harness import reproduce_examples

    table = reproduce_examples(args.eps0)
    _emit(table, args)
    return EXIT_OK if table.passed else EXIT_FAILED_VERDICT


def cmd_verify_assumption(args) -> int:
    from rewards.rewards_tools import verify_instance_arms

    data = verify_instance_arms(args.instance, args.grid)
    _emit({"kind": "assumption_check", **data}, args)
    return EXIT_OK if data["passed"] else EXIT_FAILED_VERDICT


def cmd_adversarial(args) -> int:
    from adversarial.adversarial_instances import build_adversarial_report
    from rewards.instance_io import load_instance

    report = build_adversarial_report(load_instance(args.instance), _pac(args))
    _emit({"kind": "adversarial", **report}, args)
    return EXIT_OK if report["passed"] else EXIT_FAILED_VERDICT


def cmd_serve(args) -> int:
    from core.server import package_version, server, set_transport_mode

    config = get_config()
    port = config.port
    base_uri = config.base_uri

    safe_print("🎰 maxbandit MCP Server")
    safe_print("=" * 35)
    safe_print("📋 Server Information:")
    safe_print(f"   📦 Version: {package_version()}")
    safe_print(f"   🌐 Transport: {args.transport}")
    if args.transport == 'streamable-http':
        safe_print(f"   🔗 URL: {base_uri}:{port}")
    safe_print(f"   🐍 Python: {sys.version.split()[0]}")
    safe_print("")

    safe_print("⚙️ Active Configuration:")
    for key, value in config.get_environment_summary().items():
        safe_print(f"   - {key}: {value}")
    safe_print("")

    # Import tool modules to register them with the MCP server via decorators
    tool_imports = {
        'rewards': lambda: __import__('rewards.rewards_tools'),
        'bounds': lambda: __import__('bounds.bounds_tools'),
        'adversarial': lambda: __import__('adversarial.adversarial_tools'),
        'harness': lambda: __import__('harness.harness_tools'),
    }
    tool_descriptions = {
        'rewards': '📈 Rewards - tail assumption checks',
        'bounds': '📐 Bounds - sample-complexity bounds and case comparison',
        'adversarial': '🧪 Adversarial - lower-bound constructions',
        'harness': '🎲 Harness - Monte-Carlo trials and worked examples',
    }
    tools_to_import = args.tools if args.tools else list(tool_imports.keys())

    safe_print(f"🛠️  Loading {len(tools_to_import)} tool module{'s' if len(tools_to_import) != 1 else ''}:")
    for tool in tools_to_import:
        tool_imports[tool]()
        safe_print(f"   {tool_descriptions[tool]}")
    safe_print("")

    try:
        set_transport_mode(args.transport)
        if args.transport == 'streamable-http':
            try:
                with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as s:
                    s.bind((socket.gethostbyname(""), port))
            except OSError as e:
                safe_print(f"Socket error: {e}")
                safe_print(f"❌ Port {port} is already in use. Cannot start HTTP server.")
                return EXIT_FAILED_VERDICT
            safe_print(f"🚀 Starting HTTP server on {base_uri}:{port}")
            safe_print("✅ Ready for MCP connections")
            server.run(transport="streamable-http", host="0.0.0.0", port=port)
        else:
            safe_print("🚀 Starting STDIO server")
            safe_print("✅ Ready for MCP connections")
            server.run()
    except KeyboardInterrupt:
        safe_print("\n👋 Server shutdown requested")
    except Exception as e:
        safe_print(f"\n❌ Server error: {e}")
        logger.error(f"Unexpected error running server: {e}", exc_info=True)
        return EXIT_FAILED_VERDICT
    return EXIT_OK


def _add_pac_arguments(parser: argparse.ArgumentParser):
    parser.add_argument('--eps', type=float, required=True, help='Accuracy eps > 0')
    parser.add_argument('--delta', type=float, required=True, help='Confidence delta in (0, 1)')


def _add_output_arguments(parser: argparse.ArgumentParser):
    parser.add_argument('--out', help='Also write the report to this path')
    parser.add_argument('--format', choices=['csv', 'json'], default='json',
                        help='File format for --out (default: json)')


def build_parser() -> argparse.ArgumentParser:
    config = get_config()
    parser = argparse.ArgumentParser(
        prog='maxbandit',
        description='PAC search for the maximal reward among K arms: bounds, simulation and lower-bound constructions',
    )
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('bounds', help='Evaluate every bound for an instance and compare the two models')
    p.add_argument('--instance', required=True, help='Instance JSON file')
    _add_pac_arguments(p)
    p.add_argument('--eps0-override', type=float, default=None, help="Replace the instance's eps0")
    p.add_argument('--no-clamp-L', action='store_true', help='Do not lift L to 10')
    _add_output_arguments(p)
    p.set_defaults(handler=cmd_bounds)

    p = sub.add_parser('simulate', help='Monte-Carlo correctness run')
    p.add_argument('--instance', required=True, help='Instance JSON file')
    p.add_argument('--alg', required=True, choices=['max-cb', 'me', 'unified'])
    _add_pac_arguments(p)
    p.add_argument('--trials', type=int, default=config.default_trials)
    p.add_argument('--seed', type=int, required=True, help='Master seed (64-bit unsigned)')
    p.add_argument('--workers', type=int, default=config.default_workers)
    p.add_argument('--max-samples', type=int, default=config.max_samples,
                   help='Refuse unified-arm runs needing more draws than this')
    p.add_argument('--no-clamp-L', action='store_true', help='Do not lift L to 10 for Max-CB')
    p.add_argument('--literal-me-argument', action='store_true',
                   help='Evaluate the Maximal Eliminator radius at (2^t - 1/2) n0')
    _add_output_arguments(p)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser('examples', help='Reproduce the two 10^4-arm worked examples')
    p.add_argument('--eps0', type=float, default=25.0, help='eps0 for the examples (default: 25)')
    _add_output_arguments(p)
    p.set_defaults(handler=cmd_examples)

    p = sub.add_parser('verify-assumption', help='Check the tail assumption for every arm')
    p.add_argument('--instance', required=True, help='Instance JSON file')
    p.add_argument('--grid', type=int, default=64, help='Grid size (default: 64)')
    _add_output_arguments(p)
    p.set_defaults(handler=cmd_verify_assumption)

    p = sub.add_parser('adversarial', help='Build and verify the lower-bound constructions')
    p.add_argument('--instance', required=True, help='Instance JSON file')
    _add_pac_arguments(p)
    _add_output_arguments(p)
    p.set_defaults(handler=cmd_adversarial)

    p = sub.add_parser('serve', help='Run the MCP server')
    p.add_argument('--transport', choices=['stdio', 'streamable-http'], default='stdio',
                   help='Transport mode: stdio (default) or streamable-http')
    p.add_argument('--tools', nargs='*', choices=['rewards', 'bounds', 'adversarial', 'harness'],
                   help='Specify which tools to register. If not provided, all tools are registered.')
    p.set_defaults(handler=cmd_serve)
    return parser


def main(argv: Optional[list] = None) -> int:
    """
    Main entry point for the maxbandit CLI and MCP server.
    """
    args = build_parser().parse_args(argv)
    configure_logging("INFO" if args.command == "serve" else "WARNING")
    try:
        return args.handler(args)
    except MaxBanditError as e:
        logger.debug(f"{args.command} failed: {e}", exc_info=True)
        sys.stderr.write(error_response(e.error_code, e.description, e.exit_code) + "\n")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
