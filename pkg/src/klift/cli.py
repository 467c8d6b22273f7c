"""
Command line front end for klift.

    klift verify  --config run.json [--out report.json]
    klift falsify --config run.json --perturb b1=+0.05 [--out report.json]
    klift sweep   --config run.json --param c --range -1:1:0.25 [--out sweep.csv]

Exit codes: 0 success, 1 a check failed (or a falsification did not trigger),
2 invalid configuration or arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from klift import __version__
from klift.config import Perturbation, Settings, load_config
from klift.errors import ConfigParseError, KliftError, PerturbationTooSmall
from klift.verifier import VerificationReport, falsify, parse_range, run_suite, sweep

logger = logging.getLogger("klift")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

console = Console(stderr=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="klift",
        description="Verify Kahler structures of general natural lift type on cotangent bundles of space forms",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"klift {__version__}")
    parser.add_argument("--verbose", "-v", action="count", default=0, help="More logging (-v info, -vv debug)")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="Run every check of the Kahler chain")
    verify.add_argument("--config", "-c", required=True, help="Path to the JSON run configuration")
    verify.add_argument("--out", "-o", default=None, help="Report path (default: stdout)")

    fals = sub.add_parser("falsify", help="Perturb one coefficient and require the targeted check to fail")
    fals.add_argument("--config", "-c", required=True, help="Path to the JSON run configuration")
    fals.add_argument(
        "--perturb",
        "-p",
        required=True,
        help="name=delta with name in b1, b3, mu (additive) or c1-scale, lambda-scale (factor)",
    )
    fals.add_argument("--out", "-o", default=None, help="Report path (default: stdout)")

    sw = sub.add_parser("sweep", help="Tabulate residuals over a parameter range")
    sw.add_argument("--config", "-c", required=True, help="Path to the JSON run configuration")
    sw.add_argument("--param", required=True, help="t, c, or a curve parameter such as a1.coeffs.1 or lambda.k")
    sw.add_argument("--range", dest="range_", required=True, help="start:stop:step")
    sw.add_argument("--out", "-o", default=None, help="CSV path (default: stdout)")
    return parser


def _configure_logging(verbose: int, settings: Settings) -> None:
    if verbose >= 2:
        level: Any = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = settings.log_level
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")


def _format_residual(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.3e}"


def render_report(report: VerificationReport) -> None:
    """Print a summary table and the verdict panel on stderr."""
    table = Table(title="Checks")
    table.add_column("Check", style="cyan")
    table.add_column("Max residual", justify="right")
    table.add_column("Tolerance", justify="right")
    table.add_column("Within", justify="right")
    table.add_column("Skipped", justify="right")
    table.add_column("Status")
    for result in report.checks:
        if result.inconclusive:
            status = Text("inconclusive", style="yellow")
        elif result.passed:
            status = Text("pass", style="green")
        else:
            status = Text("FAIL", style="bold red")
        table.add_row(
            result.name,
            _format_residual(result.max_residual),
            f"{result.tolerance:g}",
            f"{result.points_within}/{result.evaluated}",
            str(result.skipped_points),
            status,
        )
    console.print(table)

    lines = Text()
    for name, value in report.verdicts.model_dump().items():
        lines.append(f"{name:<15}", style="bold")
        lines.append("yes\n" if value else "no\n", style="green" if value else "red")
    if report.falsification is not None:
        f = report.falsification
        lines.append(
            f"\nperturbation {f.perturbation} -> {f.target} residual {_format_residual(f.residual)} "
            f"(floor {f.floor:g})",
            style="green" if f.succeeded else "red",
        )
        if f.untargeted_algebraic_passed is False:
            lines.append("\nuntargeted algebraic checks also failed", style="yellow")
    console.print(Panel(lines, title="Verdicts", expand=False))


def cmd_verify(args: argparse.Namespace, settings: Settings) -> int:
    config = load_config(args.config)
    report = run_suite(config, settings=settings)
    _write(report.to_json(), args.out)
    render_report(report)
    return EXIT_OK if report.all_passed else EXIT_FAILED


def cmd_falsify(args: argparse.Namespace, settings: Settings) -> int:
    config = load_config(args.config)
    perturbation = Perturbation.parse(args.perturb)
    try:
        report = falsify(config, perturbation, settings=settings)
    except PerturbationTooSmall as e:
        if e.report is not None:
            _write(e.report.to_json(), args.out)
            render_report(e.report)
        console.print(f"[red]Error:[/red] {e}")
        return EXIT_FAILED
    _write(report.to_json(), args.out)
    render_report(report)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    config = load_config(args.config)
    values = parse_range(args.range_)
    rows = sweep(config, args.param, values, settings=settings)

    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    _write(buffer.getvalue(), args.out)
    console.print(f"[green]{len(rows)} rows[/green] for {args.param} over {args.range_}")
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "falsify": cmd_falsify,
    "sweep": cmd_sweep,
}


def _attach_range_value(argv: Sequence[str]) -> list[str]:
    """Rewrite ``--range -1:1:0.25`` as ``--range=-1:1:0.25`` so a negative start is not read as an option."""
    args = list(argv)
    out: list[str] = []
    i = 0
    while i < len(args):
        if args[i] == "--range" and i + 1 < len(args) and args[i + 1].startswith("-") and ":" in args[i + 1]:
            out.append(f"--range={args[i + 1]}")
            i += 2
            continue
        out.append(args[i])
        i += 1
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point for the ``klift`` command."""
    parser = build_parser()
    args = parser.parse_args(_attach_range_value(sys.argv[1:] if argv is None else argv))

    try:
        settings = Settings.from_env()
    except ConfigParseError as e:
        console.print(f"[red]Error:[/red] {e}")
        return EXIT_CONFIG
    _configure_logging(args.verbose, settings)

    try:
        return COMMANDS[args.command](args, settings)
    except ConfigParseError as e:
        console.print(f"[red]Error:[/red] {e}")
        return EXIT_CONFIG
    except KliftError as e:
        console.print(f"[red]Error:[/red] {type(e).__name__}: {e}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
