"""Command-line surface: figure sweeps, protocol runs and eavesdropping experiments.

Artefacts go to standard output (or --out); logs go to standard error. Exit codes:
0 on success, 2 on a usage error, 3 when a run or sweep fails.
"""

import argparse
import csv
import io
import json
import math
import sys
from collections.abc import Sequence
from pathlib import Path

from pydantic import ValidationError

from vopqkd.cli.models import OutputFormat, RunReport, Surface, SweepSpec
from vopqkd.config import Settings
from vopqkd.errors import InvalidArgumentError, VopqkdError
from vopqkd.models import DetectionStrategy, Encoding, EveMode, ProtocolKind
from vopqkd.quantum.channel import LossModel
from vopqkd.quantum.hilbert import make_state
from vopqkd.services.protocol import (
    EavesdropperTest,
    ProtocolConfig,
    detect_eavesdropper,
    effectiveness_report,
    run_protocol,
)
from vopqkd.services.sweeps import SweepTable, gamma0_curve, kmax_grid, loss_limits
from vopqkd.utils.logging import get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FAILURE = 3

DEFAULT_THETA = math.pi / 8
NA = "NA"

CellValue = float | int | str | None


def format_cell(value: CellValue) -> str:
    """CSV text for one cell: 17 significant digits, NA for missing values."""
    if value is None:
        return NA
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def render_csv(header: Sequence[str], rows: Sequence[Sequence[CellValue]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(cell) for cell in row])
    return buffer.getvalue()


def _json_cell(value: CellValue) -> CellValue:
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def render_table(table: SweepTable, fmt: OutputFormat) -> str:
    if fmt is OutputFormat.CSV:
        return render_csv(table.header, table.rows)
    rows = [
        {name: _json_cell(cell) for name, cell in zip(table.header, row)} for row in table.rows
    ]
    return json.dumps(rows, indent=2) + "\n"


def render_report(report: RunReport, fmt: OutputFormat) -> str:
    if fmt is OutputFormat.JSON:
        return report.model_dump_json(indent=2) + "\n"
    values = report.model_dump()
    return render_csv(list(values), [list(values.values())])


def write_output(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.write_text(text, encoding="utf-8", newline="\n")


def cmd_sweep(spec: SweepSpec) -> str:
    """Generate the requested figure data and write it; returns the rendered text."""
    logger.info("Starting sweep", surface=spec.surface.value)
    if spec.surface is Surface.KMAX_PVM:
        table = kmax_grid(DetectionStrategy.PVM, spec.grid_resolution)
    elif spec.surface is Surface.KMAX_POVM:
        table = kmax_grid(DetectionStrategy.POVM, spec.grid_resolution)
    elif spec.surface is Surface.LOSS_LIMITS:
        table = loss_limits(
            spec.cos2_theta0,
            spec.alpha,
            spec.detection,
            spec.points,
            spec.curve_min,
            spec.curve_max,
            spec.scan_step,
            spec.xtol,
        )
    else:
        table = gamma0_curve(spec.cos2_theta0, spec.points, spec.curve_min, spec.curve_max)
    text = render_table(table, spec.format)
    write_output(text, spec.out)
    logger.info(
        "Sweep complete",
        surface=spec.surface.value,
        rows=len(table.rows),
        path=str(spec.out) if spec.out else "<stdout>",
    )
    return text


def build_report(
    config: ProtocolConfig,
    significance: float | None = None,
    expected_gamma: float | None = None,
) -> RunReport:
    """Run the protocol and summarise it; with a significance, also test for Eve.

    `expected_gamma` defaults to the configured channel loss.
    """
    transcript = run_protocol(config)
    estimates = effectiveness_report(transcript)
    test: EavesdropperTest | None = None
    if significance is not None:
        honest_gamma = config.loss.gamma if expected_gamma is None else expected_gamma
        test = detect_eavesdropper(transcript, honest_gamma, significance)
    psi0, psi1 = config.psi0, config.psi1
    return RunReport(
        protocol=config.protocol.value,
        encoding=config.encoding.value,
        detection=config.detection.value if config.protocol is ProtocolKind.B92 else None,
        theta0=psi0.theta if psi0 else None,
        theta1=psi1.theta if psi1 else None,
        phi0=psi0.phi if psi0 else None,
        phi1=psi1.phi if psi1 else None,
        gamma=config.loss.gamma,
        alpha=config.loss.alpha,
        length=config.loss.length,
        eve=config.eve.value,
        seed=config.seed,
        n_q=transcript.n_q,
        n_b=transcript.n_b,
        n_err=transcript.n_err,
        n_p_expected=transcript.n_p_expected,
        n_p_sampled=transcript.n_p_sampled,
        h=estimates.h,
        h_se=estimates.h_se,
        k_expected=estimates.k_expected,
        k_expected_se=estimates.k_expected_se,
        k_sampled=estimates.k_sampled,
        k_sampled_se=estimates.k_sampled_se,
        observed_arrival_rate=transcript.observed_arrival_rate,
        eve_blocking_fraction=(
            transcript.eve_blocked / transcript.n_q
            if config.eve is EveMode.INTERCEPT_RESEND
            else None
        ),
        verdict=test.verdict.value if test else None,
        non_arrivals=test.non_arrivals if test else None,
        loss_threshold=test.threshold if test else None,
        significance=test.significance if test else None,
        digest=transcript.digest(),
    )


def cmd_simulate(
    config: ProtocolConfig,
    fmt: OutputFormat,
    out: Path | None,
    significance: float | None = None,
) -> RunReport:
    """Run one protocol and write its report. Eve runs are also tested for loss excess."""
    if config.eve is EveMode.ABSENT:
        significance = None
    report = build_report(config, significance)
    write_output(render_report(report, fmt), out)
    return report


def cmd_eve(
    config: ProtocolConfig,
    fmt: OutputFormat,
    out: Path | None,
    significance: float,
    expected_gamma: float | None = None,
) -> RunReport:
    """Run B92 and write a report carrying the eavesdropper verdict."""
    report = build_report(config, significance, expected_gamma)
    logger.info(
        "Eavesdropping experiment complete",
        eve=config.eve.value,
        verdict=report.verdict,
        blocking_fraction=report.eve_blocking_fraction,
    )
    write_output(render_report(report, fmt), out)
    return report


def _add_run_flags(parser: argparse.ArgumentParser, settings: Settings) -> None:
    parser.add_argument(
        "--encoding", choices=[e.value for e in Encoding], default=Encoding.VOPQ.value
    )
    parser.add_argument(
        "--detection",
        choices=[d.value for d in DetectionStrategy],
        default=DetectionStrategy.PVM.value,
    )
    parser.add_argument("--theta0", type=float, default=DEFAULT_THETA, help="radians")
    parser.add_argument("--theta1", type=float, default=-DEFAULT_THETA, help="radians")
    parser.add_argument("--phi0", type=float, default=0.0, help="radians")
    parser.add_argument("--phi1", type=float, default=0.0, help="radians")
    parser.add_argument("--gamma", type=float, default=None, help="photon-loss probability")
    parser.add_argument("--alpha", type=float, default=None, help="fiber loss in dB/km")
    parser.add_argument("--length", type=float, default=None, help="fiber length in km")
    parser.add_argument("--n", type=int, default=settings.n_signals, help="signals to send")
    parser.add_argument("--seed", type=int, default=settings.seed)
    parser.add_argument("--significance", type=float, default=settings.significance)
    parser.add_argument(
        "--format", choices=[f.value for f in OutputFormat], default=OutputFormat.JSON.value
    )
    parser.add_argument("--out", type=Path, default=None)


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vopqkd",
        description="Effectiveness, loss limits and eavesdropping of vacuum-one-photon QKD",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="emit K_max surfaces, loss limits or gamma0 curves")
    sweep.add_argument("--surface", choices=[s.value for s in Surface], required=True)
    sweep.add_argument("--grid", type=int, default=settings.grid_resolution)
    sweep.add_argument("--points", type=int, default=settings.curve_points)
    sweep.add_argument("--cos2-theta0", type=float, default=settings.cos2_theta0)
    sweep.add_argument("--alpha", type=float, default=settings.alpha_db_per_km)
    sweep.add_argument("--min", dest="curve_min", type=float, default=settings.curve_min)
    sweep.add_argument("--max", dest="curve_max", type=float, default=settings.curve_max)
    sweep.add_argument(
        "--detection",
        choices=[d.value for d in DetectionStrategy],
        default=DetectionStrategy.PVM.value,
    )
    sweep.add_argument(
        "--format", choices=[f.value for f in OutputFormat], default=OutputFormat.CSV.value
    )
    sweep.add_argument("--out", type=Path, default=None)

    simulate = sub.add_parser("simulate", help="run BB84 or B92 and report H and K")
    simulate.add_argument(
        "--protocol", choices=[p.value for p in ProtocolKind], default=ProtocolKind.B92.value
    )
    simulate.add_argument(
        "--eve", choices=[m.value for m in EveMode], default=EveMode.ABSENT.value
    )
    _add_run_flags(simulate, settings)

    eve = sub.add_parser("eve", help="run B92 against an intercept-resend eavesdropper")
    eve.add_argument(
        "--eve", choices=[m.value for m in EveMode], default=EveMode.INTERCEPT_RESEND.value
    )
    eve.add_argument(
        "--expected-gamma",
        type=float,
        default=None,
        help="honest loss assumed by the test (default: the channel loss)",
    )
    _add_run_flags(eve, settings)
    return parser


def _loss_from_args(args: argparse.Namespace) -> LossModel:
    if args.gamma is not None and (args.alpha is not None or args.length is not None):
        raise InvalidArgumentError("give either --gamma or --alpha with --length, not both")
    if (args.alpha is None) != (args.length is None):
        raise InvalidArgumentError("--alpha and --length must be given together")
    if args.alpha is not None:
        return LossModel.from_fiber(args.alpha, args.length)
    if args.gamma is not None:
        return LossModel(args.gamma)
    return LossModel.lossless()


def config_from_args(args: argparse.Namespace, protocol: ProtocolKind) -> ProtocolConfig:
    """Build a protocol configuration from parsed run flags.

    Raises:
        InvalidArgumentError: If the flags do not describe a valid configuration.
    """
    is_b92 = protocol is ProtocolKind.B92
    return ProtocolConfig(
        protocol=protocol,
        encoding=Encoding(args.encoding),
        detection=DetectionStrategy(args.detection),
        psi0=make_state(args.theta0, args.phi0) if is_b92 else None,
        psi1=make_state(args.theta1, args.phi1) if is_b92 else None,
        loss=_loss_from_args(args),
        eve=EveMode(args.eve),
        n_signals=args.n,
        seed=args.seed,
    )


def _sweep_spec_from_args(args: argparse.Namespace, settings: Settings) -> SweepSpec:
    return SweepSpec(
        surface=Surface(args.surface),
        grid_resolution=args.grid,
        points=args.points,
        cos2_theta0=args.cos2_theta0,
        alpha=args.alpha,
        curve_min=args.curve_min,
        curve_max=args.curve_max,
        detection=DetectionStrategy(args.detection),
        scan_step=settings.scan_step,
        xtol=settings.bisection_xtol,
        format=OutputFormat(args.format),
        out=args.out,
    )


def run(argv: Sequence[str] | None, settings: Settings) -> int:
    """Parse `argv`, dispatch to a command and return the exit code."""
    parser = build_parser(settings)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        if args.command == "sweep":
            spec = _sweep_spec_from_args(args, settings)
        else:
            protocol = ProtocolKind.B92 if args.command == "eve" else ProtocolKind(args.protocol)
            config = config_from_args(args, protocol)
            if not 0.0 < args.significance < 1.0:
                raise InvalidArgumentError("--significance must lie strictly between 0 and 1")
    except (InvalidArgumentError, ValidationError) as e:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"{parser.prog}: error: {e}\n")
        return EXIT_USAGE

    try:
        if args.command == "sweep":
            cmd_sweep(spec)
        elif args.command == "simulate":
            cmd_simulate(config, OutputFormat(args.format), args.out, args.significance)
        else:
            cmd_eve(
                config,
                OutputFormat(args.format),
                args.out,
                args.significance,
                args.expected_gamma,
            )
    except VopqkdError as e:
        logger.error("Command failed", command=args.command, reason=e.reason)
        return EXIT_FAILURE
    except OSError as e:
        logger.error("Could not write output", command=args.command, error=str(e))
        return EXIT_FAILURE
    return EXIT_OK
