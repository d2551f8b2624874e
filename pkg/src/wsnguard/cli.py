from __future__ import annotations

import json
import logging
from pathlib import Path

import typer

from wsnguard_core.config import (
    ScenarioParseError,
    ScenarioValidationError,
    load_scenario,
    scenario_json_schema,
)
from wsnguard_core.experiments import (
    build_attack_matrix,
    build_energy_report,
    diff_against_expected,
    render_asymmetric_table,
    render_cipher_table,
    render_comparisons,
    render_diff,
    render_flow_table,
    render_matrix_table,
    render_simulated_table,
    render_totals_table,
    run_simulation,
    write_attack_matrix,
    write_energy_report,
)
from wsnguard_core.netsim.topology import InvalidConfig

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s %(levelname)s %(name)s %(message)s",
)
logger = logging.getLogger(__name__)

EXIT_FAILURE = 1
EXIT_INVALID_SCENARIO = 2
EXIT_IO_ERROR = 3

app = typer.Typer(help="wsnguard: wireless sensor network security simulator")


def _set_quiet(quiet: bool) -> None:
    logging.getLogger().setLevel(logging.WARNING if quiet else logging.INFO)


def _fail(message: str, *, code: int) -> typer.Exit:
    typer.echo(message, err=True)
    return typer.Exit(code=code)


@app.command("simulate")
def simulate(
    scenario_path: Path = typer.Option(
        ...,
        "--scenario",
        help="Scenario JSON file.",
    ),
    out_dir: Path = typer.Option(
        Path("out/simulate"),
        "--out",
        help="Directory for metrics.csv, summary.json and detection.csv.",
    ),
    seed: int | None = typer.Option(
        None,
        "--seed",
        min=0,
        help="Override the scenario seed.",
    ),
    quiet: bool = typer.Option(False, "--quiet", help="Only warnings on stderr, no tables."),
) -> None:
    """Run one scenario and write its metrics."""
    _set_quiet(quiet)
    try:
        scenario = load_scenario(scenario_path)
        artifacts = run_simulation(scenario, out_dir=out_dir, seed=seed)
    except (ScenarioParseError, ScenarioValidationError, InvalidConfig) as exc:
        raise _fail(str(exc), code=EXIT_INVALID_SCENARIO) from exc
    except OSError as exc:
        raise _fail(f"io error: {exc}", code=EXIT_IO_ERROR) from exc
    except Exception as exc:
        logger.exception("simulate failed scenario=%s", scenario_path)
        raise _fail(f"simulation failed: {exc}", code=EXIT_FAILURE) from exc

    report = artifacts.report
    logger.info(
        "simulate done scenario=%s seed=%d delivered=%d dropped=%d",
        scenario.name,
        report.seed,
        report.total("packets_delivered"),
        report.total("packets_dropped"),
    )
    if quiet:
        return
    if report.flows:
        typer.echo(render_flow_table(report))
        typer.echo("")
    typer.echo(render_totals_table(report))
    typer.echo(f"metrics={artifacts.metrics_csv}")
    typer.echo(f"summary={artifacts.summary_json}")
    if artifacts.detection_csv is not None:
        typer.echo(f"detection={artifacts.detection_csv}")


@app.command("attack-matrix")
def attack_matrix(
    out_dir: Path = typer.Option(
        Path("out/attack_matrix"),
        "--out",
        help="Directory for attack_matrix.json and attack_matrix.csv.",
    ),
    disable_attacks: bool = typer.Option(
        False,
        "--disable-attacks",
        help="Run every cell without attackers (sanity baseline).",
    ),
    quiet: bool = typer.Option(False, "--quiet", help="Only warnings on stderr, no tables."),
) -> None:
    """Run the routing attacks against DSR and AODV on the canonical grid."""
    _set_quiet(quiet)
    matrix = build_attack_matrix(attacks_enabled=not disable_attacks)
    try:
        json_path, csv_path = write_attack_matrix(matrix, out_dir)
    except OSError as exc:
        raise _fail(f"io error: {exc}", code=EXIT_IO_ERROR) from exc

    mismatches = diff_against_expected(matrix)
    logger.info(
        "attack matrix done attacks_enabled=%s mismatches=%d",
        matrix.attacks_enabled,
        len(mismatches),
    )
    if quiet:
        return
    typer.echo(render_matrix_table(matrix))
    typer.echo("")
    typer.echo(render_diff(mismatches))
    typer.echo(f"matrix_json={json_path}")
    typer.echo(f"matrix_csv={csv_path}")


@app.command("energy-report")
def energy_report(
    out_dir: Path = typer.Option(
        Path("out/energy_report"),
        "--out",
        help="Directory for energy_report.json and energy_report.csv.",
    ),
    quiet: bool = typer.Option(False, "--quiet", help="Only warnings on stderr, no tables."),
) -> None:
    """Compare asymmetric and symmetric crypto energy under the preset model."""
    _set_quiet(quiet)
    report = build_energy_report()
    try:
        json_path, csv_path = write_energy_report(report, out_dir)
    except OSError as exc:
        raise _fail(f"io error: {exc}", code=EXIT_IO_ERROR) from exc

    logger.info("energy report done cheapest_key_exchange=%s", report.cheapest_key_exchange)
    if quiet:
        return
    typer.echo(render_asymmetric_table(report))
    typer.echo("")
    typer.echo(render_cipher_table(report))
    typer.echo("")
    typer.echo(render_comparisons(report))
    typer.echo("")
    typer.echo(render_simulated_table(report))
    typer.echo(f"energy_json={json_path}")
    typer.echo(f"energy_csv={csv_path}")


@app.command("validate")
def validate(
    scenario_path: Path = typer.Option(
        ...,
        "--scenario",
        help="Scenario JSON file.",
    ),
    quiet: bool = typer.Option(False, "--quiet", help="Exit code only."),
) -> None:
    """Parse and validate a scenario without running it."""
    _set_quiet(quiet)
    try:
        scenario = load_scenario(scenario_path)
    except (ScenarioParseError, ScenarioValidationError) as exc:
        raise _fail(str(exc), code=EXIT_INVALID_SCENARIO) from exc
    except OSError as exc:
        raise _fail(f"io error: {exc}", code=EXIT_IO_ERROR) from exc

    if quiet:
        return
    typer.echo(
        f"scenario ok name={scenario.name} motes={len(scenario.topology.mote_ids())} "
        f"attackers={len(scenario.attackers)} traffic={len(scenario.traffic)}"
    )


@app.command("schema")
def schema(
    out_path: Path | None = typer.Option(
        None,
        "--out",
        help="Write the scenario JSON Schema here instead of standard output.",
    ),
) -> None:
    """Print the scenario JSON Schema."""
    text = json.dumps(scenario_json_schema(), ensure_ascii=False, indent=2) + "\n"
    if out_path is None:
        typer.echo(text, nl=False)
        return
    try:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise _fail(f"io error: {exc}", code=EXIT_IO_ERROR) from exc
    logger.info("schema written path=%s", out_path)


def main() -> None:
    """CLI entrypoint."""
    app()
