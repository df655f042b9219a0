"""ctxlab command line: reproduction report, hidden-variable bounds, sweeps and thresholds.

Exit codes: 0 success, 1 a reproduction check failed, 2 usage or scenario config error,
3 any other error.
"""

import json
import logging
import math
import sys
from fractions import Fraction

import click
from munch import Munch

from ctxlab.classical.behavior import evaluate_behavior_S, locally_contextual_table, uniform_table
from ctxlab.classical.hv_bounds import HVAssignment, NCAssignment, max_lhvt_total, max_noncontextual
from ctxlab.errors import ScenarioConfigError
from ctxlab.quantum.scenario import DEFAULT_CHI, SEQUENCES
from ctxlab.runner import (
    SCENARIO_KINDS,
    SWEEP_PARAMS,
    THRESHOLD_TOL,
    ScenarioConfig,
    evaluate_scenario,
    expression_for,
    find_threshold,
    reproduction_checks,
    run_sweep,
    write_sweep_csv,
)
from ctxlab.utils.trace_utils import str_exc
from ctxlab.utils.yaml_utils import yaml_dump_cozy

logger = logging.getLogger(__name__)

EXIT_FAILED, EXIT_USAGE, EXIT_INTERNAL = 1, 2, 3
EXPRESSIONS = ("T", "S", "TS", "Sprime", "TSprime", "chsh", "bellsum", "bellsum3")
MODELS = ("nchvt", "nclhvt", "lhvt", "table")


class CtxlabGroup(click.Group):
    """Maps ctxlab errors to exit codes; click's own usage errors keep exit code 2."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (click.exceptions.ClickException, click.exceptions.Exit, click.exceptions.Abort):
            raise
        except ScenarioConfigError as e:
            click.echo(str_exc(e), err=True)
            sys.exit(EXIT_USAGE)
        except Exception as e:  # pylint: disable=broad-exception-caught
            logger.debug("internal error", exc_info=True)
            click.echo(str_exc(e), err=True)
            sys.exit(EXIT_INTERNAL)


def echo_yaml(data) -> None:
    click.echo(yaml_dump_cozy(data, sort_keys=False, allow_unicode=True).strip())


@click.group(cls=CtxlabGroup)
@click.option("--verbose", "-v", is_flag=True, help="Log progress (INFO) to stderr")
@click.option("--debug", is_flag=True, help="Log details (DEBUG) to stderr")
def cli(verbose, debug):
    """Quantum values and hidden-variable bounds for Mermin-square Bell scenarios."""
    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True)


@cli.command("reproduce")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table", show_default=True)
def reproduce_command(fmt):
    """Recompute every reported quantity and compare it with its expected value."""
    checks = reproduction_checks()
    all_pass = all(c.passed for c in checks)
    if fmt == "json":
        records = [
            {"name": c.name, "paper": c.expected, "computed": c.computed, "tol": c.tol, "pass": c.passed}
            for c in checks
        ]
        click.echo(json.dumps({"checks": records, "all_pass": all_pass}))
    else:
        click.echo(f"{'name':<34} {'paper':>12} {'computed':>12} {'tol':>8}  result")
        for c in checks:
            result = "pass" if c.passed else "FAIL"
            click.echo(f"{c.name:<34} {c.expected:>12.6g} {c.computed:>12.6g} {c.tol:>8.1e}  {result}")
        click.echo(f"{sum(c.passed for c in checks)}/{len(checks)} checks pass")
    if not all_pass:
        sys.exit(EXIT_FAILED)


def witness_dict(witness) -> dict:
    if isinstance(witness, NCAssignment):
        return {"values": witness.values, "distant": witness.distant}
    if isinstance(witness, HVAssignment):
        later = {" ".join(row.sequence): list(pair) for row, pair in zip(SEQUENCES, witness.later)}
        return {"fresh": witness.fresh, "later": later, "distant": witness.distant}
    return {}


@cli.command("bounds")
@click.option("--model", type=click.Choice(MODELS), required=True, help="Classical model class")
@click.option("--expr", "expr_name", type=click.Choice(EXPRESSIONS), required=True, help="Expression to maximize")
@click.option("--which", type=click.IntRange(1, 3), default=1, show_default=True, help="CHSH inequality number")
@click.option("--partitions", type=click.IntRange(min=1), default=1, show_default=True, help="LHVT outer chunks")
def bounds_command(**kwargs):
    """Exact classical maximum of an expression, with a witness."""
    cliopt = Munch(kwargs)
    expr = expression_for(cliopt.expr_name, cliopt.which)
    report = Munch(model=cliopt.model, expression=expr.name)
    if cliopt.model == "table":
        if cliopt.expr_name not in ("S", "Sprime"):
            raise click.UsageError(f"the table model evaluates S or Sprime only, got {cliopt.expr_name}")
        attr = "s_prime_distant" if cliopt.expr_name == "Sprime" else "s_distant"
        report.update(
            value=evaluate_behavior_S(locally_contextual_table(), attr=attr),
            uniform_value=evaluate_behavior_S(uniform_table(), attr=attr),
            distant="all +1",
        )
    else:
        result = max_lhvt_total(expr, cliopt.partitions) if cliopt.model == "lhvt" else max_noncontextual(expr)
        report.update(bound=result.bound, enumerated=result.enumerated, witness=witness_dict(result.witness))
    report.classical_bound = expr.classical_bound
    echo_yaml(report)


@cli.command("sweep")
@click.option("--scenario", "scenario_kind", type=click.Choice(SCENARIO_KINDS), required=True)
@click.option("--param", type=click.Choice(SWEEP_PARAMS), required=True)
@click.option("--from", "start", type=float, required=True)
@click.option("--to", "stop", type=float, required=True)
@click.option("--steps", type=int, required=True)
@click.option("--out", "output_path", type=click.Path(dir_okay=False), help="CSV file for the rows")
@click.option("--theta", type=float, default=None, help="nonmax angle for non-theta sweeps [default: pi/4]")
@click.option("--visibility", type=float, default=1.0, show_default=True)
@click.option("--chi", "chi_angle", type=float, default=DEFAULT_CHI, show_default=True, help="Ancilla angle")
def sweep_command(**kwargs):
    """Evaluate T and S (S') over an evenly spaced parameter grid."""
    cliopt = Munch(kwargs)
    theta = cliopt.theta
    if cliopt.scenario_kind == "nonmax" and theta is None:
        theta = math.pi / 4
    base = ScenarioConfig(cliopt.scenario_kind, cliopt.chi_angle, cliopt.visibility, theta)
    result = run_sweep(base, cliopt.param, cliopt.start, cliopt.stop, cliopt.steps)
    if cliopt.output_path:
        write_sweep_csv(result, cliopt.output_path)
    violated = [row.param for row in result.rows if row.violated]
    echo_yaml(
        dict(
            scenario=result.scenario_kind,
            param=result.param_name,
            steps=len(result.rows),
            violated_rows=len(violated),
            first_violation=violated[0] if violated else None,
            max_total=max(row.total for row in result.rows),
            out=cliopt.output_path,
        )
    )


@cli.command("threshold")
@click.option("--scenario", "scenario_kind", type=click.Choice(SCENARIO_KINDS), required=True)
@click.option("--tol", type=float, default=THRESHOLD_TOL, show_default=True, help="Final bracket width")
def threshold_command(scenario_kind, tol):
    """Crossing of T + S (S') = 18 in visibility, or in theta for nonmax."""
    result = find_threshold(scenario_kind, tol)
    report = dict(scenario=scenario_kind, parameter=result.parameter, value=result.value)
    if result.d1d2 is not None:
        report["d1d2"] = result.d1d2
    echo_yaml(report)


@cli.command("scenario")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True)
def scenario_command(config_path):
    """Evaluate one scenario described by a JSON config file."""
    config = ScenarioConfig.from_json_file(config_path)
    result = evaluate_scenario(config)
    report = {
        "scenario": config.scenario_kind,
        "T": result.T,
        config.s_name: result.S,
        "total": result.total,
        "bound": Fraction(result.bound),
        "violated": result.violated,
    }
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8") as fh:
            yaml_dump_cozy(report, fh, sort_keys=False, allow_unicode=True)
        logger.info("wrote scenario report to %s", config.output_path)
    echo_yaml(report)


def main():
    cli()  # pylint: disable=no-value-for-parameter


if __name__ == "__main__":
    main()
