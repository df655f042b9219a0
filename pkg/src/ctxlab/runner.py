"""Scenario evaluation, parameter sweeps, threshold search and the reproduction suite."""

import csv
import json
import logging
import math
import typing as t
from dataclasses import dataclass, fields
from fractions import Fraction

import numpy as np

from ctxlab.classical.behavior import evaluate_behavior_S, locally_contextual_table
from ctxlab.classical.hv_bounds import (
    BoundResult,
    max_bell_sum,
    max_chsh,
    max_lhvt_total,
    max_nchvt_T,
    max_nclhvt_S,
    max_noncontextual,
    verify_algebraic_relations,
)
from ctxlab.config import get_config
from ctxlab.errors import InvalidParameterError, NoCrossingError, ScenarioConfigError
from ctxlab.quantum.measurement import VIOLATION_TOLERANCE, evaluate_expression, no_disturbance_check
from ctxlab.quantum.scenario import (
    DEFAULT_CHI,
    S_ORDER,
    DistantSettings,
    InequalityExpression,
    QuantumState,
    bob_settings_nonmax,
    bob_settings_singlet,
    build_expression_bell_sum,
    build_expression_chsh,
    build_expression_S,
    build_expression_S_prime,
    build_expression_T,
    build_state_ghz,
    build_state_nonmax,
    build_state_singlet,
    ghz_settings,
    mermin_square,
    random_alice_state,
)

logger = logging.getLogger(__name__)

SCENARIO_KINDS = ("singlet", "nonmax", "ghz")
SWEEP_PARAMS = ("visibility", "theta", "chi_angle")
SCAN_POINTS = get_config("threshold.scan_points", 32)
THRESHOLD_TOL = get_config("threshold.tol", 1e-6)
RANDOM_STATES = get_config("random_states.count", 100)
RANDOM_SEED = get_config("random_states.seed", 2016)

# Signed S term values for the maximally entangled configuration; the rest are 1/2.
INV_SQRT2_ROWS = {1, 4, 6, 9}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario_kind: str
    chi_angle: float = DEFAULT_CHI
    visibility: float = 1.0
    theta: float | None = None
    output_path: str | None = None

    def __post_init__(self):
        if self.scenario_kind not in SCENARIO_KINDS:
            raise ScenarioConfigError(f"unknown {self.scenario_kind=}, expected one of {SCENARIO_KINDS}")
        if not 0 <= self.visibility <= 1:
            raise ScenarioConfigError(f"visibility out of [0, 1]: {self.visibility=}")
        if self.scenario_kind == "nonmax":
            if self.theta is None:
                raise ScenarioConfigError("nonmax scenario needs theta")
            if not 0 <= self.theta <= math.pi / 2:
                raise ScenarioConfigError(f"theta out of [0, pi/2]: {self.theta=}")
        elif self.theta is not None:
            raise ScenarioConfigError(f"theta applies to the nonmax scenario only, got {self.scenario_kind=}")

    @classmethod
    def from_mapping(cls, data: t.Mapping[str, t.Any]) -> "ScenarioConfig":
        if not isinstance(data, t.Mapping):
            raise ScenarioConfigError(f"scenario config must be a mapping, got {type(data).__name__}")
        known = {f.name for f in fields(cls)}
        if unknown := sorted(set(data) - known):
            raise ScenarioConfigError(f"unknown scenario config keys {unknown}, expected a subset of {sorted(known)}")
        try:
            return cls(**data)
        except TypeError as e:
            raise ScenarioConfigError(str(e)) from e

    @classmethod
    def from_json_file(cls, path: str) -> "ScenarioConfig":
        """Read a scenario config with the JSON number grammar, so ``1e-3`` is a float."""
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ScenarioConfigError(f"cannot read scenario config {path}: {e}") from e
        return cls.from_mapping(data)

    @property
    def s_name(self) -> str:
        return "S'" if self.scenario_kind == "ghz" else "S"

    def replace(self, **changes) -> "ScenarioConfig":
        return ScenarioConfig(**({f.name: getattr(self, f.name) for f in fields(self)} | changes))


def scenario_state_and_settings(config: ScenarioConfig) -> tuple[QuantumState, DistantSettings]:
    try:
        if config.scenario_kind == "singlet":
            return build_state_singlet(config.chi_angle, config.visibility), bob_settings_singlet()
        if config.scenario_kind == "nonmax":
            state = build_state_nonmax(config.theta, config.visibility, config.chi_angle)
            return state, bob_settings_nonmax(config.theta)
        return build_state_ghz(config.visibility, config.chi_angle), ghz_settings()
    except InvalidParameterError as e:
        raise ScenarioConfigError(str(e)) from e


def scenario_expressions(config: ScenarioConfig, settings: DistantSettings) -> tuple[InequalityExpression, ...]:
    s_expr = build_expression_S_prime(settings) if config.scenario_kind == "ghz" else build_expression_S(settings)
    return build_expression_T(), s_expr


@dataclass(frozen=True)
class ScenarioResult:
    T: float
    S: float
    total: float
    bound: Fraction
    violated: bool


def evaluate_scenario(config: ScenarioConfig) -> ScenarioResult:
    state, settings = scenario_state_and_settings(config)
    t_expr, s_expr = scenario_expressions(config, settings)
    t_value = evaluate_expression(state, t_expr).total
    s_value = evaluate_expression(state, s_expr).total
    bound = (t_expr + s_expr).classical_bound
    total = t_value + s_value
    return ScenarioResult(t_value, s_value, total, bound, total > float(bound) + VIOLATION_TOLERANCE)


@dataclass(frozen=True)
class SweepRow:
    param: float
    T: float
    S: float
    total: float
    bound: int
    violated: bool


@dataclass(frozen=True)
class SweepResult:
    scenario_kind: str
    param_name: str
    rows: tuple[SweepRow, ...]


def run_sweep(base: ScenarioConfig, param: str, start: float, stop: float, steps: int) -> SweepResult:
    """Evaluate ``base`` on the inclusive evenly spaced grid of ``param`` values."""
    if param not in SWEEP_PARAMS:
        raise ScenarioConfigError(f"unknown sweep parameter {param=}, expected one of {SWEEP_PARAMS}")
    if param == "theta" and base.scenario_kind != "nonmax":
        raise ScenarioConfigError(f"theta sweeps need the nonmax scenario, got {base.scenario_kind=}")
    if not start < stop:
        raise ScenarioConfigError(f"sweep range must be increasing: {start=} {stop=}")
    if steps < 2:
        raise ScenarioConfigError(f"sweep needs at least 2 steps: {steps=}")
    rows = []
    for value in np.linspace(start, stop, steps):
        result = evaluate_scenario(base.replace(**{param: float(value)}))
        rows.append(SweepRow(float(value), result.T, result.S, result.total, int(result.bound), result.violated))
    violated = sum(r.violated for r in rows)
    logger.info("%s sweep over %s: %d rows, %d violated", base.scenario_kind, param, len(rows), violated)
    return SweepResult(base.scenario_kind, param, tuple(rows))


SWEEP_HEADER = ("param", "T", "S", "total", "bound", "violated")


def write_sweep_csv(result: SweepResult, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for row in result.rows:
            floats = [repr(v) for v in (row.param, row.T, row.S, row.total)]
            writer.writerow(floats + [row.bound, str(row.violated).lower()])
    logger.info("wrote %d sweep rows to %s", len(result.rows), path)


def read_sweep_csv(path: str) -> list[SweepRow]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        if (header := tuple(next(reader, ()))) != SWEEP_HEADER:
            raise ScenarioConfigError(f"{path}: unexpected sweep header {header}")
        return [
            SweepRow(float(p), float(T), float(S), float(total), int(bound), violated == "true")
            for p, T, S, total, bound, violated in reader
        ]


@dataclass(frozen=True)
class ThresholdResult:
    parameter: str
    value: float
    d1d2: float | None = None


def _bisect(f: t.Callable[[float], float], lo: float, hi: float, tol: float, scan_points: int) -> float:
    """Crossing of ``f`` from <= 0 to > 0, bracketed by a coarse scan then bisected."""
    grid = np.linspace(lo, hi, scan_points)
    values = [f(float(x)) for x in grid]
    bracket = next(((grid[i], grid[i + 1]) for i in range(len(grid) - 1) if values[i] <= 0 < values[i + 1]), None)
    if bracket is None:
        raise NoCrossingError(f"no sign change on [{lo}, {hi}]: min={min(values):.6g} max={max(values):.6g}")
    lo, hi = (float(x) for x in bracket)
    while hi - lo >= tol:
        mid = (lo + hi) / 2
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
        logger.debug("bisection bracket [%.12g, %.12g]", lo, hi)
    return (lo + hi) / 2


def find_threshold(
    scenario_kind: str, tol: float = THRESHOLD_TOL, scan_points: int = SCAN_POINTS, chi_angle: float = DEFAULT_CHI
) -> ThresholdResult:
    """Smallest visibility (singlet, ghz) or theta in [0, pi/4] (nonmax) where T + S exceeds 18.

    Args:
        scenario_kind: "singlet", "ghz" or "nonmax".
        tol: Width of the final bisection bracket.
        scan_points: Grid points scanned for the first sign change before bisecting.
        chi_angle: Ancilla angle of the scenario states.

    Returns:
        The parameter name, its threshold value and, for nonmax, d1 d2 = sin(2 theta) / 2.

    Raises:
        ScenarioConfigError: If ``tol`` is not positive or the scenario is unknown.
        NoCrossingError: If the scan finds no sign change.
    """
    if tol <= 0:
        raise ScenarioConfigError(f"tolerance must be positive: {tol=}")
    if scenario_kind == "nonmax":
        base = ScenarioConfig("nonmax", chi_angle=chi_angle, theta=math.pi / 4)
        param, lo, hi = "theta", 0.0, math.pi / 4
    else:
        base = ScenarioConfig(scenario_kind, chi_angle=chi_angle)
        param, lo, hi = "visibility", 0.0, 1.0

    def excess(x: float) -> float:
        result = evaluate_scenario(base.replace(**{param: x}))
        return result.total - float(result.bound)

    value = _bisect(excess, lo, hi, tol, scan_points)
    d1d2 = math.sin(2 * value) / 2 if param == "theta" else None
    logger.info("%s threshold: %s = %.9f", scenario_kind, param, value)
    return ThresholdResult(param, value, d1d2)


def expression_for(name: str, which: int = 1) -> InequalityExpression:
    """Expression by CLI name: T, S, TS, Sprime, TSprime, chsh, bellsum, bellsum3."""
    singlet, ghz = bob_settings_singlet(), ghz_settings()
    builders = {
        "T": build_expression_T,
        "S": lambda: build_expression_S(singlet),
        "TS": lambda: build_expression_T() + build_expression_S(singlet),
        "Sprime": lambda: build_expression_S_prime(ghz),
        "TSprime": lambda: build_expression_T() + build_expression_S_prime(ghz),
        "chsh": lambda: build_expression_chsh(singlet, which),
        "bellsum": lambda: build_expression_bell_sum(singlet, "bipartite"),
        "bellsum3": lambda: build_expression_bell_sum(ghz, "tripartite"),
    }
    try:
        return builders[name]()
    except KeyError as e:
        raise ScenarioConfigError(f"unknown expression {name=}, expected one of {sorted(builders)}") from e


def t_state_independence(count: int = RANDOM_STATES, seed: int = RANDOM_SEED) -> float:
    """The T value furthest from 12 over ``count`` random Alice-side states."""
    rng = np.random.default_rng(seed)
    t_expr = build_expression_T()
    values = [evaluate_expression(random_alice_state(rng), t_expr).total for _ in range(count)]
    return max(values, key=lambda v: abs(v - 12))


def nonmax_s_closed_form(theta: float) -> float:
    d1d2 = math.sin(2 * theta) / 2
    return math.sqrt(1 + 4 * d1d2**2) * (2 + 2 * math.sqrt(2))


def nonmax_s_worst_deviation(points: int = 21) -> float:
    worst = 0.0
    for theta in np.linspace(0, math.pi / 2, points):
        result = evaluate_scenario(ScenarioConfig("nonmax", theta=float(theta)))
        worst = max(worst, abs(result.S - nonmax_s_closed_form(float(theta))))
    return worst


@dataclass(frozen=True)
class Check:
    name: str
    expected: float
    computed: float
    tol: float

    @property
    def passed(self) -> bool:
        return abs(self.computed - self.expected) <= self.tol


def _bound(result: BoundResult) -> float:
    return float(result.bound)


def reproduction_checks() -> list[Check]:
    """Every quantity of the reproduction report, in report order."""
    sqrt2 = math.sqrt(2)
    checks = []
    square = mermin_square()

    singlet = ScenarioConfig("singlet")
    state, settings = scenario_state_and_settings(singlet)
    s_report = evaluate_expression(state, build_expression_S(settings))
    for row_index, term in zip(S_ORDER, s_report.terms):
        expected = 1 / sqrt2 if row_index in INV_SQRT2_ROWS else 0.5
        checks.append(Check(f"S term {term.label}", expected, term.sign * term.value, 1e-9))
    result = evaluate_scenario(singlet)
    checks += [
        Check("S_singlet", 4 + 2 * sqrt2, result.S, 1e-9),
        Check("T_singlet", 12, result.T, 1e-9),
        Check("T_random_states", 12, t_state_independence(), 1e-9),
        Check("T+S_singlet", 16 + 2 * sqrt2, result.total, 1e-9),
        Check("no_disturbance_singlet", 0, no_disturbance_check(state, square.rows() + square.columns())[1], 1e-9),
        Check("max_nchvt_T", 8, _bound(max_nchvt_T()), 0),
        Check("max_nclhvt_S", 10, _bound(max_nclhvt_S()), 0),
        Check("max_nclhvt_S'", 10, _bound(max_nclhvt_S(expression_for("Sprime"))), 0),
        Check("behavior_table_S", 12, float(evaluate_behavior_S(locally_contextual_table())), 0),
    ]
    checks += [Check(f"max_chsh_{which}", 2, _bound(max_chsh(which)), 0) for which in (1, 2, 3)]
    checks += [
        Check("max_bell_sum_bipartite", 6, _bound(max_bell_sum("bipartite")), 0),
        Check("max_bell_sum_tripartite", 6, _bound(max_bell_sum("tripartite")), 0),
    ]
    for kind in ("bipartite", "tripartite"):
        verification = verify_algebraic_relations(kind)
        failures = sum(not c.holds for c in verification.checks)
        checks.append(Check(f"relation_failures_{kind}", 0, failures, 0))
    checks += [
        Check("max_lhvt_T+S", 18, _bound(max_lhvt_total(expression_for("TS"))), 0),
        Check("max_nc_T+S", 18, _bound(max_noncontextual(expression_for("TS"))), 0),
        Check("max_lhvt_T+S'", 18, _bound(max_lhvt_total(expression_for("TSprime"))), 0),
        Check("threshold_singlet", 6 / (4 + 2 * sqrt2), find_threshold("singlet").value, 1e-5),
        Check("nonmax_S_worst_deviation", 0, nonmax_s_worst_deviation(), 1e-9),
        Check("threshold_nonmax_d1d2", math.sqrt(26 - 18 * sqrt2) / 2, find_threshold("nonmax").d1d2, 1e-3),
    ]
    ghz = evaluate_scenario(ScenarioConfig("ghz"))
    checks += [
        Check("S'_ghz", 4 + 4 * sqrt2, ghz.S, 1e-9),
        Check("T+S'_ghz", 21.657, ghz.total, 1e-3),
        Check("threshold_ghz", 6 / (4 + 4 * sqrt2), find_threshold("ghz").value, 1e-5),
    ]
    logger.info("reproduction: %d/%d checks pass", sum(c.passed for c in checks), len(checks))
    return checks
