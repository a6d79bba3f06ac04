"""
Command-line entry point for the multiplicative chaos lab
Each subcommand runs one experiment, writes <name>.summary.json and <name>.trials.csv and prints one verdict line per check
"""

import os
import sys
import json
import math
import argparse
import logging
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from arithmetic.factor_table import CapacityError
from chaos.euler_product import ShiftParams, euler_product, second_moment_A
from concentration.chaining import (
    AdmissibleSequence, admissibility_report, bernstein_empirical, gamma_constant,
)
from coupling.residual_field import coupling_scaling_ledger
from dickman.bracket_constants import bracket_limit
from dickman.dickman_rho import dickman_check, dickman_rho, smooth_zeta, tshift_ratio
from experiments.ensemble import EnsembleResult, run_trials, shared_table, trial_seed
from experiments.reports import (
    bracket_convergence_report, chaining_report, coupling_marginal_ks, limit_trend, moment_trend,
    modified_moment_report, parseval_suite, residual_decay_report, stable_probe_ensemble,
    truncation_report, universality_probe,
)
from experiments.statistics import mc_estimate
from sampler.phase_assignment import Model, PhaseAssignment, Twist
from settings import CODE_VERSION, log_level, output_dir as default_output_dir
from spectral.plancherel import plancherel_check
from spectral.step_function import StepFunction
from truncation.truncation_plan import TruncationPlan, full_sum, two_large_primes_count
from validators import ParameterValidator

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

COMMANDS = (
    "simulate-sum", "truncate", "bracket", "chaos-measure", "modified-moment", "coupling-report",
    "verify-plancherel", "dickman", "tshift", "chaining-demo", "anatomy", "moment-trend", "limit-test",
)

# Comma-separated flags whose first entry may be negative
LIST_FLAGS = ("--interval", "--u", "--u-pair", "--t-pair", "--r", "--t", "--xs", "--ys",
              "--phi-breakpoints", "--phi-values")

PHI_PRESETS = {
    'unit': ([1.0], [1.0]),
    'zero': ([1.0], [0.0]),
    'staircase': ([0.5, 1.0, 1.5], [1.0, 0.5, 0.25]),
}

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_CAPACITY = 3

# Tolerances of the verdict lines
SE_TOLERANCE = 3.0
MARGINAL_KS_LIMIT = 0.02
RHO_2_TOLERANCE = 1e-8
DELAY_TOLERANCE = 1e-9
LAPLACE_TOLERANCE = 1e-6
RICHARDSON_TOLERANCE = 1e-3
PARSEVAL_TOLERANCE = 1e-4
TSHIFT_TOLERANCE = 0.03
REASSEMBLY_TOLERANCE = 1e-10
LINDEBERG_DRIFT = 3.0
MEISSEL_MERTENS = 0.26149721284764278
MARGINAL_SAMPLES = 10_000


def _split_list(value):
    """Accept '1,2,3' as well as lists"""
    if isinstance(value, str):
        return [float(v) for v in value.split(',') if v.strip()]
    return value


class ExperimentConfig(BaseModel):
    """All parameters of one run; keys mirror the long flag names"""

    model_config = ConfigDict(extra="forbid")

    command: str
    name: Optional[str] = None
    x: float = 1e4
    xs: List[float] = [1e4, 1e5, 1e6]
    y: float = 50.0
    ys: List[float] = [1e2, 1e3, 1e4]
    eps: float = 0.1
    delta: float = 0.05
    u: List[float] = [0.0, 1.0, 2.0]
    u_pair: List[float] = [1.0, 1.0]
    t_pair: List[float] = [0.0, 0.0]
    L: float = 1.0
    q: float = 0.5
    r: List[float] = [0.1, 0.5]
    t: List[float] = [0.0, 0.5, 1.0]
    t_max: float = 50.0
    spacing: Optional[float] = None
    interval: List[float] = [-0.5, 0.5]
    trials: int = 100
    seed: int = 0
    phi: str = "unit"
    phi_breakpoints: Optional[List[float]] = None
    phi_values: Optional[List[float]] = None
    twist: Twist = Twist.ONE
    model: Model = Model.STEINHAUS
    n_max: int = 3
    check: bool = False
    exact: bool = False
    stable: bool = False
    workers: Optional[int] = None
    output_dir: str = Field(default_factory=default_output_dir)

    @field_validator("command")
    @classmethod
    def known_command(cls, value: str) -> str:
        if value not in COMMANDS:
            raise ValueError(f"unknown command {value!r}")
        return value

    @field_validator("xs", "ys", "u", "u_pair", "t_pair", "r", "t", "interval",
                     "phi_breakpoints", "phi_values", mode="before")
    @classmethod
    def comma_list(cls, value):
        return _split_list(value)

    @model_validator(mode="after")
    def phi_known(self) -> "ExperimentConfig":
        if self.phi_breakpoints is None and self.phi not in PHI_PRESETS:
            raise ValueError(f"phi must be one of {', '.join(PHI_PRESETS)} or given by breakpoints")
        if (self.phi_breakpoints is None) != (self.phi_values is None):
            raise ValueError("phi_breakpoints and phi_values go together")
        return self

    def step(self) -> StepFunction:
        if self.phi_breakpoints is not None:
            return StepFunction(self.phi_breakpoints, self.phi_values)
        breakpoints, values = PHI_PRESETS[self.phi]
        return StepFunction(breakpoints, values)

    @property
    def run_name(self) -> str:
        return self.name or self.command


CommandOutput = Tuple[List[Dict], Dict, Dict[str, bool]]


# Command handlers

def _simulate_trial(task) -> Dict:
    seed, x, y, r, step, twist, model = task
    N = int(math.floor(step.support * x)) + 1
    table = shared_table(N)
    assignment = PhaseAssignment(seed, model)
    partial = complex(assignment.alpha_array(table, N, twist)[1:int(math.floor(x)) + 1].sum())
    A = euler_product(assignment, twist, y, complex(0.5 + r / 2.0, 0.0))
    return {
        'seed': seed,
        'partial': partial,
        'abs2': abs(partial) ** 2,
        'S': full_sum(assignment, table, step, x),
        'A2': abs(A) ** 2,
    }


def simulate_sum(config: ExperimentConfig) -> CommandOutput:
    """Partial sums at x and |A_y(1/2 + r/2)|^2, with their exact second moments"""
    step, twist, model = config.step(), config.twist, config.model
    r = config.r[0]
    seeds = [trial_seed(config.seed, i) for i in range(config.trials)]
    records = run_trials(_simulate_trial, [(s, config.x, config.y, r, step, twist, model) for s in seeds],
                         config.workers)
    N = int(math.floor(config.x))
    variance_exact = float(np.sum(twist.values(shared_table(N), N) ** 2))
    variance, variance_se = mc_estimate([rec['abs2'] for rec in records])
    params = ShiftParams(config.y, r * math.log(config.y))
    moment_exact = second_moment_A(twist, params, model)
    moment, moment_se = mc_estimate([rec['A2'] for rec in records])
    results = {
        'variance': {'estimate': variance, 'se': variance_se, 'exact': variance_exact},
        'euler_second_moment': {'estimate': moment, 'se': moment_se, 'exact': moment_exact,
                                'smooth_zeta': smooth_zeta(config.y, 1.0 + r)},
    }
    checks = {
        'variance': abs(variance - variance_exact) <= SE_TOLERANCE * variance_se,
        'euler_second_moment': abs(moment - moment_exact) <= SE_TOLERANCE * moment_se,
    }
    return records, results, checks


def truncate(config: ExperimentConfig) -> CommandOutput:
    report = truncation_report(config.xs, config.eps, config.delta, config.trials, config.seed,
                               config.step(), workers=config.workers)
    rows = report.extra['rows']
    checks = {
        'keep_predicate': all(row['predicate_agrees'] for row in rows),
        'reassembly': all(row['max_reassembly_error'] <= REASSEMBLY_TOLERANCE for row in rows),
        'martingale_mean': all(abs(row['increment_mean']) <= SE_TOLERANCE * row['increment_se'] for row in rows),
        'lindeberg_drift': report.extra['lindeberg_drift'] <= LINDEBERG_DRIFT,
    }
    return report.records, report.extra, checks


def bracket(config: ExperimentConfig) -> CommandOutput:
    report = bracket_convergence_report(config.xs, config.eps, config.delta, config.trials, config.seed,
                                        config.step(), config.workers)
    results = dict(report.extra)
    results['richardson'] = bracket_limit(config.eps, config.delta)
    checks = {'ks_decreasing': report.extra['verdict']['monotone']}
    return report.records, results, checks


def chaos_measure(config: ExperimentConfig) -> CommandOutput:
    report = universality_probe(config.y, config.u, config.interval, config.trials, config.seed,
                                config.twist, config.spacing, config.workers, config.model)
    return report.records, report.extra, {'indistinguishable': report.extra['indistinguishable']}


def modified_moment(config: ExperimentConfig) -> CommandOutput:
    shifts = [u for u in config.u if u > 0]
    u = shifts[0] if shifts else 1.0
    report = modified_moment_report(config.ys, u, config.L, config.interval, config.trials, config.seed,
                                    config.twist, config.spacing, config.workers, config.model)
    results = dict(report.extra, u=u)
    return report.records, results, {'decreasing': report.extra['verdict']['monotone']}


def coupling_report(config: ExperimentConfig) -> CommandOutput:
    marginal = coupling_marginal_ks(config.twist, config.y, config.u_pair, config.t_pair, 2,
                                    MARGINAL_SAMPLES, config.seed)
    report = residual_decay_report(config.ys, config.u_pair, config.interval, config.trials, config.seed,
                                   config.twist, workers=config.workers)
    ledger = coupling_scaling_ledger(PhaseAssignment(trial_seed(config.seed, 0)), config.twist, config.y,
                                     config.u_pair, config.t_pair)
    results = dict(report.extra, marginal=marginal, scaling_ledger=ledger)
    checks = {
        'marginal_ks': marginal['statistic'] < MARGINAL_KS_LIMIT,
        'residual_decreasing': report.extra['verdict']['monotone'],
    }
    return report.records, results, checks


def verify_plancherel(config: ExperimentConfig) -> CommandOutput:
    step = config.step()
    assignment = PhaseAssignment(trial_seed(config.seed, 0), config.model)
    records = []
    checks = {}
    for r in config.r:
        row = plancherel_check(assignment, step, config.y, r, t_max=config.t_max, spacing=config.spacing or 0.1)
        records.append({'r': r, **row})
        checks[f"plancherel_r={r:g}"] = row['passed']
    parseval = parseval_suite(seed=config.seed)
    checks['parseval'] = all(row['relative_error'] <= PARSEVAL_TOLERANCE for row in parseval)
    return records, {'parseval': parseval}, checks


def dickman(config: ExperimentConfig) -> CommandOutput:
    records = [{'v': float(v), 'rho': dickman_rho(float(v))} for v in range(0, 11)]
    results = {'check': dickman_check(seed=config.seed), 'richardson': bracket_limit(config.eps, config.delta)}
    checks = {}
    if config.check:
        check = results['check']
        checks = {
            'rho_2': check['rho_2_error'] <= RHO_2_TOLERANCE,
            'delay_residual': check['max_delay_residual'] <= DELAY_TOLERANCE,
            'laplace': check['max_laplace_delta'] <= LAPLACE_TOLERANCE,
            'richardson': results['richardson']['error'] <= RICHARDSON_TOLERANCE,
        }
    return records, results, checks


def tshift(config: ExperimentConfig) -> CommandOutput:
    records = []
    checks = {}
    fixed_band = {}
    log_y = math.log(config.y)
    for t in config.t:
        empirical, predicted = tshift_ratio(config.y, t, exact=config.exact)
        ratio = empirical / predicted
        records.append({'t': t, 'empirical': empirical, 'predicted': predicted, 'ratio': ratio})
        # The asymptotic carries a relative error of order (1 + t)/log y
        checks[f"ratio_t={t:g}"] = 1.0 - TSHIFT_TOLERANCE <= ratio <= 1.0 + TSHIFT_TOLERANCE + t / log_y
        fixed_band[f"ratio_t={t:g}"] = abs(ratio - 1.0) <= TSHIFT_TOLERANCE
    return records, {'fixed_band': fixed_band}, checks


def chaining_demo(config: ExperimentConfig) -> CommandOutput:
    report = chaining_report(config.y, config.u_pair, config.interval, config.trials, config.seed,
                             config.twist, config.n_max, workers=config.workers)
    seq = AdmissibleSequence(config.interval[0], config.interval[1], config.n_max)
    bernstein = bernstein_empirical(100, max(config.trials, 1000), seed=config.seed)
    results = dict(
        report.extra,
        admissibility=admissibility_report(seq),
        gamma_constant={'1': gamma_constant(1), '2': gamma_constant(2)},
        bernstein=bernstein,
    )
    checks = {
        'dominated': report.extra['dominated'],
        'admissible': all(row['size_bound'] and row['square_bound'] and row['nested']
                          for row in results['admissibility']),
        'bernstein': all(row['observed'] <= row['bound'] for row in bernstein),
    }
    return report.records, results, checks


def anatomy(config: ExperimentConfig) -> CommandOutput:
    """Prime counts, Mertens sums, smooth and rough counts up to x"""
    x = config.x
    table = shared_table(int(math.floor(2 * x)))
    records = []
    scale = 100.0
    while scale <= x:
        log_scale = math.log(scale)
        u = log_scale / math.log(config.y)
        psi = table.count_smooth(scale, config.y)
        records.append({
            'x': scale,
            'prime_count': table.prime_count(scale),
            'mertens_gap': table.mertens_prime_sum(scale) - math.log(log_scale) - MEISSEL_MERTENS,
            'psi': psi,
            'psi_ratio': psi / (scale * dickman_rho(u)) if u <= 20 else float("nan"),
            'rough_smooth': table.count_rough_smooth_interval(scale / 2, scale, config.y, scale) if config.y < scale else 0,
            'repeated_largest_scaled': table.repeated_largest_count(scale) * log_scale / scale,
        })
        scale *= 10.0
    chebyshev = table.chebyshev_check([row['x'] for row in records])
    plan = TruncationPlan(x, config.eps, config.delta)
    results = {
        'chebyshev': chebyshev,
        'two_large_primes': two_large_primes_count(plan, table),
        'reciprocal_square_sum': plan.reciprocal_square_sum(table),
        'plan': plan.to_dict(),
    }
    checks = {'chebyshev_bounded': all(0.5 <= c <= 2.0 for c in chebyshev)}
    return records, results, checks


def moment_trend_command(config: ExperimentConfig) -> CommandOutput:
    report = moment_trend(config.xs, config.q, config.trials, config.seed, config.twist, config.workers)
    rows = report.extra['rows']
    checks = {
        'within_factor_2': report.extra['within_factor_2'],
        'second_moment': all(abs(row['second_moment_z']) <= SE_TOLERANCE for row in rows),
    }
    return report.records, report.extra, checks


def limit_test(config: ExperimentConfig) -> CommandOutput:
    trend = limit_trend(config.xs, config.eps, config.delta, config.trials, config.seed, config.step(),
                        config.workers)
    records = []
    per_x = []
    for x, result in zip(sorted(config.xs), trend['results']):
        records.extend({'x': x, **r} for r in result.records)
        per_x.append({'x': x, **result.extra})
    results = {'per_x': per_x, 'verdict': trend['verdict']}
    checks = {
        'ks_decreasing': trend['verdict']['monotone'],
        'halves_within_null': all(row['halves_within'] for row in per_x),
        'rotation_within_null': all(row['rotation']['within'] for row in per_x),
    }
    if config.stable:
        probe = stable_probe_ensemble(max(config.xs), config.trials, config.seed, config.step(),
                                      workers=config.workers)
        results['stable'] = probe.extra['rows']
        one = next(row for row in probe.extra['rows'] if row['h'] == 'one')
        checks['stable_constant_gap'] = one['gap'] == 0.0
    return records, results, checks


HANDLERS: Dict[str, Callable[[ExperimentConfig], CommandOutput]] = {
    "simulate-sum": simulate_sum,
    "truncate": truncate,
    "bracket": bracket,
    "chaos-measure": chaos_measure,
    "modified-moment": modified_moment,
    "coupling-report": coupling_report,
    "verify-plancherel": verify_plancherel,
    "dickman": dickman,
    "tshift": tshift,
    "chaining-demo": chaining_demo,
    "anatomy": anatomy,
    "moment-trend": moment_trend_command,
    "limit-test": limit_test,
}


# Running

def validate_config(config: ExperimentConfig, strict: bool = False) -> Dict:
    """ParameterValidator over the config fields"""
    validator = ParameterValidator(strict_mode=strict)
    data = config.model_dump(mode="json")
    data.pop('command')
    data.pop('name')
    data.pop('output_dir')
    return validator.validate_all_fields(data)


def run(command: str, config: ExperimentConfig, strict: bool = False) -> int:
    """
    Validate, run one subcommand and write its artifacts

    Returns:
        Exit status: 0 success, 1 a check failed, 2 invalid configuration, 3 capacity exceeded
    """
    if command != config.command:
        config = config.model_copy(update={'command': command})
    validation = validate_config(config, strict)
    if not validation['success']:
        print(json.dumps({'status': 'invalid', 'errors': validation['errors']}, sort_keys=True))
        return EXIT_INVALID
    for field_name, warning in validation['warnings'].items():
        logger.warning(f"{field_name}: {warning}")

    try:
        records, results, checks = HANDLERS[command](config)
    except CapacityError as e:
        print(json.dumps({'status': 'capacity', 'error': str(e)}, sort_keys=True))
        return EXIT_CAPACITY
    except ValueError as e:
        print(json.dumps({'status': 'invalid', 'errors': {'parameters': str(e)}}, sort_keys=True))
        return EXIT_INVALID

    result = EnsembleResult(
        config.run_name,
        config.model_dump(mode="json"),
        records,
        extra={'results': results, 'checks': checks},
    )
    result.write(config.output_dir)

    for check, passed in checks.items():
        print(f"{'PASS' if passed else 'FAIL'} {command} {check}")
    return EXIT_OK if all(checks.values()) else EXIT_CHECK_FAILED


def load_config_file(path: str) -> Dict:
    """JSON or TOML document whose keys mirror the long flag names"""
    if path.endswith(".toml"):
        import tomllib

        with open(path, "rb") as f:
            data = tomllib.load(f)
    else:
        with open(path) as f:
            data = json.load(f)
    return {key.replace('-', '_'): value for key, value in data.items()}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Simulation and verification lab for random multiplicative functions and critical chaos"
    )
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    parser.add_argument("--strict", action="store_true", help="Treat soft parameter issues as errors")
    subparsers = parser.add_subparsers(dest="command", required=True)

    S = argparse.SUPPRESS
    for command in COMMANDS:
        sub = subparsers.add_parser(command, argument_default=S)
        sub.add_argument("--config", help="JSON or TOML file with default values")
        sub.add_argument("--name", help="Artifact name (defaults to the command)")
        sub.add_argument("--x", type=float, help="Summation length")
        sub.add_argument("--xs", help="Comma-separated x-grid")
        sub.add_argument("--y", type=float, help="Prime cutoff")
        sub.add_argument("--ys", help="Comma-separated y-grid")
        sub.add_argument("--eps", type=float)
        sub.add_argument("--delta", type=float)
        sub.add_argument("--u", help="Comma-separated shifts")
        sub.add_argument("--u-pair", dest="u_pair", help="u1,u2")
        sub.add_argument("--t-pair", dest="t_pair", help="t1,t2")
        sub.add_argument("--L", type=float, help="Damping of the modified moment")
        sub.add_argument("--q", type=float, help="Moment exponent in (0, 1]")
        sub.add_argument("--r", help="Comma-separated real shifts of the Plancherel identity")
        sub.add_argument("--t", help="Comma-separated shifts of the tshift ratio")
        sub.add_argument("--t-max", dest="t_max", type=float)
        sub.add_argument("--spacing", type=float)
        sub.add_argument("--interval", help="lo,hi")
        sub.add_argument("--trials", type=int)
        sub.add_argument("--seed", type=int)
        sub.add_argument("--phi", help=f"Preset step function: {', '.join(PHI_PRESETS)}")
        sub.add_argument("--phi-breakpoints", dest="phi_breakpoints")
        sub.add_argument("--phi-values", dest="phi_values")
        sub.add_argument("--twist", choices=[t.value for t in Twist])
        sub.add_argument("--model", choices=[m.value for m in Model])
        sub.add_argument("--n-max", dest="n_max", type=int)
        sub.add_argument("--check", action="store_true")
        sub.add_argument("--exact", action="store_true")
        sub.add_argument("--stable", action="store_true")
        sub.add_argument("--workers", type=int, help="Worker processes (RMF_LAB_THREADS by default)")
        sub.add_argument("--output-dir", dest="output_dir")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """File values first, explicit flags override"""
    flags = vars(args).copy()
    data = load_config_file(flags.pop('config')) if 'config' in flags else {}
    flags.pop('verbose', None)
    flags.pop('strict', None)
    data.update(flags)
    return ExperimentConfig(**data)


def attach_list_values(argv: List[str]) -> List[str]:
    """Join list flags to values such as -0.5,0.5 that argparse would read as an option"""
    out = []
    i = 0
    while i < len(argv):
        item = argv[i]
        value = argv[i + 1] if i + 1 < len(argv) else None
        negative = value is not None and len(value) > 1 and value[0] == "-" and (value[1].isdigit() or value[1] == ".")
        if item in LIST_FLAGS and negative:
            out.append(f"{item}={value}")
            i += 2
            continue
        out.append(item)
        i += 1
    return out


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(attach_list_values(sys.argv[1:] if argv is None else list(argv)))
    level = logging.DEBUG if args.verbose else getattr(logging, log_level(), logging.INFO)
    logging.getLogger().setLevel(level)
    logger.debug(f"Code version {CODE_VERSION}, pid {os.getpid()}")

    try:
        config = config_from_args(args)
    except ValidationError as e:
        errors = {'.'.join(str(p) for p in err['loc']) or 'config': err['msg'] for err in e.errors()}
        print(json.dumps({'status': 'invalid', 'errors': errors}, sort_keys=True))
        return EXIT_INVALID
    except (OSError, ValueError) as e:
        print(json.dumps({'status': 'invalid', 'errors': {'config': str(e)}}, sort_keys=True))
        return EXIT_INVALID

    return run(config.command, config, strict=args.strict)


if __name__ == "__main__":
    sys.exit(main())
