"""
Experiment reports
Moment trends, the limiting-distribution test, stable-convergence and bracket-convergence probes, universality
and the coupling/residual/chaining checks, each built from an ensemble of seeded trials
"""

import math
import logging
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from chaos.chaos_measures import measure_samples, modified_moment_terms, modified_second_moment
from concentration.chaining import AdmissibleSequence, chaining_dominance, gamma_functional, level_size
from coupling.residual_field import lattice_lipschitz, residual_lattice, residual_sup
from coupling.tilted_density import TiltedPhaseDensity
from dickman.bracket_constants import bracket_sum
from experiments.ensemble import EnsembleResult, run_trials, shared_table, trial_seed
from experiments.statistics import (
    band_ratio, bootstrap_band, fractional_moment, halves_ks, ks_two_sample, mc_estimate,
    self_split_null, trend_verdict,
)
from sampler.phase_assignment import Model, PhaseAssignment, Twist
from spectral.plancherel import v_infinity_proxy
from spectral.step_function import StepFunction, parseval_check
from truncation.truncation_plan import (
    TruncationPlan, block_sizes, bracket_process, discard_diagnostics, full_sum, keep_mask, keep_predicate,
    lindeberg_normalized, martingale_increments, truncated_sum, two_large_primes_count,
)

logger = logging.getLogger(__name__)

REFERENCE_EXPONENT = 0.9
V_PROXY_T_MAX = 50.0
# Increment tail constant of the residual field
RESIDUAL_TAIL_C = 4.0
ROTATION_ANGLE = 1.0
GUARD_MOMENTS = (0.5, 1.0, 1.5)


def reference_y(x: float, exponent: float = REFERENCE_EXPONENT) -> float:
    """y(x) = exp((log x)^exponent), where the V proxy is sampled"""
    return math.exp(math.log(x) ** exponent)


def low_moment_envelope(x: float, q: float) -> float:
    """(x / (1 + (1 - q) sqrt(log log x)))^q"""
    return (x / (1.0 + (1.0 - q) * math.sqrt(math.log(math.log(x))))) ** q


def complex_gaussian(seed: int) -> complex:
    """Standard complex Gaussian (E|G|^2 = 1) from its own stream"""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 2])))
    re, im = rng.standard_normal(2)
    return complex(re, im) / math.sqrt(2.0)


def _seeds(seed: int, trials: int) -> List[int]:
    if trials < 1:
        raise ValueError(f"trials={trials} must be positive")
    return [trial_seed(seed, i) for i in range(trials)]


# Trial workers (module level so a spawn pool can pickle them)

def _partial_sums_trial(task) -> Dict:
    seed, xs, twist = task
    N = int(math.floor(max(xs)))
    values = PhaseAssignment(seed).alpha_array(shared_table(N), N, Twist(twist))
    sums = np.cumsum(values)
    record = {'seed': seed}
    for i, x in enumerate(xs):
        record[f"S_{i}"] = complex(sums[int(math.floor(x))])
    return record


def _limit_trial(task) -> Dict:
    seed, x, eps, delta, step, y_ref, C = task
    plan = TruncationPlan(x, eps, delta, step.support)
    table = shared_table(plan.bound)
    S = truncated_sum(PhaseAssignment(seed), table, step, plan)
    V = v_infinity_proxy(PhaseAssignment(trial_seed(seed, 1)), step, y_ref, V_PROXY_T_MAX)['value']
    return {'seed': seed, 'S': S, 'V': V, 'reference': math.sqrt(C * V) * complex_gaussian(seed)}


def _stable_trial(task) -> Dict:
    seed, x, step, y_ref, selector = task
    assignment = PhaseAssignment(seed)
    table = shared_table(int(math.floor(step.support * x)) + 1)
    S = full_sum(assignment, table, step, x)
    V = v_infinity_proxy(assignment, step, y_ref, V_PROXY_T_MAX)['value']
    Y = 1.0 if selector == "one" else float(np.cos(2.0 * np.pi * assignment.phases(1)[0]))
    return {'seed': seed, 'S': S, 'V': V, 'G': complex_gaussian(seed), 'Y': Y}


def _bracket_trial(task) -> Dict:
    seed, x, eps, delta, step, y_ref = task
    plan = TruncationPlan(x, eps, delta, step.support)
    assignment = PhaseAssignment(seed)
    T = bracket_process(assignment, shared_table(plan.bound), step, plan, fast=True)
    V = v_infinity_proxy(assignment, step, y_ref, V_PROXY_T_MAX)['value']
    return {'seed': seed, 'T': T, 'V': V}


def _truncation_trial(task) -> Dict:
    seed, x, eps, delta, step = task
    plan = TruncationPlan(x, eps, delta, step.support)
    table = shared_table(plan.bound)
    assignment = PhaseAssignment(seed)
    _, z = martingale_increments(assignment, table, step, plan)
    diagnostics = discard_diagnostics(assignment, table, step, plan)
    return {
        'seed': seed,
        'S_full': full_sum(assignment, table, step, x),
        'S_trunc': complex(z.sum()),
        'S_eps': diagnostics['difference'] + complex(z.sum()),
        'T': float(np.sum(np.abs(z) ** 2)),
        'fourth': float(np.sum(np.abs(z) ** 4)),
        'reassembly_error': diagnostics['reassembly_error'],
        'flagged': diagnostics['flagged'],
    }


def _measure_trial(task) -> Dict:
    seed, twist, y, u_values, interval, spacing, model = task
    values = measure_samples(seed, Twist(twist), y, u_values, interval, spacing, Model(model))
    return {'seed': seed, **{f"m_{u:g}": float(values[u]) for u in u_values}}


def _modified_trial(task) -> Dict:
    seed, twist, y, u, interval, spacing, model = task
    nu0, nu_u = modified_moment_terms(seed, Twist(twist), y, u, interval, spacing, Model(model))
    return {'seed': seed, 'nu_0': nu0, 'nu_u': nu_u}


def _residual_trial(task) -> Dict:
    seed, twist, y, u_pair, interval, points = task
    return {'seed': seed, 'sup': residual_sup(seed, Twist(twist), y, u_pair, interval, points)}


def _lattice_trial(task) -> Dict:
    seed, twist, y, u_pair, interval, points = task
    axis, values = residual_lattice(PhaseAssignment(seed), Twist(twist), y, u_pair, interval, points)
    return {
        'seed': seed,
        'oscillation': float(values.max() - values.min()),
        'lipschitz': lattice_lipschitz(axis, values),
    }


# Moments

def moment_trend(xs: Sequence[float], q: float, trials: int, seed: int = 0,
                 twist: Twist = Twist.ONE, workers: Optional[int] = None) -> EnsembleResult:
    """
    E|sum_{n <= x} f(n) alpha(n)|^{2q} against (x / (1 + (1 - q) sqrt(log log x)))^q

    One realization gives the partial sums at every x of the grid. Each row
    also carries sum_{n <= x} |f(n)|^2, the exact value at q = 1, and the
    z-score of the q = 1 estimate against it. The normalized sums
    |S| (log log x)^{1/4} / sqrt(x) get fractional moments below 2 as a
    uniform-integrability guard.
    """
    if not 0 < q <= 1:
        raise ValueError(f"q={q} must lie in (0, 1]")
    xs = sorted(float(x) for x in xs)
    if xs[0] < 3:
        raise ValueError("Every x must be at least 3")
    twist = Twist(twist)
    records = run_trials(_partial_sums_trial, [(s, xs, twist.value) for s in _seeds(seed, trials)], workers)
    N = int(math.floor(xs[-1]))
    squares = np.cumsum(twist.values(shared_table(N), N) ** 2)
    rows = []
    guard = []
    for i, x in enumerate(xs):
        S = np.array([r[f"S_{i}"] for r in records])
        estimate, se = fractional_moment(S, q)
        exact = float(squares[int(math.floor(x))])
        second, second_se = fractional_moment(S, 1.0)
        envelope = low_moment_envelope(x, q)
        rows.append({
            'x': x,
            'estimate': estimate,
            'se': se,
            'envelope': envelope,
            'ratio': estimate / envelope,
            'second_moment_exact': exact,
            'second_moment_z': (second - exact) / second_se if second_se > 0 else 0.0,
        })
        normalized = np.abs(S) * math.log(math.log(x)) ** 0.25 / math.sqrt(x)
        guard.append({f"q_{m:g}": fractional_moment(normalized, m / 2.0)[0] for m in GUARD_MOMENTS})
    ratios = [row['ratio'] for row in rows]
    extra = {
        'rows': rows,
        'band_ratio': band_ratio(ratios),
        'within_factor_2': band_ratio(ratios) <= 2.0,
        'uniform_integrability': guard,
    }
    config = {'xs': xs, 'q': q, 'trials': trials, 'seed': seed, 'twist': twist.value}
    return EnsembleResult("moment-trend", config, records, extra=extra)


def twisted_moment_trend(xs: Sequence[float], q: float, trials: int, twist: Twist,
                         seed: int = 0, workers: Optional[int] = None) -> EnsembleResult:
    """moment_trend for sum_{n <= x} f(n) alpha(n) with f = mu or mu^2"""
    twist = Twist(twist)
    if twist is Twist.ONE:
        raise ValueError("Twisted moments need f = mu or mu^2")
    return moment_trend(xs, q, trials, seed, twist, workers)


# Limiting distribution

def rotation_invariance(samples, theta: float = ROTATION_ANGLE, seed: int = 0) -> Dict[str, float]:
    """
    KS distance between Re S on one half of the trials and Re(e^{i theta} S) on the other

    The law of S is rotation invariant, so the distance should sit inside the
    self-split null band of Re S.
    """
    samples = np.asarray(samples, dtype=complex)
    half = samples.size // 2
    ks = ks_two_sample(samples[:half].real, (np.exp(1j * theta) * samples[half:2 * half]).real)['statistic']
    null = self_split_null(samples.real, seed=seed)
    return {'theta': theta, 'ks': ks, 'null': null, 'within': bool(ks <= null)}


def limit_distribution_test(x: float, eps: float, delta: float, trials: int, seed: int = 0,
                            step: Optional[StepFunction] = None, y_ref: Optional[float] = None,
                            workers: Optional[int] = None, resamples: int = 200) -> EnsembleResult:
    """
    Normalized truncated sums S_{x,eps,delta} against sqrt(C_{eps,delta} V) G

    V is the V proxy at y_ref (default exp((log x)^0.9)) on an independent
    realization and G an independent standard complex Gaussian.

    Returns:
        EnsembleResult whose results hold KS distances on |S| and Re S with
        bootstrap bands, the halves self-test and the rotation check
    """
    step = step or StepFunction.unit()
    y_ref = reference_y(x) if y_ref is None else y_ref
    C = bracket_sum(eps, delta)
    tasks = [(s, x, eps, delta, step, y_ref, C) for s in _seeds(seed, trials)]
    records = run_trials(_limit_trial, tasks, workers)
    S = np.array([r['S'] for r in records])
    reference = np.array([r['reference'] for r in records])
    extra = {'C': C, 'y_ref': y_ref}
    for label, a, b in (('abs', np.abs(S), np.abs(reference)), ('re', S.real, reference.real)):
        extra[f"ks_{label}"] = ks_two_sample(a, b)['statistic']
        extra[f"band_{label}"] = list(bootstrap_band(a, b, resamples, seed))
    extra['halves_ks'] = halves_ks(np.abs(S))
    extra['null'] = self_split_null(np.abs(S), seed=seed)
    extra['halves_within'] = bool(extra['halves_ks'] <= extra['null'])
    extra['rotation'] = rotation_invariance(S, seed=seed)
    config = {'x': x, 'eps': eps, 'delta': delta, 'trials': trials, 'seed': seed,
              'phi': step.to_dict(), 'y_ref': y_ref}
    logger.info(f"Limit test x={x:g}: KS |S| {extra['ks_abs']:.4f}, Re S {extra['ks_re']:.4f}")
    return EnsembleResult("limit-test", config, records, extra=extra)


def limit_trend(xs: Sequence[float], eps: float, delta: float, trials: int, seed: int = 0,
                step: Optional[StepFunction] = None, workers: Optional[int] = None) -> Dict[str, object]:
    """limit_distribution_test over an x-grid with a decreasing-trend verdict on KS(|S|)"""
    results = [limit_distribution_test(x, eps, delta, trials, seed, step, workers=workers) for x in sorted(xs)]
    ks = [r.extra['ks_abs'] for r in results]
    bands = [r.extra['band_abs'] for r in results]
    verdict = trend_verdict(ks)
    verdict['bands_separated'] = all(bands[i + 1][1] < bands[i][0] for i in range(len(bands) - 1))
    return {'results': results, 'ks': ks, 'verdict': verdict}


# Stable convergence

STABLE_PANEL: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    'one': lambda z: np.ones(z.shape),
    'cap_abs': lambda z: np.minimum(np.abs(z), 1.0),
    'gauss': lambda z: np.exp(-np.abs(z) ** 2),
    'cos_re': lambda z: np.cos(z.real),
}


def stable_convergence_probe(S, Y, V, G, panel: Optional[Dict[str, Callable]] = None) -> List[Dict[str, float]]:
    """
    E[Y h(S)] against E[Y h(sqrt(V) G)] for each h in the panel

    S, Y, V and G are per-trial arrays; V comes from the same realization as
    S and Y so the dependence between them is kept.
    """
    S = np.asarray(S, dtype=complex)
    Y = np.asarray(Y, dtype=float)
    limit = np.sqrt(np.asarray(V, dtype=float)) * np.asarray(G, dtype=complex)
    rows = []
    for name, h in (panel or STABLE_PANEL).items():
        left = Y * h(S)
        right = Y * h(limit)
        gap, se = mc_estimate(left - right)
        rows.append({'h': name, 'sum_side': float(left.mean()), 'limit_side': float(right.mean()),
                     'gap': gap, 'se': se})
    return rows


def stable_probe_ensemble(x: float, trials: int, seed: int = 0, step: Optional[StepFunction] = None,
                          selector: str = "re_alpha2", y_ref: Optional[float] = None,
                          workers: Optional[int] = None) -> EnsembleResult:
    """Trials of (S_x, Y, V proxy, G) followed by stable_convergence_probe"""
    if selector not in ("one", "re_alpha2"):
        raise ValueError(f"Unknown selector {selector!r}")
    step = step or StepFunction.unit()
    y_ref = reference_y(x) if y_ref is None else y_ref
    records = run_trials(_stable_trial, [(s, x, step, y_ref, selector) for s in _seeds(seed, trials)], workers)
    rows = stable_convergence_probe(*(np.array([r[k] for r in records]) for k in ('S', 'Y', 'V', 'G')))
    config = {'x': x, 'trials': trials, 'seed': seed, 'selector': selector, 'y_ref': y_ref, 'phi': step.to_dict()}
    return EnsembleResult("stable-probe", config, records, extra={'rows': rows})


# Bracket process

def bracket_convergence_report(xs: Sequence[float], eps: float, delta: float, trials: int, seed: int = 0,
                               step: Optional[StepFunction] = None,
                               workers: Optional[int] = None) -> EnsembleResult:
    """
    Per x: KS distance between T_{x,eps,delta} and C_{eps,delta} V (V proxy at y(x), same realization)

    Rows also carry the mean of |T - C V| / C V over trials with V > 0.
    """
    step = step or StepFunction.unit()
    C = bracket_sum(eps, delta)
    rows = []
    records = []
    for x in sorted(xs):
        y_ref = reference_y(x)
        tasks = [(s, x, eps, delta, step, y_ref) for s in _seeds(seed, trials)]
        batch = run_trials(_bracket_trial, tasks, workers)
        T = np.array([r['T'] for r in batch])
        CV = C * np.array([r['V'] for r in batch])
        positive = CV > 0
        relative = float(np.mean(np.abs(T[positive] - CV[positive]) / CV[positive])) if positive.any() else 0.0
        rows.append({'x': x, 'y_ref': y_ref, 'ks': ks_two_sample(T, CV)['statistic'],
                     'T_mean': float(T.mean()), 'CV_mean': float(CV.mean()), 'relative_gap': relative})
        records.extend({'x': x, **r} for r in batch)
    extra = {'C': C, 'rows': rows, 'verdict': trend_verdict([row['ks'] for row in rows])}
    config = {'xs': sorted(float(x) for x in xs), 'eps': eps, 'delta': delta, 'trials': trials,
              'seed': seed, 'phi': step.to_dict()}
    return EnsembleResult("bracket", config, records, extra=extra)


# Universality

def universality_probe(y: float, u_values: Sequence[float], interval: Sequence[float], trials: int,
                       seed: int = 0, twist: Twist = Twist.ONE, spacing: Optional[float] = None,
                       workers: Optional[int] = None, model: Model = Model.STEINHAUS) -> EnsembleResult:
    """
    Samples of m_{y,u}(I) for each u, pairwise KS distances and the u = first self-split null band
    """
    u_values = [float(u) for u in u_values]
    twist, model = Twist(twist), Model(model)
    tasks = [(s, twist.value, y, u_values, list(interval), spacing, model.value) for s in _seeds(seed, trials)]
    records = run_trials(_measure_trial, tasks, workers)
    samples = {u: np.array([r[f"m_{u:g}"] for r in records]) for u in u_values}
    null = self_split_null(samples[u_values[0]], seed=seed)
    pairs = []
    for a, b in combinations(u_values, 2):
        ks = ks_two_sample(samples[a], samples[b])['statistic']
        pairs.append({'u1': a, 'u2': b, 'ks': ks, 'within': bool(ks <= null)})
    extra = {'null': null, 'pairs': pairs, 'indistinguishable': all(p['within'] for p in pairs)}
    config = {'y': y, 'u': u_values, 'interval': list(interval), 'trials': trials, 'seed': seed,
              'twist': twist.value, 'model': model.value}
    return EnsembleResult("chaos-measure", config, records, extra=extra)


def modified_moment_report(ys: Sequence[float], u: float, L: float, interval: Sequence[float], trials: int,
                           seed: int = 0, twist: Twist = Twist.ONE, spacing: Optional[float] = None,
                           workers: Optional[int] = None, model: Model = Model.STEINHAUS) -> EnsembleResult:
    """E[|nu_{y,0}(I) - nu_{y,u}(I)|^2 exp(-L nu_{y,0}(I))] over a y-grid, expected to decrease"""
    twist, model = Twist(twist), Model(model)
    rows = []
    records = []
    for y in sorted(ys):
        tasks = [(s, twist.value, y, u, list(interval), spacing, model.value) for s in _seeds(seed, trials)]
        batch = run_trials(_modified_trial, tasks, workers)
        estimate, se = modified_second_moment([r['nu_0'] for r in batch], [r['nu_u'] for r in batch], L)
        rows.append({'y': y, 'estimate': estimate, 'se': se})
        records.extend({'y': y, **r} for r in batch)
    verdict = trend_verdict([r['estimate'] for r in rows], [r['se'] for r in rows])
    config = {'ys': sorted(float(y) for y in ys), 'u': u, 'L': L, 'interval': list(interval),
              'trials': trials, 'seed': seed, 'twist': twist.value, 'model': model.value}
    return EnsembleResult("modified-moment", config, records, extra={'rows': rows, 'verdict': verdict})


# Coupling, residual field and chaining

def coupling_marginal_ks(twist: Twist, y: float, u_pair: Sequence[float], t_pair: Sequence[float],
                         p: int, samples: int, seed: int = 0) -> Dict[str, float]:
    """KS distance of D^{-1}(uniform phases) from the tilted law D at one prime"""
    density = TiltedPhaseDensity.at_prime(p, Twist(twist), y, u_pair, t_pair)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    coupled = density.inverse(rng.random(samples))
    result = stats.kstest(coupled, density.cdf)
    return {'p': p, 'statistic': float(result.statistic), 'pvalue': float(result.pvalue)}


def residual_decay_report(ys: Sequence[float], u_pair: Sequence[float], interval: Sequence[float],
                          trials: int, seed: int = 0, twist: Twist = Twist.ONE, points: int = 5,
                          workers: Optional[int] = None) -> EnsembleResult:
    """Median over trials of sup |residual field| on the lattice, per y; expected to decrease"""
    twist = Twist(twist)
    rows = []
    records = []
    for y in sorted(ys):
        tasks = [(s, twist.value, y, list(u_pair), list(interval), points) for s in _seeds(seed, trials)]
        batch = run_trials(_residual_trial, tasks, workers)
        sups = np.array([r['sup'] for r in batch])
        rows.append({'y': y, 'median': float(np.median(sups)), 'mean': float(sups.mean())})
        records.extend({'y': y, **r} for r in batch)
    verdict = trend_verdict([r['median'] for r in rows])
    config = {'ys': sorted(float(y) for y in ys), 'u_pair': list(u_pair), 'interval': list(interval),
              'trials': trials, 'seed': seed, 'twist': twist.value, 'points': points}
    return EnsembleResult("coupling-report", config, records, extra={'rows': rows, 'verdict': verdict})


def chaining_report(y: float, u_pair: Sequence[float], interval: Sequence[float], trials: int,
                    seed: int = 0, twist: Twist = Twist.ONE, n_max: int = 3,
                    quantiles: Sequence[float] = (0.5, 0.9, 0.99, 1.0),
                    workers: Optional[int] = None) -> EnsembleResult:
    """
    Empirical tail of sup_{s,t} |residual(s) - residual(t)| over the lattice T_{n_max} against the chaining tail

    The distance is d = K |s - t| with K = sqrt(3) times the largest lattice
    slope seen across trials, so every sampled increment satisfies the tail
    assumption with C = 4.
    """
    seq = AdmissibleSequence(interval[0], interval[1], n_max)
    points = level_size(n_max)
    twist = Twist(twist)
    tasks = [(s, twist.value, y, list(u_pair), list(interval), points) for s in _seeds(seed, trials)]
    records = run_trials(_lattice_trial, tasks, workers)
    oscillations = np.array([r['oscillation'] for r in records])
    K = math.sqrt(3.0) * max(r['lipschitz'] for r in records)
    gamma1 = gamma_functional(seq, K, 1)
    gamma2 = gamma_functional(seq, K, 2)
    thresholds = [float(np.quantile(oscillations, q)) for q in quantiles]
    rows = chaining_dominance(oscillations, gamma1, gamma2, RESIDUAL_TAIL_C, thresholds)
    extra = {
        'K': K,
        'gamma1': gamma1,
        'gamma2': gamma2,
        'rows': rows,
        'dominated': all(r['dominated'] for r in rows),
    }
    config = {'y': y, 'u_pair': list(u_pair), 'interval': list(interval), 'trials': trials,
              'seed': seed, 'twist': twist.value, 'n_max': n_max}
    return EnsembleResult("chaining-demo", config, records, extra=extra)


# Truncation

PREDICATE_LIMIT = 10_000


def truncation_report(xs: Sequence[float], eps: float, delta: float, trials: int, seed: int = 0,
                      step: Optional[StepFunction] = None, predicate_limit: int = PREDICATE_LIMIT,
                      workers: Optional[int] = None) -> EnsembleResult:
    """
    Truncated sums, martingale increments and discard diagnostics per x

    Each row carries the brute-force agreement of keep_predicate with the
    vectorized classification for n <= min(A x, predicate_limit), the mean of
    sum_p Z'_p with its standard error, the Lindeberg quantity (raw and
    normalized by x^eps / (log x)^5) and the largest reassembly error.
    """
    step = step or StepFunction.unit()
    rows = []
    records = []
    for x in sorted(xs):
        plan = TruncationPlan(x, eps, delta, step.support)
        table = shared_table(plan.bound)
        limit = min(plan.bound, predicate_limit)
        mask = keep_mask(plan, table, limit)
        agree = all(keep_predicate(plan, table, n) == bool(mask[n]) for n in range(1, limit + 1))
        batch = run_trials(_truncation_trial, [(s, x, eps, delta, step) for s in _seeds(seed, trials)], workers)
        sums = np.array([r['S_trunc'] for r in batch])
        mean, se = mc_estimate(sums.real)
        fourth, fourth_se = mc_estimate([r['fourth'] for r in batch])
        rows.append({
            'x': x,
            'K': plan.K,
            'predicate_agrees': agree,
            'predicate_checked': limit,
            'increment_mean': mean,
            'increment_se': se,
            'lindeberg': fourth,
            'lindeberg_se': fourth_se,
            'lindeberg_normalized': lindeberg_normalized(fourth, plan),
            'max_reassembly_error': max(r['reassembly_error'] for r in batch),
            'flagged': max(r['flagged'] for r in batch),
            'two_large_primes': two_large_primes_count(plan, table),
            'reciprocal_square_sum': plan.reciprocal_square_sum(table),
            'block_sizes': block_sizes(plan, table),
        })
        records.extend({'x': x, **r} for r in batch)
    drift = band_ratio([row['lindeberg_normalized'] for row in rows])
    config = {'xs': sorted(float(x) for x in xs), 'eps': eps, 'delta': delta, 'trials': trials,
              'seed': seed, 'phi': step.to_dict()}
    return EnsembleResult("truncate", config, records, extra={'rows': rows, 'lindeberg_drift': drift})


# Parseval

MIN_BREAKPOINT_GAP = 0.05


def random_step_function(rng: np.random.Generator, pieces: int) -> StepFunction:
    """Step function with `pieces` random breakpoints in (0, 3] and complex values"""
    breakpoints = np.sort(rng.uniform(0.05, 3.0, pieces))
    breakpoints = np.round(breakpoints, 6)
    # Near-coincident jumps stop oscillating before the trapezoid window ends
    breakpoints = breakpoints[np.concatenate(([True], np.diff(breakpoints) >= MIN_BREAKPOINT_GAP))]
    values = rng.standard_normal(breakpoints.size) + 1j * rng.standard_normal(breakpoints.size)
    return StepFunction(breakpoints, values)


def parseval_suite(count: int = 20, seed: int = 0, pieces: int = 4) -> List[Dict[str, float]]:
    """parseval_check on `count` random step functions"""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    rows = []
    for i in range(count):
        step = random_step_function(rng, pieces)
        rows.append({'index': i, **parseval_check(step)})
    return rows
