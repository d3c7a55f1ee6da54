"""Seeded experiment harness behind the command line.

A plain-text key=value config resolves to an :class:`ExperimentConfig`;
experiment functions turn one into CSV rows (sweeps over the step number,
Monte-Carlo jitter runs) or text reports (optimum prediction, benchmark
check).  Everything is deterministic given the master seed: randomness for a
grid point or a run is drawn from a generator seeded with
``SeedSequence(master_seed, spawn_key=point_key)``, so results do not depend
on execution order or on the number of worker processes.
"""

from __future__ import annotations

import hashlib
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .channels import (
    AveragedTimingJitter,
    Decoherence,
    Depolarizing,
    NoiseModel,
    TimingJitter,
    TrotterPlan,
    complete_noise,
    faulty_trotter,
    ideal_map,
    sampled_trotter_unitary,
)
from .hamiltonians import ising_chain, terms_from_text
from .linalg import hermitian_exp, unitary_superop
from .metrics import (
    Diamond,
    DiamondNormError,
    InducedTraceHeuristic,
    JDistance,
    Metric,
    diamond_distance,
    diamond_distance_unitary,
    induced_trace_distance_heuristic,
    j_distance,
    noise_benchmarks,
)
from .tradeoff import (
    best_integer_steps,
    decoherence_bound,
    defect_strengths,
    depolarizing_costs,
    distance_at_optimum,
    jitter_costs,
    max_simulation_time,
    optimal_steps,
)

SWEEP_HEADER = ("n", "metric", "exact_distance", "bound", "benchmark", "status")
MONTECARLO_HEADER = ("run_id", "n", "metric", "value")

_METRIC_NAMES = {"j": JDistance, "diamond": Diamond, "heuristic": InducedTraceHeuristic}


class ConfigError(ValueError):
    """Configuration text or values that cannot be turned into an experiment."""


def default_n_grid(lo: int = 1, hi: int = 1000, per_decade: int = 24) -> tuple[int, ...]:
    """Log-spaced integer grid, deduplicated, ``per_decade`` points per decade."""
    if lo < 1 or hi < lo:
        raise ConfigError(f"grid bounds must satisfy 1 <= lo <= hi, got [{lo}, {hi}]")
    if per_decade < 1:
        raise ConfigError(f"per-decade count must be >= 1, got {per_decade}")
    decades = np.log10(hi / lo)
    count = max(2, int(round(decades * per_decade)) + 1)
    raw = np.round(np.logspace(np.log10(lo), np.log10(hi), count)).astype(int)
    return tuple(int(n) for n in np.unique(raw))


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Resolved inputs of one experiment.

    ``terms`` are the Hamiltonian summands, ``label`` a short human-readable
    tag for them ("ising:2" or "custom").  ``n_grid`` lists the step numbers
    to visit, strictly increasing.  ``master_seed`` feeds every derived
    generator; ``out`` is the CSV destination (``None`` writes to stdout).
    """

    terms: tuple[np.ndarray, ...]
    label: str
    noise: NoiseModel
    t: float = 0.1
    a: float = 1.0
    n_grid: tuple[int, ...] = field(default_factory=default_n_grid)
    metrics: tuple[Metric, ...] = (JDistance(),)
    runs: int = 100
    master_seed: int = 0
    sdp_tol: float = 1e-7
    out: str | None = None

    def __post_init__(self):
        if not self.terms:
            raise ConfigError("config needs at least one Hamiltonian term")
        if self.t < 0:
            raise ConfigError(f"t must be >= 0, got {self.t}")
        if self.a <= 0:
            raise ConfigError(f"a must be > 0, got {self.a}")
        grid = tuple(int(n) for n in self.n_grid)
        if not grid:
            raise ConfigError("n_grid must not be empty")
        if grid[0] < 1:
            raise ConfigError(f"n_grid entries must be >= 1, got {grid[0]}")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("n_grid must be strictly increasing")
        object.__setattr__(self, "n_grid", grid)
        if not self.metrics:
            raise ConfigError("at least one metric is required")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError(f"master_seed must fit in 64 bits, got {self.master_seed}")
        if self.sdp_tol <= 0:
            raise ConfigError(f"sdp_tol must be > 0, got {self.sdp_tol}")

    @property
    def dim(self) -> int:
        return self.terms[0].shape[0]


# -- config text ---------------------------------------------------------

_KNOWN_KEYS = (
    "hamiltonian",
    "t",
    "a",
    "n_grid",
    "noise",
    "metrics",
    "runs",
    "seed",
    "sdp_tol",
    "out",
)


def parse_config_text(text: str) -> dict[str, str]:
    """Read ``key = value`` lines; ``#`` starts a comment.

    Returns the raw string values; unknown or repeated keys fail with the
    offending line number.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, value = stripped.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(
                f"line {lineno}: unknown key {key!r} (known: {', '.join(_KNOWN_KEYS)})"
            )
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        raw[key] = value
    return raw


def parse_hamiltonian_setting(value: str) -> tuple[str, tuple[np.ndarray, ...]]:
    """Resolve the ``hamiltonian`` setting to a label and term list.

    Accepts the preset ``ising:N`` (optionally ``ising:N:periodic``) or an
    inline Hamiltonian description in the text format of
    :func:`trotopt.hamiltonians.terms_from_text`.
    """
    value = value.strip()
    if value.startswith("ising:"):
        parts = value.split(":")
        if len(parts) not in (2, 3) or (len(parts) == 3 and parts[2] != "periodic"):
            raise ConfigError(
                f"preset must look like 'ising:N' or 'ising:N:periodic', got {value!r}"
            )
        try:
            n_sites = int(parts[1])
        except ValueError:
            raise ConfigError(f"preset site count must be an integer, got {parts[1]!r}")
        terms = ising_chain(n_sites, periodic=len(parts) == 3)
        return value, tuple(terms)
    return "custom", tuple(terms_from_text(value))


def parse_noise(value: str) -> NoiseModel:
    """Parse ``model:parameter``, e.g. ``jitter:0.05`` or ``depol:1e-3``."""
    name, sep, param = value.partition(":")
    if not sep:
        raise ConfigError(f"noise must look like 'model:parameter', got {value!r}")
    try:
        strength = float(param)
    except ValueError:
        raise ConfigError(f"noise parameter must be a number, got {param!r}")
    try:
        if name == "jitter":
            return TimingJitter(strength)
        if name == "avg-jitter":
            return AveragedTimingJitter(strength)
        if name == "depol":
            return Depolarizing(strength)
        if name == "decoherence":
            return Decoherence(strength)
    except ValueError as exc:
        raise ConfigError(f"noise {value!r}: {exc}")
    raise ConfigError(
        f"unknown noise model {name!r} (known: jitter, avg-jitter, depol, decoherence)"
    )


def parse_metrics(value: str) -> tuple[Metric, ...]:
    """Parse a comma-separated metric list out of ``j, diamond, heuristic``."""
    out = []
    for name in value.split(","):
        name = name.strip()
        if name not in _METRIC_NAMES:
            raise ConfigError(
                f"unknown metric {name!r} (known: {', '.join(sorted(_METRIC_NAMES))})"
            )
        out.append(_METRIC_NAMES[name]())
    if not out:
        raise ConfigError("metrics must name at least one metric")
    return tuple(out)


def parse_n_grid(value: str) -> tuple[int, ...]:
    """Parse a step grid: ``1,2,4,8``, ``range:1:20`` or ``log:1:1000:24``."""
    value = value.strip()
    if value.startswith("log:"):
        parts = value.split(":")
        if len(parts) != 4:
            raise ConfigError(f"log grid must look like 'log:lo:hi:per_decade', got {value!r}")
        try:
            lo, hi, per_decade = int(parts[1]), int(parts[2]), int(parts[3])
        except ValueError:
            raise ConfigError(f"log grid bounds must be integers, got {value!r}")
        return default_n_grid(lo, hi, per_decade)
    if value.startswith("range:"):
        parts = value.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range grid must look like 'range:lo:hi', got {value!r}")
        try:
            lo, hi = int(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"range bounds must be integers, got {value!r}")
        if hi < lo:
            raise ConfigError(f"range is empty: {value!r}")
        return tuple(range(lo, hi + 1))
    try:
        return tuple(int(tok) for tok in value.split(","))
    except ValueError:
        raise ConfigError(f"n_grid must be a comma list of integers, got {value!r}")


def metric_name(metric: Metric) -> str:
    for name, cls in _METRIC_NAMES.items():
        if isinstance(metric, cls):
            return name
    raise TypeError(f"unknown metric {metric!r}")


def build_config(raw: dict[str, str], **overrides) -> ExperimentConfig:
    """Turn raw config strings plus keyword overrides into an ExperimentConfig.

    Overrides use the ExperimentConfig field names and win over file values;
    ``None`` overrides are ignored.
    """
    kwargs = {}
    label, terms = parse_hamiltonian_setting(raw.get("hamiltonian", "ising:2"))
    kwargs["label"] = label
    kwargs["terms"] = terms
    kwargs["noise"] = parse_noise(raw.get("noise", "avg-jitter:0.01"))
    for key, cast in (("t", float), ("a", float), ("runs", int), ("sdp_tol", float)):
        if key in raw:
            try:
                kwargs[key] = cast(raw[key])
            except ValueError:
                raise ConfigError(f"{key} must be a {cast.__name__}, got {raw[key]!r}")
    if "seed" in raw:
        try:
            kwargs["master_seed"] = int(raw["seed"])
        except ValueError:
            raise ConfigError(f"seed must be an integer, got {raw['seed']!r}")
    if "n_grid" in raw:
        kwargs["n_grid"] = parse_n_grid(raw["n_grid"])
    if "metrics" in raw:
        kwargs["metrics"] = parse_metrics(raw["metrics"])
    if "out" in raw:
        kwargs["out"] = raw["out"]
    for key, value in overrides.items():
        if value is not None:
            kwargs[key] = value
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc))


def config_hash(config: ExperimentConfig) -> str:
    """Short stable digest of everything that determines the outputs."""
    digest = hashlib.sha256()
    for term in config.terms:
        digest.update(np.ascontiguousarray(term).tobytes())
    fields = (
        config.label,
        repr(config.noise),
        f"{config.t!r}",
        f"{config.a!r}",
        config.n_grid,
        tuple(repr(m) for m in config.metrics),
        config.runs,
        config.master_seed,
        f"{config.sdp_tol!r}",
    )
    digest.update(repr(fields).encode())
    return digest.hexdigest()[:12]


def seeded_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Generator for one experiment point, independent of execution order."""
    return np.random.default_rng(np.random.SeedSequence(entropy=master_seed, spawn_key=key))


# -- distances and bounds ------------------------------------------------


def _distance(faulty, ideal, metric: Metric, sdp_tol: float) -> tuple[float, str]:
    """Metric dispatch returning (value, status); SDP failures are reported
    in the status with the best upper bound as the value."""
    if isinstance(metric, JDistance):
        return j_distance(faulty, ideal), "ok"
    if isinstance(metric, InducedTraceHeuristic):
        return induced_trace_distance_heuristic(faulty, ideal, metric), "ok"
    if isinstance(metric, Diamond):
        try:
            return diamond_distance(faulty, ideal, tol=sdp_tol), "ok"
        except DiamondNormError as exc:
            return exc.primal, exc.status
    raise TypeError(f"unknown metric {metric!r}")


def _benchmark(metric: Metric, d: int) -> float:
    unstabilized, stabilized = noise_benchmarks(d)
    return unstabilized if isinstance(metric, InducedTraceHeuristic) else stabilized


def tradeoff_coefficients(config: ExperimentConfig, metric: Metric) -> tuple[float, float]:
    """(step_cost, noise_cost) of the analytic bound for this config.

    Timing jitter couples through the effective width ``a * sigma``;
    decoherence has no per-step cost and is handled by
    :func:`trotopt.tradeoff.decoherence_bound` instead.
    """
    commutator_strength, jitter_strength = defect_strengths(
        config.terms, metric, config.sdp_tol
    )
    noise = config.noise
    if isinstance(noise, (TimingJitter, AveragedTimingJitter)):
        return jitter_costs(
            commutator_strength, jitter_strength, config.t, config.a * noise.sigma
        )
    if isinstance(noise, Depolarizing):
        return depolarizing_costs(commutator_strength, noise.p, config.t, config.dim)
    if isinstance(noise, Decoherence):
        return commutator_strength * config.t**2 / 2.0, 0.0
    raise TypeError(f"unknown noise model {noise!r}")


def _bound_value(config: ExperimentConfig, metric: Metric, n: int, costs) -> float:
    if isinstance(config.noise, Decoherence):
        if config.t == 0.0:
            return 0.0
        strength = 2.0 * costs[0] / config.t**2
        return decoherence_bound(
            n, config.t, config.noise.gamma, config.a, strength, config.dim
        )
    return costs[0] / n + costs[1] * n


# -- sweep ---------------------------------------------------------------


def sweep_point(config: ExperimentConfig, index: int, costs: dict) -> list[tuple]:
    """All CSV rows for one grid point; ``costs`` maps metric name to the
    precomputed bound coefficients."""
    n = config.n_grid[index]
    plan = TrotterPlan(config.terms, t=config.t, n=n, a=config.a)
    rng = seeded_rng(config.master_seed, index)
    faulty = faulty_trotter(plan, config.noise, rng)
    ideal = ideal_map(plan)
    rows = []
    for metric in config.metrics:
        name = metric_name(metric)
        value, status = _distance(faulty, ideal, metric, config.sdp_tol)
        bound = _bound_value(config, metric, n, costs[name])
        rows.append((n, name, value, bound, _benchmark(metric, config.dim), status))
    return rows


def _sweep_task(args):
    return sweep_point(*args)


def sweep_rows(config: ExperimentConfig, jobs: int = 1) -> list[tuple]:
    """Rows of the step-number sweep, sorted by (n, metric)."""
    costs = {
        metric_name(metric): tradeoff_coefficients(config, metric)
        for metric in config.metrics
    }
    tasks = [(config, i, costs) for i in range(len(config.n_grid))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_sweep_task, tasks))
    else:
        chunks = [sweep_point(*task) for task in tasks]
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (r[0], r[1]))
    return rows


# -- Monte-Carlo runs ----------------------------------------------------


def _unitary_distance(u, ideal_u, metric: Metric, sdp_tol: float) -> float:
    if isinstance(metric, Diamond):
        return diamond_distance_unitary(u, ideal_u)
    if isinstance(metric, JDistance):
        return j_distance(unitary_superop(u), unitary_superop(ideal_u))
    if isinstance(metric, InducedTraceHeuristic):
        return induced_trace_distance_heuristic(
            unitary_superop(u), unitary_superop(ideal_u), metric
        )
    raise TypeError(f"unknown metric {metric!r}")


def montecarlo_point(config: ExperimentConfig, index: int) -> list[tuple]:
    """All rows for one grid point: every run, their mean, the averaged map."""
    n = config.n_grid[index]
    sigma = config.noise.sigma
    plan = TrotterPlan(config.terms, t=config.t, n=n, a=config.a)
    total = sum(config.terms[1:], start=config.terms[0].copy())
    ideal_u = hermitian_exp(total, config.t)
    ideal = ideal_map(plan)
    rows = []
    for metric in config.metrics:
        name = metric_name(metric)
        values = []
        for run in range(config.runs):
            rng = seeded_rng(config.master_seed, run, n)
            u = sampled_trotter_unitary(plan, sigma, rng)
            values.append(_unitary_distance(u, ideal_u, metric, config.sdp_tol))
        averaged = faulty_trotter(plan, AveragedTimingJitter(sigma))
        # on SDP failure the recorded value is the best upper bound
        avg_value, _ = _distance(averaged, ideal, metric, config.sdp_tol)
        rows.extend((str(run), n, name, v) for run, v in enumerate(values))
        rows.append(("averaged", n, name, avg_value))
        rows.append(("mean", n, name, float(np.mean(values))))
    return rows


def _montecarlo_task(args):
    return montecarlo_point(*args)


def montecarlo_rows(config: ExperimentConfig, jobs: int = 1) -> list[tuple]:
    """Rows of the Monte-Carlo experiment, sorted by (n, metric, run id).

    Aggregate rows sort after the numbered runs: "averaged" (distance of the
    mean channel) then "mean" (mean of the per-run distances).
    """
    if not isinstance(config.noise, TimingJitter):
        raise ConfigError(
            "montecarlo needs sampled timing jitter noise (noise = jitter:SIGMA)"
        )
    tasks = [(config, i) for i in range(len(config.n_grid))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_montecarlo_task, tasks))
    else:
        chunks = [montecarlo_point(*task) for task in tasks]
    rows = [row for chunk in chunks for row in chunk]

    def run_key(run_id: str):
        return (0, int(run_id), "") if run_id.isdigit() else (1, 0, run_id)

    rows.sort(key=lambda r: (r[1], r[2], run_key(r[0])))
    return rows


# -- CSV -----------------------------------------------------------------


def format_csv(header, rows, config: ExperimentConfig | None = None) -> str:
    """Render rows to CSV text with the config-hash comment line on top."""
    buf = io.StringIO()
    if config is not None:
        buf.write(f"# config {config_hash(config)} trotopt {__version__}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_format_cell(cell) for cell in row) + "\n")
    return buf.getvalue()


def _format_cell(cell) -> str:
    if isinstance(cell, float):
        return f"{cell:.12g}"
    return str(cell)


# -- reports -------------------------------------------------------------


def optimum_report(config: ExperimentConfig, dmax: float | None = None) -> str:
    """Predicted and measured optimal step numbers, one block per metric."""
    noise = config.noise
    if not isinstance(noise, (AveragedTimingJitter, Depolarizing)):
        raise ConfigError(
            "optimum prediction needs averaged timing jitter or depolarizing noise"
        )
    lines = [
        f"hamiltonian {config.label} (dim {config.dim}), t = {config.t:g}, a = {config.a:g}",
        f"noise {noise!r}",
    ]
    for metric in config.metrics:
        name = metric_name(metric)
        strengths = defect_strengths(config.terms, metric, config.sdp_tol)
        step_cost, noise_cost = tradeoff_coefficients(config, metric)
        lines.append(f"metric {name}:")
        lines.append(f"  commutator_strength = {strengths[0]:.6g}")
        lines.append(f"  jitter_strength     = {strengths[1]:.6g}")
        lines.append(f"  step_cost = {step_cost:.6g}, noise_cost = {noise_cost:.6g}")
        if step_cost > 0.0 and noise_cost > 0.0:
            lines.append(f"  real optimal steps    = {optimal_steps(step_cost, noise_cost):.6g}")
            lines.append(f"  integer optimal steps = {best_integer_steps(step_cost, noise_cost)}")
            lines.append(
                f"  bound at optimum      = {distance_at_optimum(step_cost, noise_cost):.6g}"
            )
        else:
            lines.append("  no finite optimum")
        if (
            dmax is not None
            and isinstance(noise, AveragedTimingJitter)
            and min(strengths) > 0.0
            and noise.sigma > 0.0
        ):
            horizon = max_simulation_time(
                dmax, strengths[0], strengths[1], config.a * noise.sigma
            )
            lines.append(f"  max simulation time (budget {dmax:g}) = {horizon:.6g}")
        measured_n, measured_d = measured_optimum(config, metric)
        lines.append(f"  measured optimal steps    = {measured_n}")
        lines.append(f"  measured minimum distance = {measured_d:.6g}")
    return "\n".join(lines) + "\n"


def measured_optimum(config: ExperimentConfig, metric: Metric) -> tuple[int, float]:
    """Grid argmin of the exact numerical distance over ``config.n_grid``."""
    best = None
    for index, n in enumerate(config.n_grid):
        plan = TrotterPlan(config.terms, t=config.t, n=n, a=config.a)
        rng = seeded_rng(config.master_seed, index)
        faulty = faulty_trotter(plan, config.noise, rng)
        value, _ = _distance(faulty, ideal_map(plan), metric, config.sdp_tol)
        if best is None or value < best[1]:
            best = (n, value)
    return best


def benchmark_report(dim: int, sdp_tol: float = 1e-7) -> tuple[str, bool]:
    """Closed-form noise benchmarks against live metric evaluations.

    Returns the report text and whether every live value matched: J to
    1e-10, diamond to max(1e-6, 10 * sdp_tol), the heuristic to 1e-4.
    """
    unstabilized, stabilized = noise_benchmarks(dim)
    ident = np.eye(dim * dim, dtype=complex)
    noisy = complete_noise(dim)
    live_j = j_distance(ident, noisy)
    live_diamond = diamond_distance(ident, noisy, tol=sdp_tol)
    live_heuristic = induced_trace_distance_heuristic(ident, noisy)
    checks = (
        ("J-distance", live_j, stabilized, 1e-10),
        ("diamond distance", live_diamond, stabilized, max(1e-6, 10.0 * sdp_tol)),
        ("heuristic value", live_heuristic, unstabilized, 1e-4),
    )
    lines = [
        f"dimension {dim}",
        f"  unstabilized benchmark 2 - 2/d   = {unstabilized:.12g}",
        f"  stabilized benchmark   2 - 2/d^2 = {stabilized:.12g}",
    ]
    all_ok = True
    for label, live, want, tol in checks:
        delta = abs(live - want)
        ok = delta <= tol
        all_ok = all_ok and ok
        lines.append(
            f"  live {label:<16} = {live:.12g}  (|delta| = {delta:.2e}, "
            f"{'ok' if ok else f'exceeds {tol:g}'})"
        )
    lines.append("all checks passed" if all_ok else "CHECKS FAILED")
    return "\n".join(lines) + "\n", all_ok
