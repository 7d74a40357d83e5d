"""Parameter-space exploration: seeded random scans and bounded optimization.

Scans draw engine parameters uniformly from a box, run each engine to its
stop rule, and record total work next to the run's correlation maxima.
Sample i always uses the random substream spawned as (seed, spawn_key=(i,)),
so results are bit-identical however the samples are distributed over
workers.

The optimizer minimizes total work (most negative is best) with bounded
Nelder-Mead from several seeded starting points, or optionally with
differential evolution.  The landscape oscillates strongly along tau_comp,
whose value sets the medium's dynamical phase between coupling strokes, so
restarts are spread over the best of a coarse seeded presample rather than
blind uniform draws.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from multiprocessing import Pool
from typing import Callable, Optional

import numpy as np
from scipy.optimize import differential_evolution, minimize

from .energetics import ergotropy
from .engine import EngineParams, WorkNonNegative, run_reduced
from .errors import ConfigError
from .propagators import RampMode
from .states import Preparation, matched_squeezing, nbar_from_beta, \
    squeezed_preparation, thermal_preparation

DEFAULT_BETA1 = 1e-2
DEFAULT_SCAN_HEAT_SAMPLES = 4
DEFAULT_SCAN_COOL_SAMPLES = 2

# Draw order within one sample's substream; omega3 comes last when boxed.
DIMENSIONS = ("alpha12", "alpha23", "tau_h", "tau_c", "tau_comp", "omega3")


@dataclass(frozen=True)
class ParameterBox:
    """Closed per-parameter intervals; a collapsed interval pins the value.

    omega3=None means the frequency is not part of the box and must be
    supplied by the caller; scans default it to (0.01, 0.99), keeping clear
    of the degenerate-ramp corner at omega3 -> omega1.
    """

    alpha12: tuple[float, float] = (1e-4, 0.05)
    alpha23: tuple[float, float] = (1e-4, 0.05)
    tau_h: tuple[float, float] = (1e-3, 1.0)
    tau_c: tuple[float, float] = (1e-3, 1.0)
    tau_comp: tuple[float, float] = (1.0, 100.0)
    omega3: Optional[tuple[float, float]] = None

    def __post_init__(self) -> None:
        for name in DIMENSIONS:
            iv = getattr(self, name)
            if iv is None:
                continue
            lo, hi = iv
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ConfigError(f"{name} interval {iv} is not an ordered pair")
            if lo < 0:
                raise ConfigError(f"{name} interval {iv} reaches below zero")
        if self.omega3 is not None and not (0.0 < self.omega3[0] and self.omega3[1] < 1.0):
            raise ConfigError(f"omega3 interval {self.omega3} must sit inside (0, 1)")

    def interval(self, name: str) -> tuple[float, float]:
        iv = getattr(self, name)
        if iv is None:
            raise ConfigError(f"box has no {name} interval")
        return iv

    def clip(self, name: str, value: float) -> float:
        lo, hi = self.interval(name)
        return min(max(value, lo), hi)


class PrepFamily(enum.Enum):
    """Initial-state family of a scan or optimization.

    THERMAL: hot oscillator thermal at beta1, the rest in vacuum.
    SQUEEZED: hot oscillator squeezed to the same mean energy, rest vacuum.
    """

    THERMAL = "thermal"
    SQUEEZED = "squeezed"

    def preparation(self, omega3: float, beta1: float = DEFAULT_BETA1) -> Preparation:
        if self is PrepFamily.THERMAL:
            return thermal_preparation(beta1=beta1, omega3=omega3)
        return squeezed_preparation(beta1=beta1, omega3=omega3)

    def matched_r1(self, beta1: float = DEFAULT_BETA1) -> float:
        return matched_squeezing(nbar_from_beta(beta1, 1.0))


@dataclass(frozen=True)
class ScanSample:
    """One scan draw and the outcome of its engine run.

    Both correlation trios are recorded whatever the family; analyses pick
    the one they care about.  Runs whose first cycle already fails the work
    criterion have cycles=0 and w_total=0, with correlation maxima taken
    from that probe cycle.
    """

    index: int
    alpha12: float
    alpha23: float
    tau_h: float
    tau_c: float
    tau_comp: float
    omega3: float
    cycles: int
    w_total: float
    d12_max: float
    d23_max: float
    d13_max: float
    n12_max: float
    n23_max: float
    n13_max: float

    COLUMNS = ("index", "alpha12", "alpha23", "tau_h", "tau_c", "tau_comp",
               "omega3", "cycles", "w_total", "d12_max", "d23_max", "d13_max",
               "n12_max", "n23_max", "n13_max")


@dataclass(frozen=True)
class ScanSettings:
    """Everything a scan worker needs besides the sample index."""

    seed: int
    box: ParameterBox
    family: PrepFamily
    beta1: float
    ramp: RampMode
    max_cycles: int
    min_alpha23_tau_c: float
    heat_samples: int = DEFAULT_SCAN_HEAT_SAMPLES
    cool_samples: int = DEFAULT_SCAN_COOL_SAMPLES


def _draw(box: ParameterBox, rng: np.random.Generator,
          min_alpha23_tau_c: float) -> dict[str, float]:
    """One parameter draw; resamples within the substream until the
    weak-cold-contact filter passes, so the filter cannot break determinism."""
    while True:
        values = {name: rng.uniform(*box.interval(name))
                  for name in DIMENSIONS if getattr(box, name) is not None}
        if values["alpha23"] * values["tau_c"] >= min_alpha23_tau_c:
            return values


def scan_sample(index: int, settings: ScanSettings) -> ScanSample:
    rng = np.random.default_rng(
        np.random.SeedSequence(settings.seed, spawn_key=(index,)))
    values = _draw(settings.box, rng, settings.min_alpha23_tau_c)
    omega3 = values["omega3"]
    prep = settings.family.preparation(omega3, settings.beta1)
    params = EngineParams(
        prep=prep, alpha12=values["alpha12"], alpha23=values["alpha23"],
        tau_comp=values["tau_comp"], tau_h=values["tau_h"], tau_c=values["tau_c"],
        ramp=settings.ramp, stop=WorkNonNegative(), max_cycles=settings.max_cycles)
    result = run_reduced(params, heat_samples=settings.heat_samples,
                         cool_samples=settings.cool_samples)
    d12, d23, d13 = result.discord_max
    n12, n23, n13 = result.negativity_max
    return ScanSample(
        index=index, alpha12=values["alpha12"], alpha23=values["alpha23"],
        tau_h=values["tau_h"], tau_c=values["tau_c"], tau_comp=values["tau_comp"],
        omega3=omega3, cycles=result.n_cycles, w_total=result.w_total,
        d12_max=d12, d23_max=d23, d13_max=d13,
        n12_max=n12, n23_max=n23, n13_max=n13)


def _scan_worker(args: tuple[int, ScanSettings]) -> ScanSample:
    return scan_sample(*args)


def random_scan(n_samples: int, seed: int, *, box: Optional[ParameterBox] = None,
                family: PrepFamily = PrepFamily.THERMAL, beta1: float = DEFAULT_BETA1,
                ramp: RampMode = RampMode.QUASI_STATIC, max_cycles: int = 10_000,
                min_alpha23_tau_c: float = 0.0, workers: int = 1) -> list[ScanSample]:
    """Run n_samples independent seeded engine draws; order follows index."""
    if n_samples < 0:
        raise ConfigError(f"n_samples must be >= 0, got {n_samples}")
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    if box is None:
        box = ParameterBox(omega3=(0.01, 0.99))
    if box.omega3 is None:
        raise ConfigError("scans need an omega3 interval in the box")
    settings = ScanSettings(seed=seed, box=box, family=family, beta1=beta1,
                            ramp=ramp, max_cycles=max_cycles,
                            min_alpha23_tau_c=min_alpha23_tau_c)
    jobs = [(i, settings) for i in range(n_samples)]
    if workers == 1 or n_samples < 2 * workers:
        return [scan_sample(i, settings) for i, _ in jobs]
    with Pool(workers) as pool:
        return pool.map(_scan_worker, jobs, chunksize=max(1, n_samples // (8 * workers)))


# -- optimization -----------------------------------------------------------


class Objective(enum.Enum):
    """What the optimizer minimizes.

    TOTAL_WORK: the run's total work (most negative wins).
    WORK_ERGOTROPY_RATIO: total work divided by the preparation's ergotropy,
    making runs at different omega3 comparable on a [-1, 0] scale.
    """

    TOTAL_WORK = "total_work"
    WORK_ERGOTROPY_RATIO = "work_ergotropy_ratio"


@functools.lru_cache(maxsize=256)
def _ergotropy_cached(prep: Preparation) -> float:
    return ergotropy(prep)


@dataclass(frozen=True)
class OptimizeOutcome:
    """Best point found, with provenance.

    value is the objective at best_params; ratio is w_total over the
    preparation's ergotropy regardless of the objective used.  converged is
    False when every restart ran out of its evaluation budget before
    meeting the simplex tolerances.  trace holds (evaluation_count,
    best_value_so_far) at every improvement, merged across restarts in
    evaluation order.
    """

    best_params: EngineParams
    value: float
    w_total: float
    ratio: float
    cycles: int
    evaluations: int
    converged: bool
    objective: Objective
    trace: tuple[tuple[int, float], ...]


@dataclass
class _Tracker:
    """Shared evaluation counter and improvement trace."""

    count: int = 0
    best: float = math.inf

    def __post_init__(self) -> None:
        self.trace: list[tuple[int, float]] = []

    def record(self, value: float) -> None:
        self.count += 1
        if value < self.best:
            self.best = value
            self.trace.append((self.count, value))


def _objective_fn(box: ParameterBox, free: list[str], fixed: dict[str, float],
                  family: PrepFamily, beta1: float, ramp: RampMode,
                  max_cycles: int, objective: Objective,
                  tracker: Optional[_Tracker]) -> Callable[[np.ndarray], float]:
    def evaluate(x: np.ndarray) -> float:
        values = dict(fixed)
        for name, xi in zip(free, x):
            values[name] = box.clip(name, float(xi))
        prep = family.preparation(values["omega3"], beta1)
        params = EngineParams(
            prep=prep, alpha12=values["alpha12"], alpha23=values["alpha23"],
            tau_comp=values["tau_comp"], tau_h=values["tau_h"],
            tau_c=values["tau_c"], ramp=ramp, stop=WorkNonNegative(),
            max_cycles=max_cycles)
        result = run_reduced(params, correlations=False)
        value = result.w_total
        if objective is Objective.WORK_ERGOTROPY_RATIO:
            value /= _ergotropy_cached(prep)
        if tracker is not None:
            tracker.record(value)
        return value

    return evaluate


def optimize(*, omega3: Optional[float] = None, box: Optional[ParameterBox] = None,
             family: PrepFamily = PrepFamily.THERMAL, beta1: float = DEFAULT_BETA1,
             objective: Objective = Objective.TOTAL_WORK, budget: int = 6000,
             restarts: int = 16, seed: int = 0, method: str = "nelder-mead",
             ramp: RampMode = RampMode.QUASI_STATIC,
             max_cycles: int = 10_000) -> OptimizeOutcome:
    """Minimize the objective over the box; deterministic for a given seed.

    omega3 is either a fixed scalar or an interval of the box (exactly one
    of the two).  budget caps objective evaluations across all restarts;
    when it is exhausted before any restart meets its tolerances the
    best-so-far point is returned with converged=False.
    """
    if box is None:
        box = ParameterBox()
    if (omega3 is None) == (box.omega3 is None):
        raise ConfigError("give either a scalar omega3 or an omega3 interval, not both")
    if budget < 1:
        raise ConfigError(f"budget must be >= 1, got {budget}")
    if restarts < 1:
        raise ConfigError(f"restarts must be >= 1, got {restarts}")
    if method not in ("nelder-mead", "differential-evolution"):
        raise ConfigError(f"unknown optimizer method {method!r}")

    fixed: dict[str, float] = {} if omega3 is None else {"omega3": omega3}
    free: list[str] = []
    for name in DIMENSIONS:
        iv = getattr(box, name)
        if iv is None:
            continue
        lo, hi = iv
        if lo == hi:
            fixed[name] = lo
        else:
            free.append(name)

    tracker = _Tracker()
    fn = _objective_fn(box, free, fixed, family, beta1, ramp, max_cycles,
                       objective, tracker)
    bounds = [box.interval(name) for name in free]

    if not free:
        value = fn(np.empty(0))
        x_best, converged = np.empty(0), True
    elif method == "differential-evolution":
        x_best, value, converged = _run_de(fn, bounds, seed, budget, tracker)
    else:
        x_best, value, converged = _run_nelder_mead(
            fn, bounds, seed, budget, restarts, tracker)

    values = dict(fixed)
    for name, xi in zip(free, x_best):
        values[name] = box.clip(name, float(xi))
    prep = family.preparation(values["omega3"], beta1)
    best_params = EngineParams(
        prep=prep, alpha12=values["alpha12"], alpha23=values["alpha23"],
        tau_comp=values["tau_comp"], tau_h=values["tau_h"], tau_c=values["tau_c"],
        ramp=ramp, stop=WorkNonNegative(), max_cycles=max_cycles)
    final = run_reduced(best_params, correlations=False)
    return OptimizeOutcome(
        best_params=best_params, value=value, w_total=final.w_total,
        ratio=final.w_total / _ergotropy_cached(prep), cycles=final.n_cycles,
        evaluations=tracker.count, converged=converged, objective=objective,
        trace=tuple(tracker.trace))


def _run_nelder_mead(fn, bounds, seed: int, budget: int, restarts: int,
                     tracker: _Tracker) -> tuple[np.ndarray, float, bool]:
    """Presample the box, then polish the best candidates with Nelder-Mead."""
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    n_pre = min(max(4 * restarts, 64), max(1, budget // 2))
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    candidates = rng.uniform(lo, hi, size=(n_pre, len(bounds)))
    scores = np.array([fn(c) for c in candidates])
    order = np.argsort(scores)

    per_restart = max(len(bounds) + 2, (budget - n_pre) // restarts)
    best_x = candidates[order[0]]
    best_v = float(scores[order[0]])
    converged = False
    for k in range(restarts):
        if tracker.count >= budget:
            break
        x0 = candidates[order[k % n_pre]]
        res = minimize(fn, x0, method="Nelder-Mead", bounds=bounds,
                       options={"maxfev": min(per_restart, budget - tracker.count),
                                "xatol": 1e-6, "fatol": 1e-10})
        if res.fun < best_v:
            best_v, best_x = float(res.fun), np.asarray(res.x)
        converged = converged or bool(res.success)
    return best_x, best_v, converged


def _run_de(fn, bounds, seed: int, budget: int,
            tracker: _Tracker) -> tuple[np.ndarray, float, bool]:
    ndim = len(bounds)
    popsize = 15
    maxiter = max(1, budget // (popsize * ndim) - 1)
    res = differential_evolution(
        fn, bounds, seed=seed, maxiter=maxiter, popsize=popsize,
        polish=False, updating="deferred", init="sobol", tol=1e-8)
    return np.asarray(res.x), float(res.fun), bool(res.success)
