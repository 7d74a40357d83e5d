"""Energy functionals: mode energies, cycle efficiency, and ergotropy.

Sign conventions match the engine bookkeeping: negative work is produced by
the machine, negative heat is absorbed by the working medium.  Ergotropy is
computed by spectral rearrangement: the eigenvalues of the (product) initial
density operator, sorted descending, are reassigned to the globally sorted
energy levels, and the energy drop is the maximum work a unitary can extract.
All ergotropy values are relative to the ground-state energy; zero-point
offsets cancel in the rearrangement.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .states import CovarianceMatrix, ModeSpec, Preparation, SqueezedVacuum


def mode_energy(sigma: "CovarianceMatrix | np.ndarray", mode: int, omega: float) -> float:
    """Internal energy ⟨p²⟩/2 + ω²⟨x²⟩/2 of one oscillator (1-based index)."""
    mat = sigma.matrix if isinstance(sigma, CovarianceMatrix) else np.asarray(sigma, dtype=float)
    n = mat.shape[0] // 2
    if not 1 <= mode <= n:
        raise ValueError(f"mode must lie in 1..{n}, got {mode}")
    i = mode - 1
    return 0.5 * (omega**2 * mat[i, i] + mat[i + n, i + n])


def mode_energies(sigma: "CovarianceMatrix | np.ndarray", omegas) -> np.ndarray:
    mat = sigma.matrix if isinstance(sigma, CovarianceMatrix) else np.asarray(sigma, dtype=float)
    n = mat.shape[0] // 2
    w = np.asarray(omegas, dtype=float)
    if w.shape != (n,):
        raise ValueError(f"expected {n} frequencies, got shape {w.shape}")
    diag = np.diagonal(mat)
    return 0.5 * (w**2 * diag[:n] + diag[n:])


@dataclass(frozen=True)
class EfficiencyResult:
    """Cycle efficiency in [0, 1], or undefined when no heat was absorbed."""

    value: "float | None"

    @property
    def is_defined(self) -> bool:
        return self.value is not None

    def as_float(self) -> float:
        return math.nan if self.value is None else self.value


def efficiency(work: float, delta_u: float, q1: float, q2: float) -> EfficiencyResult:
    """Ratio of produced work plus stored energy to the heat absorbed.

    Numerator max(0, -work + delta_u); denominator sums |Q| over the strictly
    negative heats (absorbed by the medium).  A zero denominator leaves the
    ratio undefined rather than raising.
    """
    numerator = max(0.0, -work + delta_u)
    denominator = sum(-q for q in (q1, q2) if q < 0.0)
    if denominator == 0.0:
        return EfficiencyResult(None)
    return EfficiencyResult(numerator / denominator)


@dataclass(frozen=True)
class SpectrumPopulation:
    """Descending eigenvalues of the initial density operator, truncated."""

    populations: np.ndarray
    tail_mass: float


def _mode_eigenvalues(mode: ModeSpec, tail: float) -> np.ndarray:
    """Descending single-mode eigenvalues carrying mass at least 1 - tail."""
    if isinstance(mode, SqueezedVacuum):
        # Pure state regardless of r; the Fock-diagonal weights are not eigenvalues.
        return np.array([1.0])
    if mode.nbar == 0.0:
        return np.array([1.0])
    ratio = mode.nbar / (1.0 + mode.nbar)
    count = max(1, math.ceil(math.log(tail) / math.log(ratio)))
    return (1.0 - ratio) * ratio ** np.arange(count)


def initial_spectrum(prep: Preparation, tail_mass: float = 1e-8) -> SpectrumPopulation:
    """Global spectrum of the three-mode product state, descending.

    Enumerates products of the per-mode eigenvalues largest-first with a
    priority queue until the retained mass reaches 1 - tail_mass.
    """
    if tail_mass <= 0.0:
        raise ValueError(f"tail_mass must be > 0, got {tail_mass}")
    per_mode = [_mode_eigenvalues(m, tail_mass / 3.0) for m in prep.modes]
    target = 1.0 - tail_mass

    def prob(idx: tuple[int, int, int]) -> float:
        return per_mode[0][idx[0]] * per_mode[1][idx[1]] * per_mode[2][idx[2]]

    start = (0, 0, 0)
    heap: list[tuple[float, tuple[int, int, int]]] = [(-prob(start), start)]
    seen = {start}
    out: list[float] = []
    total = 0.0
    while heap and total < target:
        neg_p, idx = heapq.heappop(heap)
        out.append(-neg_p)
        total += -neg_p
        for d in range(3):
            nxt = tuple(idx[k] + (k == d) for k in range(3))
            if nxt[d] < len(per_mode[d]) and nxt not in seen:
                seen.add(nxt)
                heapq.heappush(heap, (-prob(nxt), nxt))
    return SpectrumPopulation(np.asarray(out), max(0.0, 1.0 - total))


def _ascending_levels(frequencies: tuple[float, float, float], count: int,
                      budget: int) -> np.ndarray:
    """The count smallest excitation energies n·ω over occupation triples."""
    if count > budget:
        raise ConvergenceError(
            f"level enumeration needs {count} levels, budget is {budget}"
        )
    w = frequencies
    start = (0, 0, 0)
    heap: list[tuple[float, tuple[int, int, int]]] = [(0.0, start)]
    seen = {start}
    out = np.empty(count)
    for k in range(count):
        energy, idx = heapq.heappop(heap)
        out[k] = energy
        for d in range(3):
            nxt = tuple(idx[j] + (j == d) for j in range(3))
            if nxt not in seen:
                seen.add(nxt)
                heapq.heappush(heap, (nxt[0] * w[0] + nxt[1] * w[1] + nxt[2] * w[2], nxt))
    return out


def spectral_shortfall(populations, energies) -> float:
    """Mean energy of an assignment minus that of its passive rearrangement.

    Zero iff the assignment is already passive (larger weights on lower
    levels); this is the rearrangement core behind ergotropy.
    """
    p = np.asarray(populations, dtype=float)
    e = np.asarray(energies, dtype=float)
    if p.shape != e.shape:
        raise ValueError("populations and energies must have matching shapes")
    return float(p @ e - np.sort(p)[::-1] @ np.sort(e))


def ergotropy(prep: Preparation, convergence: float = 1e-6, *,
              tail_mass: float = 1e-8, level_budget: int = 10**6) -> float:
    """Maximum unitarily extractable work from the initial product state.

    The spectrum truncation is refined (tail divided by 100) until the value
    is stable to the requested relative tolerance.  Raises ConvergenceError
    when the level budget is exhausted first.
    """
    if convergence <= 0.0:
        raise ValueError(f"convergence must be > 0, got {convergence}")
    freqs = prep.frequencies
    e_init = sum(m.energy_above_ground(w) for m, w in zip(prep.modes, freqs))
    tail = tail_mass
    prev: "float | None" = None
    while True:
        spectrum = initial_spectrum(prep, tail)
        n = len(spectrum.populations)
        levels = _ascending_levels(freqs, n, level_budget)
        value = e_init - float(spectrum.populations @ levels)
        if prev is not None and abs(value - prev) <= convergence * max(1.0, abs(value)):
            return value
        prev = value
        tail /= 100.0
