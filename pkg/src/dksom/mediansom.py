"""Median SOM: every prototype is one of the observations.

The batch update picks, for unit k, the data index minimizing
sum_i h(k, c_i) D[i, j] over candidates j (a neighborhood-weighted
generalized median). Because several units can elect the same observation,
an explicit collision-resolution pass keeps prototype indices distinct
whenever K <= N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import DEFAULT_SIGMA_END, DecaySchedule, Lattice, default_sigma_start
from .vectorsom import map_energy


@dataclass
class MedianSOMResult:
    prototype_indices: np.ndarray  # K, data indices
    assignments: np.ndarray  # N
    assignment_trace: np.ndarray  # T x N
    energy_trace: np.ndarray  # T
    lattice: Lattice
    collisions_detected: int = 0  # units whose unconstrained choice collided, summed over iterations
    collisions_unresolved: int = 0  # duplicate prototypes left at the end (only when K > N)
    stopped_early: bool = False


def median_costs(d_values: np.ndarray, assignments: np.ndarray, h: np.ndarray) -> np.ndarray:
    """K x N election costs  cost[k, j] = sum_i h(k, c_i) D[i, j].

    Naively this is a K x N x N contraction. Grouping rows of D by their
    assigned unit first (S[l] = sum of D rows assigned to l) costs one pass
    over D (N^2 adds), and the contraction collapses to h @ S at N K^2
    multiplies. The pass gathers rows unit by unit so it streams even when
    D is far larger than cache.
    """
    k = h.shape[0]
    s = np.zeros((k, d_values.shape[1]))
    for unit in np.unique(assignments):
        s[unit] = d_values[assignments == unit].sum(axis=0)
    return h @ s


def resolve_collisions(costs: np.ndarray) -> tuple[np.ndarray, int, int]:
    """Elect one data index per unit, keeping indices distinct while possible.

    Units are processed by decreasing regret (gap between their two cheapest
    candidates, unit index breaking ties) and each takes its cheapest
    still-unused index: a unit that would pay dearly for switching picks
    before one that is nearly indifferent. Once every index is taken
    (K > N), leftover units fall back to their unconstrained optimum and are
    counted as unresolved.

    Returns (indices, n_detected, n_unresolved).
    """
    k, n = costs.shape
    raw = np.argmin(costs, axis=1)
    detected = k - np.unique(raw).size
    if detected == 0:
        return raw, 0, 0
    if n >= 2:
        two = np.partition(costs, 1, axis=1)
        regret = two[:, 1] - two[:, 0]
    else:
        regret = np.full(k, np.inf)
    order = np.lexsort((np.arange(k), -regret))
    result = np.empty(k, dtype=np.int64)
    used = np.zeros(n, dtype=bool)
    taken = 0
    for unit in order:
        if taken == n:
            result[unit] = raw[unit]
            continue
        masked = np.where(used, np.inf, costs[unit])
        choice = int(np.argmin(masked))
        result[unit] = choice
        used[choice] = True
        taken += 1
    unresolved = k - np.unique(result).size
    return result, detected, unresolved


def median_update(
    d_values: np.ndarray, assignments: np.ndarray, h: np.ndarray
) -> tuple[np.ndarray, int, int]:
    """One full prototype election: costs, argmin, collision resolution."""
    return resolve_collisions(median_costs(d_values, assignments, h))


def train_batch_median(
    dismatrix,
    lattice: Lattice,
    n_iter: int = 50,
    sigma_start: float | None = None,
    sigma_end: float = DEFAULT_SIGMA_END,
    sigma_mode: str = "exponential_decay",
    seed: int = 0,
    stop_on_stable_assignment: bool = True,
) -> MedianSOMResult:
    """Batch median SOM on a dissimilarity matrix.

    Runs until the assignment repeats or n_iter is reached. Prototypes are
    seeded from a without-replacement draw when K <= N and with replacement
    otherwise (the run then necessarily carries duplicate prototypes,
    reported via collisions_unresolved).
    """
    d = dismatrix.values
    n, k = d.shape[0], lattice.n_units
    if sigma_start is None:
        sigma_start = default_sigma_start(lattice)
    sigmas = DecaySchedule(sigma_start, sigma_end, n_iter, sigma_mode).values()
    rng = np.random.default_rng(seed)
    protos = rng.choice(n, size=k, replace=k > n)

    trace: list[np.ndarray] = []
    energies: list[float] = []
    detected_total = 0
    unresolved = 0
    stopped = False
    prev = None
    for t in range(n_iter):
        h = lattice.neighborhood(sigmas[t])
        dist = d[:, protos]
        c = np.argmin(dist, axis=1)
        trace.append(c)
        energies.append(map_energy(dist, c, h))
        if stop_on_stable_assignment and prev is not None and np.array_equal(c, prev):
            stopped = True
            break
        prev = c
        protos, detected, unresolved = median_update(d, c, h)
        detected_total += detected

    final = np.argmin(d[:, protos], axis=1)
    return MedianSOMResult(
        protos, final, np.asarray(trace), np.asarray(energies), lattice,
        detected_total, unresolved, stopped,
    )
