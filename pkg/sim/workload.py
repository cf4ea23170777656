"""Seeded task generation: Poisson arrivals, per-category band mixes."""

from __future__ import annotations

import logging

import numpy as np

from core.views import Task
from sim.views import Bands, ScenarioSpec

logger = logging.getLogger(__name__)


def _draw_in_bands(bands: Bands, band_index: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    lows = np.array([bands[i][0] for i in range(3)])
    highs = np.array([bands[i][1] for i in range(3)])
    u = rng.random(band_index.size)
    return lows[band_index] + u * (highs[band_index] - lows[band_index])


def generate_workload(spec: ScenarioSpec, rng: np.random.Generator) -> list[Task]:
    """Exactly spec.task_count tasks in arrival order.

    Given the count, the arrival instants of a homogeneous Poisson process on
    [0, duration] are uniform order statistics, so they are drawn that way.
    """
    n = spec.task_count
    arrivals = np.sort(rng.uniform(0.0, spec.duration, size=n))

    categories = list(spec.task_mix.categories.items())
    shares = np.array([profile.share for _, profile in categories], dtype=np.float64)
    category_index = rng.choice(len(categories), size=n, p=shares / shares.sum())

    latency_band = np.zeros(n, dtype=np.int64)
    complexity_band = np.zeros(n, dtype=np.int64)
    privacy_p = np.zeros(n)
    data_lo = np.zeros(n)
    data_hi = np.zeros(n)
    for k, (_, profile) in enumerate(categories):
        mask = category_index == k
        count = int(mask.sum())
        latency_band[mask] = rng.choice(3, size=count, p=np.asarray(profile.latency_mix))
        complexity_band[mask] = rng.choice(3, size=count, p=np.asarray(profile.complexity_mix))
        privacy_p[mask] = profile.privacy_probability
        data_lo[mask], data_hi[mask] = profile.data_size

    latency = _draw_in_bands(spec.latency_bands, latency_band, rng)
    complexity = _draw_in_bands(spec.complexity_bands, complexity_band, rng)
    privacy = rng.random(n) < privacy_p
    data_size = (data_lo + rng.random(n) * (data_hi - data_lo)) * spec.data_size_scale()

    tasks = [
        Task(
            id=f"task-{i:05d}",
            arrival_time=float(arrivals[i]),
            latency_req=float(latency[i]),
            complexity=float(complexity[i]),
            data_size=float(data_size[i]),
            privacy=1 if privacy[i] else 0,
            category=categories[int(category_index[i])][0],
        )
        for i in range(n)
    ]
    logger.debug("generated %d tasks over %.0f s for scenario '%s'", n, spec.duration, spec.name)
    return tasks
