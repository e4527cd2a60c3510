"""Deterministic generators for test bodies, measures, and densities.

Every generator is a pure function of its seed (via numpy Generator), so
suite runs and CLI outputs are reproducible.  The named families back the
command-line `generate` subcommand; the random generators feed the
randomized verifier sweeps.
"""

from __future__ import annotations

import numpy as np

from .errors import UnboundedBodyError
from .gaussian import lp_gauss_surface_polygon, scale_to_gauss_volume
from .geometry import (
    TWO_PI,
    DiscreteMeasure,
    SupportPolygon,
    box_polygon,
    wulff_shape,
)

FAMILY_NAMES = ("uniform-mgon", "square-measure", "cos-density",
                "random-even", "hemisphere-bad")


def random_polygon(rng: np.random.Generator, min_edges: int = 4,
                   max_edges: int = 24) -> SupportPolygon:
    """Bounded polygon with unit normals drawn on the circle, h in [0.6, 1.8]."""
    for _ in range(80):
        m = int(rng.integers(min_edges, max_edges + 1))
        theta = rng.uniform(0.0, TWO_PI, m)
        normals = np.column_stack([np.cos(theta), np.sin(theta)])
        support = rng.uniform(0.6, 1.8, m)
        try:
            return wulff_shape(normals, support)
        except UnboundedBodyError:
            continue
    raise RuntimeError("random polygon generation kept hitting halfplane draws")


def random_even_polygon(rng: np.random.Generator, min_pairs: int = 2,
                        max_pairs: int = 12) -> SupportPolygon:
    """Origin-symmetric polygon: antipodal normal pairs share their support."""
    k = int(rng.integers(min_pairs, max_pairs + 1))
    theta = rng.uniform(0.0, np.pi, k)
    normals = np.column_stack([np.cos(theta), np.sin(theta)])
    support = rng.uniform(0.6, 1.8, k)
    return wulff_shape(np.vstack([normals, -normals]),
                       np.concatenate([support, support]))


def elongated_hexagon(cap: float, width: float = 1.0,
                      slope: float = 0.2) -> SupportPolygon:
    """Origin-symmetric hexagon stretching toward the strip |x| <= width.

    Two vertical edges at distance `width` plus four slanted caps meeting
    the axis near `cap`; growing `cap` lets the hexagon approach the strip.
    """
    if cap <= 0.0 or width <= 0.0:
        raise ValueError("cap and width must be positive")
    c, s = np.cos(slope), np.sin(slope)
    normals = np.array([
        [1.0, 0.0], [-1.0, 0.0],
        [c, s], [-c, s], [c, -s], [-c, -s],
    ])
    support = np.array([width, width,
                        width * c + cap * s, width * c + cap * s,
                        width * c + cap * s, width * c + cap * s])
    return wulff_shape(normals, support)


def random_even_measure(rng: np.random.Generator, min_pairs: int = 2,
                        max_pairs: int = 10) -> DiscreteMeasure:
    k = int(rng.integers(min_pairs, max_pairs + 1))
    theta = rng.uniform(0.0, np.pi, k)
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    masses = rng.uniform(0.02, 0.2, k)
    return DiscreteMeasure(2, np.vstack([dirs, -dirs]),
                           np.concatenate([masses, masses]))


def random_spanning_measure(rng: np.random.Generator, min_atoms: int = 4,
                            max_atoms: int = 16) -> DiscreteMeasure:
    """Measure whose support spans the circle (hemisphere condition holds)."""
    for _ in range(80):
        k = int(rng.integers(min_atoms, max_atoms + 1))
        theta = rng.uniform(0.0, TWO_PI, k)
        dirs = np.column_stack([np.cos(theta), np.sin(theta)])
        masses = rng.uniform(0.02, 0.3, k)
        try:
            wulff_shape(dirs, np.ones(k))
        except UnboundedBodyError:
            continue
        return DiscreteMeasure(2, dirs, masses)
    raise RuntimeError("random measure generation kept hitting halfplane draws")


def uniform_mgon_measure(m: int, total: float) -> DiscreteMeasure:
    """Equal masses on the m-th roots of unity."""
    if m < 3:
        raise ValueError("need at least three directions")
    if total <= 0.0:
        raise ValueError("total mass must be positive")
    theta = TWO_PI * np.arange(m) / m
    return DiscreteMeasure(2, np.column_stack([np.cos(theta), np.sin(theta)]),
                           np.full(m, total / m))


def square_surface_measure(p: float = 1.0) -> DiscreteMeasure:
    """Surface area measure of the half-Gaussian-volume axis-aligned square."""
    square = scale_to_gauss_volume(box_polygon(1.0))
    return lp_gauss_surface_polygon(square, p).as_discrete()


def cos_density(resolution: int, level: float = 0.045,
                amplitude: float = 0.2, frequency: int = 2) -> np.ndarray:
    """Even trigonometric density level * (1 + amplitude cos(frequency theta))."""
    if not -1.0 < amplitude < 1.0:
        raise ValueError("amplitude must keep the density positive")
    if frequency < 1:
        raise ValueError("frequency must be a positive integer")
    theta = TWO_PI * np.arange(resolution) / resolution
    return level * (1.0 + amplitude * np.cos(frequency * theta))


def hemisphere_bad_measure(k: int = 5, seed: int = 0) -> DiscreteMeasure:
    """Atoms squeezed into an open halfplane; fails the hemisphere condition."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-1.2, 1.2, k)
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    return DiscreteMeasure(2, dirs, rng.uniform(0.05, 0.3, k))


def build_family(name: str, seed: int = 0, resolution: int = 256,
                 m: int = 8, total: float = 0.3, level: float = 0.045,
                 amplitude: float = 0.2, frequency: int = 2):
    """Named deterministic inputs for the CLI generate subcommand."""
    if name == "uniform-mgon":
        return uniform_mgon_measure(m, total)
    if name == "square-measure":
        return square_surface_measure()
    if name == "cos-density":
        return cos_density(resolution, level, amplitude, frequency)
    if name == "random-even":
        return random_even_measure(np.random.default_rng(seed))
    if name == "hemisphere-bad":
        return hemisphere_bad_measure(seed=seed)
    raise ValueError(f"unknown family {name!r}; choose from {FAMILY_NAMES}")
