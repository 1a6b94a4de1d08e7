"""Finite discrete probability distributions and information measures.

Everything downstream (beliefs, utilities, divergence analyses) works with
distributions on small finite supports. Masses are kept in linear space;
log-space arithmetic is confined to posterior updates in the belief module.
All information quantities are in nats.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

# Normalization slack allowed after any constructor or update.
MASS_TOL = 1e-12


class InvalidDistributionError(ValueError):
    """Raised when a weight vector cannot be normalized into a distribution."""


class SupportMismatchError(ValueError):
    """Raised when an operation requires two distributions on one support."""


class DiscreteDist:
    """A probability distribution on a finite, ordered support.

    Atoms may be real numbers, tuples of reals (multi-dimensional grid
    points), or strings (model identifiers). Zero-mass atoms are kept in
    the support so that distributions over the same grid stay aligned.
    Instances are immutable; updates construct new values.

    Parameters
    ----------
    support : sequence
        Ordered atoms, non-empty and free of duplicates.
    masses : array_like
        Per-atom probabilities; non-negative, summing to 1 within 1e-12.
    """

    __slots__ = ("support", "masses", "_index")

    def __init__(self, support, masses):
        support = tuple(support)
        masses = np.array(masses, dtype=float)
        if len(support) == 0:
            raise InvalidDistributionError("support must be non-empty")
        if masses.shape != (len(support),):
            raise InvalidDistributionError(
                f"{len(support)} atoms but mass vector of shape {masses.shape}"
            )
        index = {atom: i for i, atom in enumerate(support)}
        if len(index) != len(support):
            raise InvalidDistributionError("support contains duplicate atoms")
        if np.any(masses < 0) or not np.all(np.isfinite(masses)):
            raise InvalidDistributionError("masses must be finite and non-negative")
        total = float(masses.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise InvalidDistributionError(
                f"masses sum to {total!r}, expected 1 within {MASS_TOL}"
            )
        masses.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "_index", index)

    def __setattr__(self, name, value):
        raise AttributeError("DiscreteDist is immutable")

    def __len__(self):
        return len(self.support)

    def __repr__(self):
        if len(self) <= 4:
            pairs = ", ".join(f"{a!r}: {m:.4g}" for a, m in zip(self.support, self.masses))
            return f"DiscreteDist({pairs})"
        return f"DiscreteDist(<{len(self)} atoms>)"

    def index_of(self, atom) -> int:
        """Position of `atom` in the support; KeyError if absent."""
        try:
            return self._index[atom]
        except KeyError:
            raise KeyError(f"atom {atom!r} not in support") from None

    def prob(self, atom) -> float:
        """Probability mass assigned to `atom`."""
        return float(self.masses[self.index_of(atom)])

    def with_masses(self, masses) -> "DiscreteDist":
        """A new distribution on the same support with different masses.

        Shares the support and its index with the parent, so the per-atom
        duplicate scan is skipped; the mass invariants are still enforced.
        """
        masses = np.array(masses, dtype=float)
        if masses.shape != (len(self.support),):
            raise InvalidDistributionError(
                f"{len(self.support)} atoms but mass vector of shape {masses.shape}")
        if np.any(masses < 0) or not np.all(np.isfinite(masses)):
            raise InvalidDistributionError("masses must be finite and non-negative")
        total = float(masses.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise InvalidDistributionError(
                f"masses sum to {total!r}, expected 1 within {MASS_TOL}")
        masses.setflags(write=False)
        new = object.__new__(DiscreteDist)
        object.__setattr__(new, "support", self.support)
        object.__setattr__(new, "masses", masses)
        object.__setattr__(new, "_index", self._index)
        return new

    def sample(self, rng: np.random.Generator):
        """Draw one atom according to the masses."""
        i = int(rng.choice(len(self.support), p=self.masses))
        return self.support[i]


def normalize(support, weights) -> DiscreteDist:
    """Build a distribution with masses proportional to `weights`.

    Parameters
    ----------
    support : sequence
        Ordered atoms.
    weights : array_like
        Non-negative weights, at least one strictly positive.

    Returns
    -------
    DiscreteDist
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or weights.shape[0] != len(tuple(support)):
        raise InvalidDistributionError("one weight per atom required")
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise InvalidDistributionError("weights must be finite and non-negative")
    total = weights.sum()
    if total <= 0:
        raise InvalidDistributionError("weights must not be all zero")
    return DiscreteDist(support, weights / total)


def uniform(support) -> DiscreteDist:
    """The uniform distribution on `support`."""
    n = len(tuple(support))
    return normalize(support, np.ones(n))


def point_mass(support, atom) -> DiscreteDist:
    """The distribution degenerate at `atom` within `support`."""
    support = tuple(support)
    masses = np.zeros(len(support))
    masses[support.index(atom)] = 1.0
    return DiscreteDist(support, masses)


def entropy(d: DiscreteDist) -> float:
    """Shannon entropy -sum p ln p in nats, with 0 ln 0 taken as 0."""
    p = d.masses[d.masses > 0]
    return float(-np.sum(p * np.log(p)))


def _require_same_support(p: DiscreteDist, q: DiscreteDist):
    if p.support != q.support:
        raise SupportMismatchError("distributions live on different supports")


def kl_divergence(p: DiscreteDist, q: DiscreteDist) -> float:
    """Kullback-Leibler divergence sum p ln(p/q) in nats.

    Returns `math.inf` when p puts mass where q has none; terms with
    p(a) = 0 are dropped exactly.
    """
    _require_same_support(p, q)
    mask = p.masses > 0
    pm = p.masses[mask]
    qm = q.masses[mask]
    if np.any(qm == 0):
        return math.inf
    return float(np.sum(pm * np.log(pm / qm)))


def cross_entropy(p: DiscreteDist, q: DiscreteDist) -> float:
    """Cross entropy -sum p ln q in nats; inf when p charges a q-null atom."""
    _require_same_support(p, q)
    mask = p.masses > 0
    pm = p.masses[mask]
    qm = q.masses[mask]
    if np.any(qm == 0):
        return math.inf
    return float(-np.sum(pm * np.log(qm)))


def discretize_normal(mu: float, sigma: float, grid) -> DiscreteDist:
    """Normal density evaluated at grid points and renormalized.

    The grid must be non-empty and strictly increasing. Mass at each point
    is proportional to the density there (no cell integration).
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    grid = tuple(float(g) for g in grid)
    if len(grid) == 0:
        raise ValueError("grid must be non-empty")
    arr = np.asarray(grid)
    if len(grid) > 1 and np.any(np.diff(arr) <= 0):
        raise ValueError("grid must be strictly increasing")
    # exp of the shifted log-density keeps far-out grids from underflowing
    # to an all-zero weight vector
    z = -0.5 * ((arr - mu) / sigma) ** 2
    return normalize(grid, np.exp(z - z.max()))


def midpoint_grid(n_cells: int) -> tuple:
    """Cell midpoints (k + 0.5)/n for k = 0..n-1 on the unit interval."""
    if n_cells < 2:
        raise ValueError(f"need at least 2 cells, got {n_cells}")
    return tuple((k + 0.5) / n_cells for k in range(n_cells))


def discretize_beta(alpha: float, beta: float, n_cells: int) -> DiscreteDist:
    """Beta density at unit-interval cell midpoints, renormalized.

    Support is the midpoints (k + 0.5)/n_cells for k = 0..n_cells-1, which
    keeps the density finite even for shape parameters below 1.
    """
    if alpha <= 0 or beta <= 0:
        raise ValueError(f"shape parameters must be positive, got ({alpha}, {beta})")
    grid = midpoint_grid(n_cells)
    dens = stats.beta.pdf(np.asarray(grid), alpha, beta)
    return normalize(grid, dens)


def product_dist(first: DiscreteDist, second: DiscreteDist) -> DiscreteDist:
    """Independent product on paired atoms, ordered row-major by `first`."""
    support = [(a, b) for a in first.support for b in second.support]
    masses = np.outer(first.masses, second.masses).ravel()
    return DiscreteDist(support, masses)
