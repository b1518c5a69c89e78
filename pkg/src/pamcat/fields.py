"""Finite-box lattice fields and flat indexing helpers.

A field lives on the centered box [-radius, radius]^d.  Values are stored in
a dense ndarray of shape (2*radius+1,)*d; the site x maps to the array index
tuple x + radius.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def box_sites(d, radius):
    """All sites of the box as an (n_sites, d) int array, in flat-index order."""
    axes = [np.arange(-radius, radius + 1)] * d
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def flat_index(x, radius, d):
    """Row-major flat index of site(s) x in the box array."""
    x = np.asarray(x)
    side = 2 * radius + 1
    idx = np.zeros(x.shape[:-1], dtype=np.int64)
    for i in range(d):
        idx = idx * side + (x[..., i] + radius)
    return idx


@dataclass
class LatticeField:
    d: int
    radius: int
    values: np.ndarray

    def __post_init__(self):
        side = 2 * self.radius + 1
        expected = (side,) * self.d
        if self.values.shape != expected:
            raise DomainError(
                f"field array has shape {self.values.shape}, expected {expected}"
            )

    @classmethod
    def zeros(cls, d, radius):
        side = 2 * radius + 1
        return cls(d, radius, np.zeros((side,) * d))

    def at(self, x):
        """Value at lattice site x (0 outside the box)."""
        x = tuple(int(c) for c in x)
        if len(x) != self.d:
            raise DomainError(f"site {x} has wrong dimension for d={self.d}")
        if any(abs(c) > self.radius for c in x):
            return 0.0
        return float(self.values[tuple(c + self.radius for c in x)])

    @property
    def origin(self):
        return float(self.values[(self.radius,) * self.d])

    def l2_norm(self):
        return float(np.sqrt(np.sum(self.values**2)))

    def dirichlet_energy(self):
        """(1/2) * sum over ordered nearest-neighbor pairs of [f(x)-f(y)]^2.

        The field is extended by zero outside the box, so bonds crossing the
        boundary contribute f(boundary site)^2.
        """
        v = self.values
        total = 0.0
        for axis in range(self.d):
            total += float(np.sum(np.diff(v, axis=axis) ** 2))
            total += float(np.sum(np.take(v, 0, axis=axis) ** 2))
            total += float(np.sum(np.take(v, -1, axis=axis) ** 2))
        return total
