"""Model parameters for the catalytic lattice system."""

from dataclasses import dataclass

from .errors import DomainError

MAX_DIMENSION = 5


def check_dimension(d):
    if not isinstance(d, (int,)) or d < 1:
        raise DomainError(f"lattice dimension must be a positive integer, got {d!r}")
    if d > MAX_DIMENSION:
        raise DomainError(f"lattice dimension {d} not supported (max {MAX_DIMENSION})")
    return d


@dataclass(frozen=True)
class ModelParams:
    """The tuple (d, p, kappa, gamma, rho, nu) that parameterizes everything.

    d      lattice dimension
    p      moment order (>= 1)
    kappa  diffusion constant of the reactant walks (>= 0)
    gamma  coupling strength of the catalyst (> 0)
    rho    diffusion constant of the catalyst walkers (> 0)
    nu     intensity of the catalyst Poisson field (> 0)
    """

    d: int
    p: int = 1
    kappa: float = 1.0
    gamma: float = 1.0
    rho: float = 1.0
    nu: float = 1.0

    def __post_init__(self):
        check_dimension(self.d)
        if self.p < 1 or int(self.p) != self.p:
            raise DomainError(f"moment order p must be a positive integer, got {self.p!r}")
        if self.kappa < 0:
            raise DomainError(f"kappa must be >= 0, got {self.kappa}")
        for name in ("gamma", "rho", "nu"):
            v = getattr(self, name)
            if not v > 0:
                raise DomainError(f"{name} must be > 0, got {v}")

    @property
    def ratio(self):
        """The driving ratio p*gamma/rho."""
        return self.p * self.gamma / self.rho
