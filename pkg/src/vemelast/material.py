"""Isotropic material data for the plane-strain elasticity operator."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Material:
    """Lame coefficients and density of an isotropic material.

    lambda_s >= 0 and mu_s > 0 define the stress law
    sigma(u) = 2 mu_s eps(u) + lambda_s tr(eps(u)) I; rho > 0 is the
    mass density weighting the inertia form.
    """
    lambda_s: float
    mu_s: float
    rho: float = 1.0

    def __post_init__(self):
        if not self.mu_s > 0:
            raise ValueError("mu_s must be positive")
        if self.lambda_s < 0:
            raise ValueError("lambda_s must be nonnegative")
        if not self.rho > 0:
            raise ValueError("rho must be positive")


def lame_from_young_poisson(young, poisson):
    """Lame coefficients (mu_s, lambda_s) from Young's modulus and Poisson ratio.

    mu_s = E / (2 (1 + nu)) and lambda_s = E nu / ((1 + nu)(1 - 2 nu)).
    The second coefficient blows up as nu -> 1/2, so the incompressible
    limit nu >= 0.5 is rejected.
    """
    if not young > 0:
        raise ValueError("Young's modulus must be positive")
    if not 0.0 <= poisson < 0.5:
        raise ValueError("Poisson ratio must lie in [0, 0.5)")
    mu_s = young / (2.0 * (1.0 + poisson))
    lambda_s = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson))
    return mu_s, lambda_s


def material_from_young_poisson(young, poisson, rho=1.0):
    """Material built from (Young modulus, Poisson ratio, density)."""
    mu_s, lambda_s = lame_from_young_poisson(young, poisson)
    return Material(lambda_s=lambda_s, mu_s=mu_s, rho=rho)
