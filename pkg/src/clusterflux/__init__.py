"""Acoustic multiple scattering by a penetrable host sphere and point scatterers.

A point source sits inside a penetrable, possibly lossy, sphere surrounded by
point-like scatterers in a lossless fluid. The package computes the series
solution of the host problem, the far-field patterns and cross sections of
every cluster member, the interaction intensities inside and outside the host,
and numerical checks of the energy identities and cross-section inequalities
that relate them.

Modules
-------
media
    Medium constants and their frequency-dependent derived quantities.
specfun
    Spherical Bessel and Hankel functions and Legendre polynomials.
quadrature
    Sphere, surface and volume quadrature rules.
fields
    Point-source fields, intensities and energy densities.
host_sphere
    Series solution of a point source and a penetrable sphere.
crosssec
    Far-field patterns, cross sections and ratio inequalities.
cluster
    Cluster assembly and attribution of fields to members.
theorems
    Two-pipeline verifications of the energy identities.
cli
    Command-line front end.
"""
from .cluster import (AttributedFields, ClusterModel, FoldyDivergenceError, HostSolveError,
                      assemble, foldy_strengths, monopole_coefficient_lossless,
                      random_cluster)
from .crosssec import (CrossSectionReport, FarFieldPattern, check_bounds,
                       cross_section_report, interaction_cs, point_source_pattern,
                       primary_interaction_cs_closed, removal_contribution, scs,
                       sum_patterns)
from .fields import PointScatterer, PointSource
from .host_sphere import HostSphere, NotConvergedError, solve_host
from .media import DerivedMedium, DomainError, Medium, derive
from .quadrature import default_sphere_grid, exact_sphere_grid, sphere_grid
from .theorems import (VerificationResult, bounds_suite, low_frequency_sweep,
                       verify_flux_limit, verify_host_surface, verify_oscs,
                       verify_pointlike_overall)

__version__ = "0.1.0"

__all__ = [
    "AttributedFields", "ClusterModel", "CrossSectionReport", "DerivedMedium", "DomainError",
    "FarFieldPattern", "FoldyDivergenceError", "HostSolveError", "HostSphere", "Medium",
    "NotConvergedError", "PointScatterer", "PointSource", "VerificationResult", "assemble",
    "bounds_suite", "check_bounds", "cross_section_report", "default_sphere_grid", "derive",
    "exact_sphere_grid", "foldy_strengths", "interaction_cs", "low_frequency_sweep",
    "monopole_coefficient_lossless", "point_source_pattern", "primary_interaction_cs_closed",
    "random_cluster", "removal_contribution", "scs", "solve_host", "sphere_grid", "sum_patterns",
    "verify_flux_limit", "verify_host_surface", "verify_oscs", "verify_pointlike_overall",
]
