"""Gibbs-posterior information criteria for random-feature regression.

Subpackages cover synthetic data generation, the random-feature model,
the closed-form Gaussian posterior and its KL terms, Langevin samplers
(SGLD / MALA), Marchenko-Pastur asymptotics, the criteria themselves,
and a seeded sweep harness with CSV/SVG output.
"""

__version__ = "0.1.0"
