"""Semi-copulas, bivariate ageing functions and generalized Kendall distributions."""

__version__ = "0.1.0"
