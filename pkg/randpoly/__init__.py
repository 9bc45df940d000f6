"""Random symmetric polytopes: oracles, functionals, covering numbers and isotropic constants."""

__version__ = "0.1.0"
