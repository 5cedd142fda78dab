"""
crel - Bayesian posterior inference with Cressie-Read empirical likelihoods
built on M-estimating equations.
"""

__version__ = "1.0.0"
