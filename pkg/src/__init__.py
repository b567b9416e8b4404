"""
nlocal - closed-form and brute-force analysis of n-local chain and star networks.
"""

__version__ = "1.0.0"
