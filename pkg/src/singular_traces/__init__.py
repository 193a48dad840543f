"""
Singular Traces - a numerical laboratory for modular traces of singular moduli,
regularized twisted L-functions and their radial-limit identity.
"""

__version__ = "0.1.0"
__author__ = "Devender Mishra"
