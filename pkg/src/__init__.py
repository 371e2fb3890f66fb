"""
Entropic CLT Lab
Symmetric KL convergence of standardized sums to the Gaussian, checked numerically
"""
__version__ = "1.0.0"
