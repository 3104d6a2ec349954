"""
Numerical kernels used to fit calibrators: L-BFGS, golden-section search
and pool-adjacent-violators.
"""
