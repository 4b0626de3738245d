"""
Test package for the Wasserstein Rigidity Lab.
"""
