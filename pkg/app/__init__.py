"""
Wasserstein Rigidity Lab application package.
"""
