"""
Test package for the n-local analysis package.
"""
