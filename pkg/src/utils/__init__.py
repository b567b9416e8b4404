"""
Errors, network files and report export for the n-local analysis package.
"""
