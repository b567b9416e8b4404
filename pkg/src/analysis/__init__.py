"""
Closed-form maxima and the brute-force oracle.
"""
