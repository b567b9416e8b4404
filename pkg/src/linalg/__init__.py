"""
Dense matrix kernel: Kronecker products, qubit permutations, small eigensolvers.
"""
