"""
Two-qubit source states and the state family factory.
"""
