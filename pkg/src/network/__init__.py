"""
Network topologies, measurement settings and the generalized Bell basis.
"""
