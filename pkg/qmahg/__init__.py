"""
qmahg package: quaternionic pluripotential calculus on the Heisenberg group.

This package organizes the computational engine, the verification services,
and the command-line handlers.
"""
