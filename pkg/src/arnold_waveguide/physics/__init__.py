"""
Numerical kernels: basis and matrix elements, the resonance block, its spectrum,
the Floquet evolution and the classical billiard.
"""
