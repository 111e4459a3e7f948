"""Computational kernels: algebra, polynomials, operators, lines, quadrature."""
