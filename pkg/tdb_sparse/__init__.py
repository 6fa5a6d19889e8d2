"""Sparse time-dependent-basis reduced-order modeling.

Evolves a rank-r DBO approximation U Σ Yᵀ of a sampled stochastic PDE with:
- Decompressed (full right-hand side) and sparse CUR/DEIM right-hand sides
- Rank-adaptive interpolation with a hysteresis buffer
- Burgers, linear diffusion and compressible Navier-Stokes test models
- A full-order Monte Carlo reference solver
"""

__version__ = "1.0.0"
