"""Discretized physics models with full, column and row access paths."""

from tdb_sparse.physics.base import Model, ModelError, column_chunks
from tdb_sparse.physics.burgers import (
    BurgersModel,
    burgers_grid,
    burgers_initial_ensemble,
    burgers_stable_dt,
    initial_profile,
    kl_modes,
)
from tdb_sparse.physics.diffusion import DiffusionModel, diffusion_stable_dt
from tdb_sparse.physics.ns2d import NS2DModel, ns2d_initial_and_perturb, ns2d_stable_dt

__all__ = [
    "BurgersModel",
    "DiffusionModel",
    "Model",
    "ModelError",
    "NS2DModel",
    "burgers_grid",
    "burgers_initial_ensemble",
    "burgers_stable_dt",
    "column_chunks",
    "diffusion_stable_dt",
    "initial_profile",
    "kl_modes",
    "ns2d_initial_and_perturb",
    "ns2d_stable_dt",
]
