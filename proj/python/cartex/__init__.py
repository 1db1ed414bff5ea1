"""Cartoon-texture decomposition with a directional nonlocal wavelet prior."""

from ._cartex import (
    GraphParams,
    NumericalError,
    SolverParams,
    add_noise,
    analyze,
    decompose,
    laplacian_triplets,
    preset,
    psnr,
    random_mask,
    ssim,
    synthesize,
)

__all__ = [
    "GraphParams",
    "NumericalError",
    "SolverParams",
    "add_noise",
    "analyze",
    "decompose",
    "laplacian_triplets",
    "preset",
    "psnr",
    "random_mask",
    "ssim",
    "synthesize",
]
