from lidardiff.denoiser.bias import (
    AngleGrid,
    fourier_bias,
    identity_bias,
    make_bias,
    spherical_harmonics_bias,
)
from lidardiff.denoiser.checkpoint import load_checkpoint, save_checkpoint
from lidardiff.denoiser.oracle import GaussianOracle, oracle_gaussian_denoiser
from lidardiff.denoiser.training import TrainConfig, TrainResult, train, validation_loss
from lidardiff.denoiser.unet import DenoiserConfig, UNet, count_parameters, unet_predict

__all__ = [
    "AngleGrid",
    "DenoiserConfig",
    "GaussianOracle",
    "TrainConfig",
    "TrainResult",
    "UNet",
    "count_parameters",
    "fourier_bias",
    "identity_bias",
    "load_checkpoint",
    "make_bias",
    "oracle_gaussian_denoiser",
    "save_checkpoint",
    "spherical_harmonics_bias",
    "train",
    "unet_predict",
    "validation_loss",
]
