"""Surface roughness prediction from polishing vibration spectra."""

from ._core import (
    ConfigError,
    Error,
    Model,
    areal_roughness,
    band_energy_series,
    default_band_set,
    extract_features,
    fit,
    gen_dataset,
    load_model,
    loocv,
    model_from_json,
    moments,
    run_cli,
    stft,
)

MODEL_KINDS = ("linear", "gp", "tree", "ridge", "forest", "svr", "gbr")

__all__ = [
    "ConfigError",
    "Error",
    "MODEL_KINDS",
    "Model",
    "areal_roughness",
    "band_energy_series",
    "default_band_set",
    "extract_features",
    "fit",
    "gen_dataset",
    "load_model",
    "loocv",
    "model_from_json",
    "moments",
    "run_cli",
    "stft",
]
