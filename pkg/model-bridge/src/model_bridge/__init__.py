"""Entailment-scoring microservice for the attribution evaluation toolkit."""

from .app import create_app
from .models import ModelLoadError, OverlapModel, load_model

__version__ = "0.1.0"

__all__ = ["create_app", "load_model", "ModelLoadError", "OverlapModel", "__version__"]
