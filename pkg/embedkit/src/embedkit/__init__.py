"""Batch embedding export and HTTP serving for pretrained text encoders."""

from .errors import EmbedkitError, ModelLoadError, ParseError
from .export import ExportJob, export, read_documents
from .models import Encoder, HashingEncoder, load_encoder
from .preprocess import TextPreprocessor
from .server import create_app, serve_embed

__version__ = "0.1.0"

__all__ = [
    "EmbedkitError",
    "Encoder",
    "ExportJob",
    "HashingEncoder",
    "ModelLoadError",
    "ParseError",
    "TextPreprocessor",
    "create_app",
    "export",
    "load_encoder",
    "read_documents",
    "serve_embed",
]
