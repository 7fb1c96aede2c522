"""Adapters that run pretrained models and emit vpp interchange artifacts."""

from .backends import Backend, StubBackend, UnsupportedArtifactError, create_backend
from .export import export_artifacts, list_frames
from .manifest import AdapterManifest, load_manifests, write_manifests

__version__ = "0.1.0"

__all__ = [
    "AdapterManifest",
    "Backend",
    "StubBackend",
    "UnsupportedArtifactError",
    "__version__",
    "create_backend",
    "export_artifacts",
    "list_frames",
    "load_manifests",
    "write_manifests",
]
