from .base import Backend, UnsupportedArtifactError
from .stub import StubBackend


def create_backend(name: str, **kwargs) -> Backend:
    if name == "stub":
        return StubBackend()
    if name == "torchvision":
        from .torchvision_models import TorchvisionBackend

        return TorchvisionBackend(**kwargs)
    raise ValueError(f"unknown backend {name!r} (choose 'stub' or 'torchvision')")


__all__ = ["Backend", "StubBackend", "UnsupportedArtifactError", "create_backend"]
