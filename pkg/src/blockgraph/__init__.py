"""Latent graphical block model pipeline: simulate code corpora, count
co-occurrences, build SPPMI, cluster codes and estimate sparse precision
matrices."""

__version__ = "0.1.0"

from .partition import Partition  # noqa: E402

__all__ = ["Partition", "__version__"]
