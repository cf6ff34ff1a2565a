"""Best separable approximation of multipartite density matrices."""

__version__ = "0.1.0"
