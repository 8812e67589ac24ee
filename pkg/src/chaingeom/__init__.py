"""Contact gradings, their chain path geometries and the curvature transfer between them."""

__version__ = "0.1.0"

from .graded_lie import GradedAlgebra, AlgebraElement, build_algebra, bracket, trace_form  # noqa: E402

__all__ = ["GradedAlgebra", "AlgebraElement", "build_algebra", "bracket", "trace_form", "__version__"]
