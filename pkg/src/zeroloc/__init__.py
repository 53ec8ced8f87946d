"""Numerical laboratory for discrete Cauchy transforms and the zeros of their entire multiples."""
from .kernel import (BoundedValue, PrecisionContext, DEFAULT_CONTEXT, compensated_sum,
                     make_context)

__version__ = "0.1.0"

__all__ = ["BoundedValue", "PrecisionContext", "DEFAULT_CONTEXT", "compensated_sum",
           "make_context", "__version__"]
