"""Time-domain mean-variance optimal trading strategies."""

from .errors import (DegenerateConstraintError, IllConditionedError, LayerMismatchError,
                     SizeError, TdmvError, ValidationError)
from .model import AutoCovMatrix, Kind, Layer, ProcessSpec, Provenance, SamplePath, Strategy

__version__ = "0.1.0"
