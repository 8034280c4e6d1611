"""seisreg: predict a lithological property (sand fraction) from seismic
attributes with an information-filtering pre-processing stage, a scaled
conjugate gradient MLP, and 3-D median post-filtering."""

__version__ = "0.1.0"

from .errors import ConfigError, DataError, DivergenceError, SeisregError

__all__ = ["ConfigError", "DataError", "DivergenceError", "SeisregError",
           "__version__"]
