from ._core import *  # noqa: F401,F403
from ._core import __version__, Error, ValidationError, DomainError, NumericalError, UnreliableResult  # noqa: F401
