"""Ground states of N-orbital mass-critical fermionic NLS systems in a periodic box."""

from ._fnls import *  # noqa: F401,F403
from ._fnls import __doc__  # noqa: F401

__version__ = "0.1.0"
