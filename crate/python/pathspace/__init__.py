from ._pathspace import *  # noqa: F401,F403
from ._pathspace import __doc__  # noqa: F401
