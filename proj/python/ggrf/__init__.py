from ._ggrf import *  # noqa: F401,F403
from ._ggrf import __version__  # noqa: F401
