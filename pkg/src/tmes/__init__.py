"""Time-lagged marginal expected shortfall: estimators, bootstrap, simulators, oracles."""
__version__ = "0.1.0"

from .core import *  # noqa: E402,F401,F403
from .bootstrap import *  # noqa: E402,F401,F403
from .models import *  # noqa: E402,F401,F403
from .oracles import *  # noqa: E402,F401,F403
from .rolling import *  # noqa: E402,F401,F403
