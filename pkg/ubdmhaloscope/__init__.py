__version__ = "0.1.0"

from .simulation import HaloscopeSimulation
from .halo import VelocityDistribution
from .coherence import FieldState
