""" bloheat: numerical experiments on bounded lower oscillation (BLO) functions through the heat semigroup.

User can use    'from bloheat import *'   to access the functions, functionals and the command line runner.
"""

from .Util import *
from .AnalyticFunction import *
from .GridCore import *
from .HeatSemigroup import *
from .Norms import *
from .MaximalWeights import *
from .LittlewoodPaley import *
from .PdeChecks import *

from .Config import *
from .Report import *
from .Acceptance import *
from .Cli import *
