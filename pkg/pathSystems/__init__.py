"""
Path spaces, additive forms and the product systems they generate
"""

from .cocycles import LogChart, gamma_pipeline, trivialize_gamma, trivialize_multiplier
from .declog import CoherentSection, DecompVector, B_limit, le_branch, reference_section
from .errors import (BranchError, ConfigError, FormError, GridError, ObstacleError,
                     PathSystemError, ResidualError)
from .fock import ExpSpanVector, TruncFockVector
from .forms import GammaKernelForm, GaussianForm, InnerForm, PoissonForm, ZeroForm
from .pathspace import Partition, PathSection, StepPath, TimeGrid, concat_box
from .product import ProductVector, standard_iso

__all__ = [
    'TimeGrid', 'StepPath', 'Partition', 'PathSection', 'concat_box',
    'InnerForm', 'GaussianForm', 'PoissonForm', 'GammaKernelForm', 'ZeroForm',
    'LogChart', 'gamma_pipeline', 'trivialize_gamma', 'trivialize_multiplier',
    'ExpSpanVector', 'TruncFockVector', 'ProductVector', 'standard_iso',
    'DecompVector', 'CoherentSection', 'reference_section', 'le_branch', 'B_limit',
    'PathSystemError', 'GridError', 'FormError', 'ResidualError', 'BranchError',
    'ObstacleError', 'ConfigError',
]
__version__ = '1.0.0'
