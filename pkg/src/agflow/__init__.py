"""Penalised-PCA solution paths via the implicit regularisation of
(stochastic) gradient descent, with validation-based model selection."""

from .baselines import Loadings, oja_pca, power_iteration, svd_pca
from .dataio import (DataMatrix, RawDataset, SplitSpec, SyntheticSpec, apply_centering, center,
                     generate_classes, generate_synthetic, load_csv, split)
from .flow import (AgFlowConfig, LoadingPath, agflow_component_path, agflow_path, calibrate,
                   deflate, subspace_targets)
from .linalg import spectral_phi, sym_eig, thin_svd
from .paths import ProjectionPath, read_path, write_path
from .quasips import QuasiPsConfig, SubspaceTarget, mean_squared_row_norm, quasi_ps
from .ridgepath import (default_grid, gradient_flow_estimate, ridge_estimate, ridge_pca_path,
                        risk_ratio_experiment)
from .selection import SelectionResult, accuracy, select_model

__version__ = "0.1.0"
