# All numerical comparison thresholds live here.

# |alpha_i * beta1 - alpha_j * beta2| relative to max(alpha_i * beta1, alpha_j * beta2)
RATIO_RTOL = 1e-12

# row sums of stochastic matrices
STOCHASTIC_ATOL = 1e-12

# ||w B - w||_inf for single rate matrices and local matrices
EIGEN_ATOL = 1e-12

# ||w P_C^k - w||_inf when searching for the w-order of a cycle
HOLONOMY_ATOL = 1e-10

# entries of the pi0 / complement coupling blocks of a cycle matrix
COUPLING_ATOL = 1e-15

# weight vectors within this distance of sum 1 are renormalized, others rejected
RENORMALIZE_ATOL = 1e-6

# per-step drift of the per-cell conserved sums
CONSERVATION_ATOL = 1e-10

# default consensus tolerance for simulations
SIM_TOL = 1e-8

DEFAULT_CYCLE_CAP = 10**6
DEFAULT_ORDER_CAP = 10**6
DEFAULT_MAX_STEPS = 10**6
DEFAULT_THETA = 0.5
