# User configurable defaults
# These values can be changed through `toric-bayes set`
USER_DEFAULTS = {
    'xi': 0.1,            # chance that a free cell has zero probability
    'alpha': 1.0,         # shared Dirichlet hyperparameter
    'model_prior': 0.5,   # prior probability of the QI model
    'calibration_alphas': [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0],
}

# Capacity budgets, overridable through TORIC_BAYES_BUDGET
BUDGET_DEFAULTS = {
    'hilbert_max_generators': 512,
    'hilbert_max_degree': 64,        # completion levels (total degree of candidates)
    'hilbert_max_frontier': 200000,  # candidates alive at one level
    'hilbert_max_ray_supports': 200000,  # cell subsets searched for extreme rays
    'enumeration_max_generators': 24,
    'circuit_search_max_cells': 14,
}

BUDGET_ENV_VAR = 'TORIC_BAYES_BUDGET'
HOME_ENV_VAR = 'TORIC_BAYES_HOME'

# Model names used for instance labels
QI_MODEL = 'QI'
SZ_MODEL = 'SZ'

# Evidence against QI on the Jeffreys scale, upper bounds of log10 BF(SZ:QI)
EVIDENCE_THRESHOLDS = {
    'poor': 0.5,
    'substantial': 1.0,
    'strong': 2.0,
}

# Default xi grid for the prior weight table
TABLE1_XI_GRID = [0.1, 0.2, 0.3, 0.4, 0.5]

# Verification bound for verify_hilbert in the pipeline
HILBERT_VERIFY_BOUND = 4

# Process exit codes
EXIT_CODES = {
    'ok': 0,
    'unexpected': 1,
    'parse': 2,
    'capacity': 3,
    'inconsistent': 4,
    'numeric': 5,
}

# JSON output
JSON_INDENT = 2
