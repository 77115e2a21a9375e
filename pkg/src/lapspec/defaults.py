"""Every threshold, trial count and acceptance window used by the suites.

Bump ``DEFAULTS_VERSION`` whenever a value here changes; it is folded into
each run's config hash so stale outputs are never mistaken for fresh ones.
"""

DEFAULTS_VERSION = 1

ALPHA = 0.01
# below this many samples a KS or count test is reported as inconclusive
MIN_TEST_SAMPLES = 20

# O(n^3) reduction stage used by the Monte Carlo experiments
REDUCTION_BACKEND = "lapack"

# ExperimentConfig defaults
DEFAULT_K = 3
DEFAULT_DELTA = 0.1
DEFAULT_SEED = 20240601

# limit-law oracle comparisons
LIMIT_N = 1000
LIMIT_TRIALS = 500
CENTERING_SWAP_SHIFT = 1.0
CENTERING_SWAP_TOL = 0.15
GAP_MEAN_WINDOW = (0.7, 1.4)

# Poisson point process
POISSON_N = 1000
POISSON_TRIALS = 2000
POISSON_LEVELS = (0.0, 1.0, 2.0)
POISSON_MEAN_RTOL = 0.15
# enough Gaussian order statistics that counts above level 0 are never capped
POISSON_ORACLE_K = 40
DISPERSION_WINDOW = (0.9, 1.1)
DISPERSION_WINDOW_MIN_TRIALS = 10_000

# diagonal maximum of the true Laplacian
DIAG_RECON_N = 50
DIAG_RECON_DRAWS = 10_000

# eigenvalue location
LOCATION_N = 2000
LOCATION_TRIALS = 300
LOCATION_SHIFT_RTOL = 0.15

# local law and concentration
LOCALLAW_SIZES = (500, 1000, 2000)
LOCALLAW_DELTAS = (0.05, 0.1, 0.2)
LOCALLAW_REPETITIONS = 10
LOCALLAW_MIN_DECREASING = 8
LOCALLAW_RESAMPLES = 20
LOCALLAW_GRID = 64

# reduction chain
REDUCTION_N = 1000
REDUCTION_TRIALS = 200
REDUCTION_K = 3
REDUCTION_FRACTION_II = 0.99
REDUCTION_FRACTION_III = 0.90
REDUCTION_IDENTITY_TRIALS = 5
REDUCTION_IDENTITY_TOL = 1e-10

# bulk density
FC_N = 2000
FC_TRIALS = 50
FC_BIN_WIDTH = 0.1
FC_WINDOW = (-3.0, 3.0)
FC_SUP_TOL = 0.02
FC_MASS_TOL = 1e-3

# diagonal count
DIAGCOUNT_N = 100_000
DIAGCOUNT_DELTA = 0.5
DIAGCOUNT_SEEDS = 100

# deterministic algebra / analytic layer
ALGEBRA_N = 200
ANALYTIC_POINTS = 200
FIXED_POINT_TOL = 1e-12
DENSITY_MASS_TOL = 1e-4
INVERSION_ETA = 1e-3
INVERSION_TOL = 2e-3

# quick profile: same sizes and thresholds, far fewer trials
QUICK = {
    "limit_trials": 80,
    "poisson_trials": 300,
    "location_trials": 30,
    "locallaw_repetitions": 3,
    "locallaw_resamples": 6,
    "reduction_trials": 30,
    "diagcount_seeds": 100,
}
