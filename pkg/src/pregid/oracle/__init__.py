from .numeric import (
    OracleTrial,
    gram_schmidt_alphas,
    implied_covariance,
    oracle_trial,
    partial_regression,
    random_parameterization,
    standardize,
)
