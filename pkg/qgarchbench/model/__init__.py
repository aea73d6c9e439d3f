from .qgarch import (
    DEFAULT_SIM_BURN_IN,
    DEFAULT_TRUE_PARAMS,
    evaluate_log_posterior,
    log_posterior_array,
    omega_profile_posterior_mean,
    PARAM_NAMES,
    QgarchParams,
    QgarchPosterior,
    SeriesData,
    simulate,
    variance_recursion,
    VariancePath,
)
