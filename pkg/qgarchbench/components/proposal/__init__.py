from .student_t import (
    DEFAULT_NU,
    fit_from_accumulator,
    fit_proposal,
    ProposalSpec,
    sample_student_t,
    spec_from_moments,
    student_t_log_density,
)
