from .base import Problem, with_fd_second_order
from .hyperclean import HyperCleanProblem, detection_f1, make_hyperclean, train_classifier
from .quadratic import make_quadratic, make_random_quadratic
from .registry import make_problem, problem_has_second_order
from .toy import make_toy

__all__ = [
    "Problem",
    "HyperCleanProblem",
    "detection_f1",
    "make_hyperclean",
    "train_classifier",
    "make_quadratic",
    "make_random_quadratic",
    "make_problem",
    "problem_has_second_order",
    "make_toy",
    "with_fd_second_order",
]
