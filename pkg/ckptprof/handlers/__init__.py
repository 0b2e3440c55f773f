"""Import all command routers and add them to commands_list."""
from .experiment import EXPERIMENTS
from .gen import gen_router
from .optimize import optimize_router
from .pareto import pareto_router
from .profile import profile_router
from .revolve import revolve_router
from .sampling import sampling_router
from .simulate import simulate_router

commands_list = [
    simulate_router,
    profile_router,
    optimize_router,
    sampling_router,
    pareto_router,
    revolve_router,
    gen_router,
]

__all__ = [
    "EXPERIMENTS",
    "commands_list",
]
