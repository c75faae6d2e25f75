# File and orchestration services package

from .scenario_service import scenario_service
from .runner_service import runner_service
from .builtin_service import builtin_service

__all__ = ["builtin_service", "runner_service", "scenario_service"]
