from .accept import AcceptUseCase, CriterionResult
from .bands import BandsUseCase
from .common import CommandResult, RunContext
from .evolve import EvolutionStudy, EvolveUseCase, evolution_study
from .modes import ModesUseCase
from .scatter import ScatterUseCase, scatter_on
from .steady import SteadyUseCase

USE_CASES = {
    "steady": SteadyUseCase,
    "bands": BandsUseCase,
    "modes": ModesUseCase,
    "scatter": ScatterUseCase,
    "evolve": EvolveUseCase,
    "accept": AcceptUseCase,
}

__all__ = [
    "USE_CASES",
    "AcceptUseCase",
    "BandsUseCase",
    "CommandResult",
    "CriterionResult",
    "EvolutionStudy",
    "EvolveUseCase",
    "ModesUseCase",
    "RunContext",
    "ScatterUseCase",
    "SteadyUseCase",
    "evolution_study",
    "scatter_on",
]
