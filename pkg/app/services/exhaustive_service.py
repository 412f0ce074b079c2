"""Enumeração exaustiva de calendários viáveis em instâncias pequenas."""
from itertools import combinations
from typing import Callable, Iterator, Optional

import numpy as np

from app.core.exceptions import ConfigError
from app.models.league import LeagueState
from app.models.season import Schedule
from app.services.concordance_service import ConcordanceService, PcInstance
from app.services.objective_service import ObjectiveService, PwObjectiveModel

MAX_GAMES = 24


class ExhaustiveService:
    """Oráculos por enumeração para validar os solvers."""

    @staticmethod
    def feasible_schedules(state: LeagueState, limit: int = MAX_GAMES) -> Iterator[Schedule]:
        """Todos os calendários inteiros em X, em ordem lexicográfica dos ids.

        Raises:
            ConfigError: instância com mais de `limit` jogos
        """
        if state.n_games > limit:
            raise ConfigError(
                f"Enumeração exaustiva limitada a {limit} jogos ({state.n_games} informados)"
            )
        k = state.games_to_select
        for chosen in combinations(range(state.n_games), k):
            x = np.zeros(state.n_games)
            x[list(chosen)] = 1.0
            if np.array_equal(state.home_loads(x), state.home_target) and np.array_equal(
                state.away_loads(x), state.away_target
            ):
                yield Schedule(selected=x)

    @staticmethod
    def best_pw(model: PwObjectiveModel, limit: int = MAX_GAMES) -> tuple[Schedule, float]:
        """Calendário de menor objetivo PW."""
        return ExhaustiveService.best_constrained(model, lambda _: True, limit)

    @staticmethod
    def best_constrained(
        model: PwObjectiveModel,
        predicate: Callable[[Schedule], bool],
        limit: int = MAX_GAMES
    ) -> Optional[tuple[Schedule, float]]:
        """Menor objetivo PW entre os calendários que satisfazem `predicate`.

        Returns:
            (calendário, objetivo) ou None se nenhum calendário satisfaz o filtro
        """
        best: Optional[tuple[Schedule, float]] = None
        for schedule in ExhaustiveService.feasible_schedules(model.state, limit):
            if not predicate(schedule):
                continue
            value = ObjectiveService.evaluate(model, schedule.vector)
            if best is None or value < best[1]:
                best = (schedule, value)
        return best

    @staticmethod
    def best_pc(instance: PcInstance, limit: int = MAX_GAMES) -> tuple[Schedule, float]:
        """Calendário de maior concordância esperada."""
        best: Optional[tuple[Schedule, float]] = None
        for schedule in ExhaustiveService.feasible_schedules(instance.state, limit):
            value = ConcordanceService.pc_objective(instance, schedule)
            if best is None or value > best[1]:
                best = (schedule, value)
        return best
