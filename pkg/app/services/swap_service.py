"""Vizinhança de trocas que preserva as metas de mandante e visitante."""
from collections import defaultdict
from typing import Callable, Iterator, NamedTuple, Optional

import numpy as np
from loguru import logger

from app.models.league import LeagueState
from app.models.season import Schedule
from app.services.objective_service import ObjectiveService, PwObjectiveModel


class Move(NamedTuple):
    """Troca de jogos: `removed` saem da seleção e `added` entram."""
    removed: tuple[int, ...]
    added: tuple[int, ...]


class SwapService:
    """Movimentos viáveis sobre calendários inteiros.

    Dois tipos de movimento mantêm x em X: a troca entre jogos do mesmo
    confronto (mesmo mandante e visitante) e o ciclo alternante de
    comprimento 4, que remove (i,j),(k,l) e inclui (i,l),(k,j).
    """

    @staticmethod
    def moves(state: LeagueState, x: np.ndarray) -> Iterator[Move]:
        """Enumera os movimentos a partir de x em ordem determinística."""
        selected = np.flatnonzero(x > 0.5)
        free: dict[tuple[int, int], list[int]] = defaultdict(list)
        for g in np.flatnonzero(x < 0.5):
            free[(int(state.host[g]), int(state.guest[g]))].append(int(g))

        host = state.host
        guest = state.guest
        for g in selected:
            for h in free.get((int(host[g]), int(guest[g])), ()):
                yield Move((int(g),), (h,))

        for a, g1 in enumerate(selected):
            i, j = int(host[g1]), int(guest[g1])
            for g2 in selected[a + 1:]:
                k, l = int(host[g2]), int(guest[g2])
                if i == k or j == l or i == l or k == j:
                    continue
                for h1 in free.get((i, l), ()):
                    for h2 in free.get((k, j), ()):
                        yield Move((int(g1), int(g2)), (h1, h2))

    @staticmethod
    def apply(x: np.ndarray, move: Move) -> np.ndarray:
        out = np.array(x, dtype=float, copy=True)
        out[list(move.removed)] = 0.0
        out[list(move.added)] = 1.0
        return out

    @staticmethod
    def pw_delta(model: PwObjectiveModel, grad: np.ndarray, move: Move) -> float:
        """Variação exata f(x + Δ) - f(x) = ∇f(x)ᵀΔ + c(Δ)."""
        state = model.state
        p = state.win_prob
        shift: dict[int, float] = defaultdict(float)
        linear = 0.0
        for games, sign in ((move.removed, -1.0), (move.added, 1.0)):
            for g in games:
                linear += sign * grad[g]
                shift[int(state.host[g])] += sign * p[g]
                shift[int(state.guest[g])] += sign * (1.0 - p[g])
        curvature = sum(v * v for v in shift.values()) / state.m ** 2
        return linear + curvature

    @staticmethod
    def descend_pw(
        model: PwObjectiveModel,
        schedule: Schedule,
        max_moves: Optional[int] = None,
        tol: float = 1e-14,
        accept: Optional[Callable[[np.ndarray], bool]] = None
    ) -> tuple[Schedule, int]:
        """Descida de primeira melhora sobre a vizinhança de trocas.

        Args:
            model: Objetivo PW
            schedule: Calendário inteiro viável de partida
            max_moves: Limite de movimentos aceitos (sem limite se None)
            tol: Melhora mínima para aceitar um movimento
            accept: Restrição extra sobre o calendário resultante (ex.: SoS)

        Returns:
            (calendário final, número de movimentos aceitos)
        """
        state = model.state
        x = state.check_feasible(schedule.selected)
        accepted = 0
        improved = True
        while improved and (max_moves is None or accepted < max_moves):
            improved = False
            grad = ObjectiveService.gradient(model, x)
            for move in SwapService.moves(state, x):
                if SwapService.pw_delta(model, grad, move) >= -tol:
                    continue
                candidate = SwapService.apply(x, move)
                if accept is None or accept(candidate):
                    x = candidate
                    accepted += 1
                    improved = True
                    break
        if accepted:
            logger.debug(f"Descida por trocas: {accepted} movimento(s) aceito(s)")
        return Schedule(selected=x), accepted
