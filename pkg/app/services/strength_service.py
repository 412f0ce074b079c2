"""Força de tabela (OW) dos adversários restantes e o desvio SSD."""
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from loguru import logger

from app.core.exceptions import DegenerateInstanceError
from app.models.league import LeagueState
from app.models.season import Schedule


@dataclass(frozen=True, eq=False)
class StrengthReport:
    """OW no calendário reduzido, ÔW na temporada completa e o SSD.

    `flagged` lista os times cujo termo do SSD foi definido como 0 por
    denominador nulo.
    """
    ow: np.ndarray
    ow_full: np.ndarray
    relative_excess: np.ndarray
    ssd: float
    flagged: list[int] = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class SosConstraints:
    """Restrições lineares r_i(x) = OW_i(x)/ÔW_i - 1 ≤ ε para os times ativos."""
    teams: np.ndarray
    coefficients: np.ndarray

    def excess(self, x: np.ndarray) -> np.ndarray:
        return self.coefficients @ x - 1.0

    def violation(self, x: np.ndarray, epsilon: float) -> float:
        if self.teams.size == 0:
            return 0.0
        return float(max(np.max(self.excess(x)) - epsilon, 0.0))


class StrengthService:
    """Serviço de força de tabela (Opponents' Win percentage)."""

    @staticmethod
    def opponent_sums(state: LeagueState, x: np.ndarray, pre_win_pct: np.ndarray) -> np.ndarray:
        """Σ ȳ⁰ dos adversários em jogos selecionados, por time."""
        sums = np.bincount(state.host, weights=x * pre_win_pct[state.guest], minlength=state.n_teams)
        sums += np.bincount(state.guest, weights=x * pre_win_pct[state.host], minlength=state.n_teams)
        return sums

    @staticmethod
    def full_season_ow(state: LeagueState, pre_win_pct: Optional[Sequence[float]] = None) -> np.ndarray:
        """ÔW_i com todos os jogos restantes e divisor m̂ - m⁰_i (0 se não houver jogos)."""
        ybar = _pre_pct(state, pre_win_pct)
        sums = StrengthService.opponent_sums(state, np.ones(state.n_games), ybar)
        remaining = state.m_hat - state.pre_games
        return np.divide(sums, remaining, out=np.zeros(state.n_teams), where=remaining > 0)

    @staticmethod
    def strength_of_schedule(
        state: LeagueState,
        schedule: Optional[Schedule] = None,
        pre_win_pct: Optional[Sequence[float]] = None
    ) -> StrengthReport:
        """Calcula OW_i, ÔW_i e SSD = (1/n) Σ max((OW_i - ÔW_i)/ÔW_i, 0).

        Args:
            state: Estado da liga
            schedule: Calendário reduzido; None usa a temporada completa
            pre_win_pct: ȳ⁰ usado para os adversários (padrão: aproveitamento pré-suspensão)

        Returns:
            Relatório com OW, ÔW, excesso relativo e SSD
        """
        ybar = _pre_pct(state, pre_win_pct)
        ow_full = StrengthService.full_season_ow(state, ybar)
        if schedule is None:
            x = np.ones(state.n_games)
            remaining = state.m_hat - state.pre_games
        else:
            x = state.check_feasible(schedule.selected)
            remaining = state.m - state.pre_games
        sums = StrengthService.opponent_sums(state, x, ybar)
        ow = np.divide(sums, remaining, out=np.zeros(state.n_teams), where=remaining > 0)

        defined = (remaining > 0) & (ow_full > 0)
        excess = np.divide(ow - ow_full, ow_full, out=np.zeros(state.n_teams), where=defined)
        flagged = [int(i) for i in np.flatnonzero(~defined)]
        if flagged:
            logger.warning(f"Termo de SoS definido como 0 para os times {flagged} (denominador nulo)")
        ssd = float(np.mean(np.maximum(excess, 0.0)))
        return StrengthReport(ow=ow, ow_full=ow_full, relative_excess=excess, ssd=ssd, flagged=flagged)

    @staticmethod
    def sos_constraints(
        state: LeagueState,
        pre_win_pct: Optional[Sequence[float]] = None
    ) -> SosConstraints:
        """Coeficientes das restrições de força de tabela, lineares em x.

        Times sem jogos no calendário reduzido (m = m⁰_i) ficam de fora.

        Raises:
            DegenerateInstanceError: ÔW_i = 0 para um time ativo
        """
        ybar = _pre_pct(state, pre_win_pct)
        ow_full = StrengthService.full_season_ow(state, ybar)
        remaining = state.m - state.pre_games
        active = np.flatnonzero(remaining > 0)
        zero = [int(i) for i in active if ow_full[i] <= 0.0]
        if zero:
            raise DegenerateInstanceError(
                "ÔW_i = 0: restrição de força de tabela indefinida", teams=zero
            )

        coefficients = np.zeros((active.size, state.n_games))
        scale = np.zeros(state.n_teams)
        scale[active] = 1.0 / (remaining[active] * ow_full[active])
        row = np.full(state.n_teams, -1)
        row[active] = np.arange(active.size)
        games = np.arange(state.n_games)

        hosted = row[state.host] >= 0
        coefficients[row[state.host[hosted]], games[hosted]] += (
            ybar[state.guest[hosted]] * scale[state.host[hosted]]
        )
        visited = row[state.guest] >= 0
        coefficients[row[state.guest[visited]], games[visited]] += (
            ybar[state.host[visited]] * scale[state.guest[visited]]
        )
        return SosConstraints(teams=active, coefficients=coefficients)


def _pre_pct(state: LeagueState, pre_win_pct: Optional[Sequence[float]]) -> np.ndarray:
    if pre_win_pct is None:
        return np.asarray(state.pre_win_pct, dtype=float)
    return np.asarray(pre_win_pct, dtype=float)
