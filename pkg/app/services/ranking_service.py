"""Serviços de aproveitamento, classificação e métricas de similaridade entre classificações."""
from typing import Sequence, Union

import numpy as np

from app.core.exceptions import DimensionError
from app.models.league import LeagueState
from app.models.season import Horizon, Ranking, Scenario, Schedule, ScoreVector, TieBreak

Comparable = Union[ScoreVector, Ranking, Sequence[float], np.ndarray]


class RankingService:
    """Operações sobre placares e classificações de uma temporada."""

    @staticmethod
    def win_percentages(
        state: LeagueState,
        schedule: Schedule,
        scenario: Scenario,
        horizon: Horizon = Horizon.SHORT
    ) -> ScoreVector:
        """Calcula o aproveitamento final de cada time em um cenário.

        Args:
            state: Estado da liga na suspensão
            schedule: Calendário reduzido (ignorado quando horizon=FULL)
            scenario: Resultados W_g dos jogos restantes
            horizon: SHORT divide por m considerando só jogos selecionados;
                FULL considera todos os jogos e divide por m̂

        Returns:
            Vetor de aproveitamentos com numeradores exatos

        Raises:
            DimensionError: cenário ou calendário com tamanho diferente de |G|
            FeasibilityError: calendário não integral ou fora de X (horizon=SHORT)
        """
        outcomes = state.check_dimension(scenario.outcomes, "cenário")
        if horizon == Horizon.SHORT:
            x = state.check_feasible(schedule.selected)
            denominator = state.m
        else:
            state.check_dimension(schedule.selected, "calendário")
            x = np.ones(state.n_games)
            denominator = state.m_hat

        won = np.bincount(state.host, weights=outcomes * x, minlength=state.n_teams)
        won += np.bincount(state.guest, weights=(1.0 - outcomes) * x, minlength=state.n_teams)
        numerators = state.pre_wins + won
        if scenario.is_binary:
            numerators = np.rint(numerators).astype(np.int64)
        return ScoreVector(numerators=numerators, denominator=denominator, tie_key=state.pre_win_pct)

    @staticmethod
    def rank_from_scores(
        scores: ScoreVector,
        tie_break: TieBreak = TieBreak.BY_PRE_WIN_PCT_THEN_INDEX
    ) -> Ranking:
        """Converte aproveitamentos em posições 1..n.

        Empates são resolvidos pelo aproveitamento pré-suspensão (maior primeiro)
        e depois pelo menor índice.
        """
        n = len(scores)
        tie_key = scores.tie_key if scores.tie_key is not None else np.zeros(n)
        ranks = RankingService.rank_rows(
            np.asarray(scores.numerators, dtype=float)[None, :], tie_key
        )[0]
        return Ranking(rank=ranks, tie_break=tie_break)

    @staticmethod
    def rank_rows(numerators: np.ndarray, tie_key: np.ndarray) -> np.ndarray:
        """Versão vetorizada de rank_from_scores para uma matriz (réplicas × times)."""
        values = np.atleast_2d(numerators)
        rows, n = values.shape
        index = np.broadcast_to(np.arange(n), (rows, n))
        key = np.broadcast_to(-np.asarray(tie_key, dtype=float), (rows, n))
        order = np.lexsort((index, key, -values), axis=-1)
        ranks = np.empty((rows, n), dtype=np.int64)
        np.put_along_axis(ranks, order, np.broadcast_to(np.arange(1, n + 1), (rows, n)), axis=1)
        return ranks

    @staticmethod
    def concordance(a: Comparable, b: Comparable) -> int:
        """Número de pares (i, j), i < j, ordenados da mesma forma nos dois vetores.

        Empates em qualquer um dos vetores não contam como concordantes nem
        discordantes. Classificações são comparadas pela posição (1 = topo).
        """
        va, vb = _aligned(a, b)
        return int(RankingService.concordant_rows(va[None, :], vb[None, :])[0])

    @staticmethod
    def concordant_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Concordância linha a linha entre duas matrizes de valores de ordem."""
        n = a.shape[1]
        iu, ju = np.triu_indices(n, 1)
        da = np.sign(a[:, iu] - a[:, ju])
        db = np.sign(b[:, iu] - b[:, ju])
        return (da * db > 0).sum(axis=1)

    @staticmethod
    def euclidean_distance(a: Comparable, b: Comparable) -> int:
        """Distância euclidiana quadrática Σ(a_i - b_i)² entre classificações."""
        ra, rb = _rank_vectors(a, b)
        return int(np.sum((ra - rb) ** 2))

    @staticmethod
    def manhattan_distance(a: Comparable, b: Comparable) -> int:
        """Distância de Manhattan Σ|a_i - b_i| entre classificações."""
        ra, rb = _rank_vectors(a, b)
        return int(np.sum(np.abs(ra - rb)))

    @staticmethod
    def max_euclidean_distance(n: int) -> int:
        """Maior d_E possível entre duas permutações de n elementos."""
        return n * (n * n - 1) // 3

    @staticmethod
    def max_concordance(n: int) -> int:
        return n * (n - 1) // 2


def _order_values(v: Comparable) -> np.ndarray:
    """Valores em que "maior" significa "melhor classificado"."""
    if isinstance(v, ScoreVector):
        return np.asarray(v.numerators, dtype=float)
    if isinstance(v, Ranking):
        return -np.asarray(v.rank, dtype=float)
    return np.asarray(v, dtype=float)


def _aligned(a: Comparable, b: Comparable) -> tuple[np.ndarray, np.ndarray]:
    va, vb = _order_values(a), _order_values(b)
    if va.shape != vb.shape or va.ndim != 1:
        raise DimensionError(
            f"Vetores com dimensões diferentes: {va.shape} e {vb.shape}"
        )
    return va, vb


def _rank_vectors(a: Comparable, b: Comparable) -> tuple[np.ndarray, np.ndarray]:
    ra = np.asarray(a.rank if isinstance(a, Ranking) else a, dtype=np.int64)
    rb = np.asarray(b.rank if isinstance(b, Ranking) else b, dtype=np.int64)
    if ra.shape != rb.shape or ra.ndim != 1:
        raise DimensionError(
            f"Classificações com dimensões diferentes: {ra.shape} e {rb.shape}"
        )
    return ra, rb
