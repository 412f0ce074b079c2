"""Avaliação Monte Carlo de calendários reduzidos e as políticas de referência."""
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from typing import Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger
from scipy.stats import norm

from app.core.config import settings
from app.core.exceptions import ConfigError, DegenerateInstanceError, DomainError
from app.models.league import LeagueState
from app.models.season import Scenario, Schedule, ScoreVector
from app.schemas.simulation import (
    AgreementCutoffs,
    Category,
    ComparisonReport,
    EvalConfig,
    GreedyOutcome,
    PairwiseComparison,
    SimulationReport,
    VarianceDiagnostics,
)
from app.services.flow_service import FlowService
from app.services.ranking_service import RankingService
from app.services.strength_service import StrengthReport, StrengthService

STATUS_QUO = "status-quo"
CONFIDENCE = 0.95


class _Evaluator:
    """Dados compartilhados por todas as réplicas de uma avaliação."""

    def __init__(self, state: LeagueState, policies: list[Optional[np.ndarray]], cutoffs: AgreementCutoffs):
        _check_cutoffs(state.conferences, cutoffs)
        self.state = state
        self.policies = policies
        self.cutoffs = cutoffs
        games = np.arange(state.n_games)
        self.host_inc = np.zeros((state.n_games, state.n_teams))
        self.host_inc[games, state.host] = 1.0
        self.guest_inc = np.zeros((state.n_games, state.n_teams))
        self.guest_inc[games, state.guest] = 1.0
        self.status_quo_rank = None
        if any(x is None for x in policies):
            scores = SimulationService.status_quo_scores(state)
            self.status_quo_rank = RankingService.rank_rows(scores.numerators, state.pre_win_pct)

    def numerators(self, w: np.ndarray, x: np.ndarray) -> np.ndarray:
        return self.state.pre_wins + (w * x) @ self.host_inc + ((1.0 - w) * x) @ self.guest_inc

    def evaluate(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Concordância (réplicas × políticas) e concordância de grupos (réplicas × políticas × 3)."""
        rows = w.shape[0]
        tie_key = self.state.pre_win_pct
        full_rank = RankingService.rank_rows(self.numerators(w, 1.0), tie_key)
        full_members = [
            _members(full_rank, self.state.conferences, c, self.cutoffs) for c in Category
        ]
        concordance = np.empty((rows, len(self.policies)), dtype=np.int64)
        agreement = np.empty((rows, len(self.policies), len(Category)))
        for k, x in enumerate(self.policies):
            if x is None:
                short_rank = np.broadcast_to(self.status_quo_rank, full_rank.shape)
            else:
                short_rank = RankingService.rank_rows(self.numerators(w, x), tie_key)
            concordance[:, k] = RankingService.concordant_rows(-short_rank, -full_rank)
            for c, category in enumerate(Category):
                short_members = _members(short_rank, self.state.conferences, category, self.cutoffs)
                agreement[:, k, c] = _overlap(short_members, full_members[c])
        return concordance, agreement


class SimulationService:
    """Serviço de simulação de desfechos, baselines e diagnósticos."""

    @staticmethod
    def simulate(
        state: LeagueState,
        schedule: Optional[Schedule] = None,
        config: Optional[EvalConfig] = None,
        label: Optional[str] = None
    ) -> SimulationReport:
        """Sorteia cenários completos e compara a classificação reduzida com a completa.

        Args:
            state: Estado da liga
            schedule: Calendário viável; None avalia o Status Quo (nenhum jogo a mais)
            config: Réplicas, semente e probabilidades do avaliador
            label: Nome da política no relatório

        Returns:
            SimulationReport com concordância média, IC 95%, grupos e SSD

        Raises:
            FeasibilityError: calendário fora de X
            ConfigError: recorte maior que a conferência
        """
        label = label or (STATUS_QUO if schedule is None else "schedule")
        comparison = SimulationService.compare(state, {label: schedule}, config)
        return comparison.reports[label]

    @staticmethod
    def compare(
        state: LeagueState,
        schedules: Mapping[str, Optional[Schedule]],
        config: Optional[EvalConfig] = None
    ) -> ComparisonReport:
        """Avalia várias políticas sob os mesmos cenários (números aleatórios comuns).

        Para cada par (A, B) reporta a fração de réplicas em que A tem
        concordância estritamente maior e as margens médias nos dois sentidos.
        """
        if not schedules:
            raise ConfigError("Nenhuma política para avaliar")
        config = config or EvalConfig()
        labels = list(schedules)
        policies = [
            None if s is None else state.check_feasible(s.selected) for s in schedules.values()
        ]
        concordance, agreement = _replicate(state, policies, config)

        reports = {
            label: _report(state, label, schedules[label], concordance[:, k], agreement[:, k], config)
            for k, label in enumerate(labels)
        }
        pairwise = [
            _pairwise(labels[a], labels[b], concordance[:, a], concordance[:, b])
            for a, b in combinations(range(len(labels)), 2)
        ]
        for pair in pairwise:
            logger.info(
                f"{pair.first} vs {pair.second}: vence {pair.win_rate:.1%}, "
                f"empata {pair.tie_rate:.1%}, perde {pair.loss_rate:.1%}"
            )
        return ComparisonReport(reports=reports, pairwise=pairwise)

    @staticmethod
    def cross_evaluate(
        state: LeagueState,
        schedules: Mapping[str, Optional[Schedule]],
        evaluator_probs: Mapping[str, Sequence[float]],
        config: Optional[EvalConfig] = None
    ) -> pd.DataFrame:
        """Concordância média de cada calendário sob cada vetor de probabilidades do avaliador.

        Returns:
            DataFrame com uma linha por calendário e uma coluna por avaliador
        """
        if not evaluator_probs:
            raise ConfigError("Nenhum vetor de probabilidades do avaliador")
        config = config or EvalConfig()
        table = {}
        for name, probs in evaluator_probs.items():
            evaluator = config.model_copy(update={"sim_probs": [float(p) for p in probs]})
            comparison = SimulationService.compare(state, schedules, evaluator)
            table[name] = {
                label: report.mean_concordance for label, report in comparison.reports.items()
            }
        return pd.DataFrame(table, index=list(schedules))

    @staticmethod
    def agreement(
        short_scores: ScoreVector,
        full_scores: ScoreVector,
        conferences: Sequence[str],
        category: Category,
        cutoffs: Optional[AgreementCutoffs] = None
    ) -> float:
        """Percentual de times do grupo reduzido que também estão no grupo completo.

        Playoff e mando de quadra usam os melhores de cada conferência; a
        loteria usa os piores no geral. Empates seguem rank_from_scores.

        Raises:
            ConfigError: recorte maior que a conferência ou que a liga
        """
        cutoffs = cutoffs or AgreementCutoffs()
        conf = np.asarray(conferences)
        _check_cutoffs(conf, cutoffs)
        short = RankingService.rank_from_scores(short_scores).rank[None, :]
        full = RankingService.rank_from_scores(full_scores).rank[None, :]
        category = Category(category)
        return float(_overlap(
            _members(short, conf, category, cutoffs), _members(full, conf, category, cutoffs)
        )[0])

    @staticmethod
    def greedy_selection(state: LeagueState) -> GreedyOutcome:
        """Seleciona jogos em ordem de data (e id) enquanto as metas dos dois times permitem.

        Metas não atingidas ao final são reportadas, não lançadas.
        """
        home_left = np.array(state.home_target, copy=True)
        away_left = np.array(state.away_target, copy=True)
        x = np.zeros(state.n_games)
        for g in np.lexsort((np.arange(state.n_games), state.day)):
            host, guest = state.host[g], state.guest[g]
            if home_left[host] > 0 and away_left[guest] > 0:
                x[g] = 1.0
                home_left[host] -= 1
                away_left[guest] -= 1

        home_short = {int(i): int(v) for i, v in enumerate(home_left) if v > 0}
        away_short = {int(i): int(v) for i, v in enumerate(away_left) if v > 0}
        if home_short or away_short:
            logger.warning(
                f"Guloso não cumpriu metas: mandante {home_short}, visitante {away_short}"
            )
        return GreedyOutcome(schedule=Schedule(selected=x), home_shortfall=home_short, away_shortfall=away_short)

    @staticmethod
    def greedy_schedule(
        state: LeagueState,
        repair: bool = True,
        outcome: Optional[GreedyOutcome] = None
    ) -> Schedule:
        """Calendário guloso; com `repair`, completa as metas por caminhos alternantes.

        O reparo mantém o maior número possível de jogos escolhidos pelo guloso.
        `outcome` reaproveita uma seleção gulosa já calculada.
        """
        if outcome is None:
            outcome = SimulationService.greedy_selection(state)
        if outcome.feasible or not repair:
            return outcome.schedule
        repaired = FlowService.closest_feasible(state, outcome.schedule.vector)
        kept = int(np.sum(repaired.selected & outcome.schedule.selected))
        logger.info(
            f"Reparo do guloso: {kept} de {len(outcome.schedule.game_ids)} jogos mantidos, "
            f"{state.games_to_select} selecionados"
        )
        return repaired

    @staticmethod
    def status_quo_scores(state: LeagueState) -> ScoreVector:
        """Aproveitamento y⁰_i/m⁰_i na suspensão (denominador 1).

        Raises:
            DegenerateInstanceError: time sem jogos disputados
        """
        unplayed = [int(i) for i in np.flatnonzero(state.pre_games == 0)]
        if unplayed:
            raise DegenerateInstanceError(
                "Status Quo indefinido para times sem jogos disputados", teams=unplayed
            )
        pct = state.pre_wins / state.pre_games
        return ScoreVector(numerators=pct, denominator=1, tie_key=state.pre_win_pct)

    @staticmethod
    def strength_of_schedule(
        state: LeagueState,
        schedule: Optional[Schedule] = None,
        pre_win_pct: Optional[Sequence[float]] = None
    ) -> StrengthReport:
        """OW por time e SSD; None avalia a temporada completa."""
        return StrengthService.strength_of_schedule(state, schedule, pre_win_pct)

    @staticmethod
    def backtest(
        state: LeagueState,
        schedule: Optional[Schedule],
        actual: Scenario,
        cutoffs: Optional[AgreementCutoffs] = None,
        label: Optional[str] = None
    ) -> SimulationReport:
        """Concordância e grupos no único caminho realizado (sem intervalo de confiança).

        Raises:
            DimensionError: cenário com tamanho diferente de |G|
            DomainError: cenário não binário
            FeasibilityError: calendário fora de X
        """
        outcomes = state.check_dimension(actual.outcomes, "cenário")
        if not actual.is_binary:
            raise DomainError("Backtest requer resultados binários")
        x = None if schedule is None else state.check_feasible(schedule.selected)
        evaluator = _Evaluator(state, [x], cutoffs or AgreementCutoffs())
        concordance, agreement = evaluator.evaluate(outcomes[None, :])
        label = label or (STATUS_QUO if schedule is None else "schedule")
        strength = None if schedule is None else StrengthService.strength_of_schedule(state, schedule)
        report = SimulationReport(
            label=label,
            replications=1,
            mean_concordance=float(concordance[0, 0]),
            concordance_std=0.0,
            concordance_ci=None,
            max_concordance=RankingService.max_concordance(state.n_teams),
            agreement={c.value: float(agreement[0, 0, k]) for k, c in enumerate(Category)},
            ssd=None if strength is None else strength.ssd,
            ssd_flagged=[] if strength is None else strength.flagged,
            single_path=True,
        )
        logger.info(f"Backtest '{label}': concordância {report.mean_concordance:.0f}")
        return report

    @staticmethod
    def variance_sharpness_diagnostics(state: LeagueState, schedule: Schedule) -> VarianceDiagnostics:
        """Compara variância p(1-p) e nitidez max(p, 1-p) dos jogos selecionados e excluídos.

        Raises:
            FeasibilityError: calendário fora de X
        """
        selected = state.check_feasible(schedule.selected) > 0.5
        p = state.win_prob
        variance = p * (1.0 - p)
        sharpness = np.maximum(p, 1.0 - p)
        groups = {"all": np.ones_like(selected), "selected": selected, "excluded": ~selected}
        chosen = int(selected.sum())
        coefficient = 2.0 * state.alpha * chosen / state.m ** 2 if state.m > 0 else 0.0
        return VarianceDiagnostics(
            coefficient=float(coefficient),
            selected_games=chosen,
            mean_variance={k: _mean(variance, mask) for k, mask in groups.items()},
            mean_sharpness={k: _mean(sharpness, mask) for k, mask in groups.items()},
        )


def _replicate(
    state: LeagueState,
    policies: list[Optional[np.ndarray]],
    config: EvalConfig
) -> tuple[np.ndarray, np.ndarray]:
    probs = _evaluator_probs(state, config)
    evaluator = _Evaluator(state, policies, config.cutoffs)
    chunk = config.chunk_size or settings.SIM_CHUNK_SIZE
    total = config.replications
    sizes = [min(chunk, total - start) for start in range(0, total, chunk)]
    streams = np.random.SeedSequence(config.base_seed).spawn(len(sizes))

    def run_chunk(args: tuple[int, np.random.SeedSequence]) -> tuple[np.ndarray, np.ndarray]:
        size, stream = args
        rng = np.random.default_rng(stream)
        w = (rng.random((size, state.n_games)) < probs).astype(float)
        return evaluator.evaluate(w)

    with ThreadPoolExecutor(max_workers=config.threads or settings.SIM_THREADS) as pool:
        results = list(pool.map(run_chunk, zip(sizes, streams)))
    return (
        np.concatenate([r[0] for r in results]),
        np.concatenate([r[1] for r in results]),
    )


def _evaluator_probs(state: LeagueState, config: EvalConfig) -> np.ndarray:
    if config.sim_probs is None:
        return state.win_prob
    probs = state.check_dimension(config.sim_probs, "probabilidades do avaliador")
    if np.any((probs < 0.0) | (probs > 1.0)):
        raise DomainError("Probabilidades do avaliador fora de [0,1]")
    return probs


def _report(
    state: LeagueState,
    label: str,
    schedule: Optional[Schedule],
    concordance: np.ndarray,
    agreement: np.ndarray,
    config: EvalConfig
) -> SimulationReport:
    reps = concordance.shape[0]
    mean = float(concordance.mean())
    std = float(concordance.std(ddof=1)) if reps > 1 else 0.0
    half = float(norm.ppf(0.5 + CONFIDENCE / 2) * std / np.sqrt(reps))
    strength = None if schedule is None else StrengthService.strength_of_schedule(state, schedule)

    frame = None
    if config.keep_replications:
        frame = pd.DataFrame({"replication": np.arange(reps), "concordance": concordance})
        for k, category in enumerate(Category):
            frame[category.value] = agreement[:, k]

    report = SimulationReport(
        label=label,
        replications=reps,
        mean_concordance=mean,
        concordance_std=std,
        concordance_ci=(mean - half, mean + half),
        max_concordance=RankingService.max_concordance(state.n_teams),
        agreement={c.value: float(agreement[:, k].mean()) for k, c in enumerate(Category)},
        ssd=None if strength is None else strength.ssd,
        ssd_flagged=[] if strength is None else strength.flagged,
        per_replication=frame,
    )
    logger.info(
        f"Simulação '{label}': {reps} réplicas, concordância {mean:.2f} "
        f"[{mean - half:.2f}, {mean + half:.2f}] de {report.max_concordance}"
    )
    return report


def _pairwise(first: str, second: str, a: np.ndarray, b: np.ndarray) -> PairwiseComparison:
    diff = (a - b).astype(float)
    wins, losses = diff[diff > 0], diff[diff < 0]
    return PairwiseComparison(
        first=first,
        second=second,
        win_rate=float(np.mean(diff > 0)),
        tie_rate=float(np.mean(diff == 0)),
        loss_rate=float(np.mean(diff < 0)),
        mean_margin_win=float(wins.mean()) if wins.size else None,
        mean_margin_loss=float(-losses.mean()) if losses.size else None,
    )


def _check_cutoffs(conferences: np.ndarray, cutoffs: AgreementCutoffs) -> None:
    names, sizes = np.unique(conferences, return_counts=True)
    for name, size in zip(names, sizes):
        if cutoffs.playoff > size or cutoffs.home_court > size:
            raise ConfigError(
                f"Conferência {name} tem {size} times, menos que os recortes "
                f"(playoff={cutoffs.playoff}, mando={cutoffs.home_court})"
            )
    if cutoffs.lottery > conferences.shape[0]:
        raise ConfigError(
            f"Recorte da loteria ({cutoffs.lottery}) maior que a liga ({conferences.shape[0]})"
        )


def _members(
    ranks: np.ndarray,
    conferences: np.ndarray,
    category: Category,
    cutoffs: AgreementCutoffs
) -> np.ndarray:
    """Máscara (réplicas × times) dos integrantes do grupo em cada classificação."""
    n = ranks.shape[1]
    if category == Category.LOTTERY:
        return ranks > n - cutoffs.lottery
    k = cutoffs.playoff if category == Category.PLAYOFF else cutoffs.home_court
    members = np.zeros(ranks.shape, dtype=bool)
    for name in np.unique(conferences):
        idx = np.flatnonzero(conferences == name)
        position = np.argsort(np.argsort(ranks[:, idx], axis=1), axis=1)
        members[:, idx] = position < k
    return members


def _overlap(short: np.ndarray, full: np.ndarray) -> np.ndarray:
    return 100.0 * (short & full).sum(axis=1) / full.sum(axis=1)


def _mean(values: np.ndarray, mask: np.ndarray) -> Optional[float]:
    return float(values[mask].mean()) if mask.any() else None
