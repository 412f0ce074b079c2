"""Modelos de concordância (PC): MVP, SAA, fixação de variáveis e busca local."""
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from loguru import logger

from app.core.config import settings
from app.core.exceptions import ConfigError
from app.models.league import LeagueState
from app.models.season import Horizon, Scenario, Schedule, ScoreVector
from app.schemas.solver import LocalSearchConfig, PcConfig, PcResult
from app.services.flow_service import FlowService
from app.services.frank_wolfe_service import FrankWolfeService
from app.services.objective_service import ObjectiveService
from app.services.ranking_service import RankingService
from app.services.swap_service import SwapService


# Folga numérica para fixar pares no MVP (aproveitamentos fracionários).
FIXING_MARGIN = 1e-12


class PcMode(str, Enum):
    """Instanciação do modelo de concordância."""
    MVP = "mvp"
    SAA = "saa"


@dataclass(frozen=True, eq=False)
class PcInstance:
    """Cenários, placares da temporada completa e ẑ_ij por cenário.

    `z_hat[s, k]` vale 1 quando o time `pairs[0][k]` termina acima de
    `pairs[1][k]` na temporada completa do cenário s (com desempate).
    """
    state: LeagueState
    mode: PcMode
    scenarios: list[Scenario]
    full_scores: list[ScoreVector]
    z_hat: np.ndarray
    pairs: tuple[np.ndarray, np.ndarray]
    outcomes: np.ndarray
    incidence: tuple[np.ndarray, np.ndarray] = field(repr=False, default=None)

    @property
    def n_scenarios(self) -> int:
        return len(self.scenarios)

    @property
    def n_pairs(self) -> int:
        return int(self.pairs[0].size)


@dataclass(frozen=True, eq=False)
class FixingReport:
    """Pares (cenário, i, j) com z fixado pelos limites otimista/pessimista."""
    fixed_one: set[tuple[int, int, int]]
    fixed_zero: set[tuple[int, int, int]]
    free_pairs: int
    elimination_pct: float
    fixed_mask: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)
    lower: np.ndarray = field(repr=False)

    @property
    def fixed_pairs(self) -> int:
        return len(self.fixed_one) + len(self.fixed_zero)


@dataclass
class _SearchOutcome:
    schedule: Schedule
    objective: float
    evaluated: int = 0
    accepted: int = 0
    history: list[float] = field(default_factory=list)


class ConcordanceService:
    """Serviço dos modelos de concordância esperada."""

    @staticmethod
    def sample_scenarios(state: LeagueState, count: int, seed: int) -> list[Scenario]:
        """Sorteia `count` cenários com W_g ~ Bernoulli(p_g), determinístico pela semente."""
        if count < 1:
            raise ConfigError("Número de cenários deve ser >= 1")
        rng = np.random.default_rng(seed)
        draws = rng.random((count, state.n_games)) < state.win_prob
        return [Scenario(outcomes=row.astype(float)) for row in draws]

    @staticmethod
    def build_instance(
        state: LeagueState,
        mode: PcMode = PcMode.MVP,
        scenarios: Optional[Sequence[Scenario]] = None,
        count: Optional[int] = None,
        seed: int = 0
    ) -> PcInstance:
        """Monta a instância MVP (um pseudo-cenário W = p) ou SAA (cenários sorteados).

        Args:
            state: Estado da liga
            mode: MVP ou SAA
            scenarios: Cenários já sorteados (apenas SAA)
            count: Número de cenários a sortear quando `scenarios` é None
            seed: Semente do sorteio

        Returns:
            PcInstance com ẑ calculado pela classificação com desempate
        """
        mode = PcMode(mode)
        if mode == PcMode.MVP:
            chosen = [Scenario(outcomes=state.win_prob)]
        elif scenarios is not None:
            chosen = list(scenarios)
        else:
            chosen = ConcordanceService.sample_scenarios(state, count or settings.SAA_SCENARIOS, seed)

        everything = Schedule(selected=np.ones(state.n_games))
        full_scores = [
            RankingService.win_percentages(state, everything, sc, Horizon.FULL) for sc in chosen
        ]
        numerators = np.stack([np.asarray(s.numerators, dtype=float) for s in full_scores])
        ranks = RankingService.rank_rows(numerators, state.pre_win_pct)
        iu, ju = np.triu_indices(state.n_teams, 1)
        z_hat = ranks[:, iu] < ranks[:, ju]
        outcomes = np.stack([sc.outcomes for sc in chosen])
        games = np.arange(state.n_games)
        host_inc = np.zeros((state.n_games, state.n_teams))
        host_inc[games, state.host] = 1.0
        guest_inc = np.zeros((state.n_games, state.n_teams))
        guest_inc[games, state.guest] = 1.0
        return PcInstance(
            state=state,
            mode=mode,
            scenarios=chosen,
            full_scores=full_scores,
            z_hat=z_hat,
            pairs=(iu, ju),
            outcomes=outcomes,
            incidence=(host_inc, guest_inc),
        )

    @staticmethod
    def short_numerators(instance: PcInstance, x: np.ndarray) -> np.ndarray:
        """y⁰_i + vitórias em jogos selecionados, por cenário (S × n)."""
        host_inc, guest_inc = instance.incidence
        won_home = instance.outcomes * x
        won_away = (1.0 - instance.outcomes) * x
        return instance.state.pre_wins + won_home @ host_inc + won_away @ guest_inc

    @staticmethod
    def pair_credit(instance: PcInstance, numerators: np.ndarray, mask: Optional[np.ndarray] = None) -> float:
        """Soma, sobre cenários, dos pares concordantes; empates contam a favor."""
        iu, ju = instance.pairs
        diff = numerators[:, iu] - numerators[:, ju]
        agree = (diff == 0) | ((diff > 0) == instance.z_hat)
        if mask is not None:
            agree = agree & mask
        return float(agree.sum())

    @staticmethod
    def pc_objective(instance: PcInstance, x: Schedule) -> float:
        """Número esperado de pares concordantes do calendário x.

        Para cada cenário, z_ij é escolhido da melhor forma dado x: a ordem
        estrita dos aproveitamentos define z_ij e empates recebem o crédito.

        Raises:
            FeasibilityError: x não inteiro ou fora de X
        """
        arr = instance.state.check_feasible(x.selected)
        numerators = ConcordanceService.short_numerators(instance, arr)
        return ConcordanceService.pair_credit(instance, numerators) / instance.n_scenarios

    @staticmethod
    def variable_fixing(instance: PcInstance, scenario_index: Optional[int] = None) -> FixingReport:
        """Fixa z_ij com os limites y^U (máximo de vitórias) e y^L (mínimo).

        Se y^L_i > y^U_j então i termina acima de j para todo x ∈ X (z_ij = 1);
        se y^U_i < y^L_j, z_ij = 0.

        Args:
            instance: Instância PC
            scenario_index: Cenário a analisar (None = todos)

        Returns:
            FixingReport com os pares fixados e a porcentagem eliminada
        """
        state = instance.state
        indices = range(instance.n_scenarios) if scenario_index is None else [scenario_index]
        iu, ju = instance.pairs
        upper = np.zeros((instance.n_scenarios, state.n_teams))
        lower = np.zeros((instance.n_scenarios, state.n_teams))
        mask = np.zeros((instance.n_scenarios, instance.n_pairs), dtype=bool)
        fixed_one: set[tuple[int, int, int]] = set()
        fixed_zero: set[tuple[int, int, int]] = set()

        for s in indices:
            w = instance.outcomes[s]
            hi, lo = _win_bounds(state, w)
            upper[s], lower[s] = hi, lo
            ones = lo[iu] - hi[ju] > FIXING_MARGIN
            zeros = lo[ju] - hi[iu] > FIXING_MARGIN
            mask[s] = ones | zeros
            fixed_one.update((s, int(i), int(j)) for i, j in zip(iu[ones], ju[ones]))
            fixed_zero.update((s, int(i), int(j)) for i, j in zip(iu[zeros], ju[zeros]))

        total = len(indices) * instance.n_pairs
        fixed = len(fixed_one) + len(fixed_zero)
        return FixingReport(
            fixed_one=fixed_one,
            fixed_zero=fixed_zero,
            free_pairs=total - fixed,
            elimination_pct=100.0 * fixed / total if total else 0.0,
            fixed_mask=mask,
            upper=upper,
            lower=lower,
        )

    @staticmethod
    def local_search(
        instance: PcInstance,
        start: Schedule,
        budget: int,
        seed: int = 0,
        restarts: int = 0,
        fixing: Optional[FixingReport] = None
    ) -> Schedule:
        """Subida de encosta com reinícios sobre a vizinhança de trocas.

        Args:
            instance: Instância PC
            start: Calendário viável inicial
            budget: Movimentos avaliados por reinício (0 devolve `start`)
            seed: Semente da ordem dos movimentos e dos reinícios
            restarts: Reinícios a partir de calendários aleatórios
            fixing: Pares fixados, ignorados na avaliação incremental

        Returns:
            Melhor calendário encontrado

        Raises:
            FeasibilityError: `start` fora de X
        """
        return _search(instance, start, budget, seed, restarts, fixing).schedule

    @staticmethod
    def solve_pc(state: LeagueState, mode: PcMode, config: Optional[PcConfig] = None) -> PcResult:
        """Resolve PC-MVP ou PC-SAA: instância, fixação, partida pelo PW-FW e busca local."""
        config = config or PcConfig()
        mode = PcMode(mode)
        start_time = time.perf_counter()
        instance = ConcordanceService.build_instance(
            state, mode, count=config.scenarios, seed=config.seed
        )
        fixing = ConcordanceService.variable_fixing(instance)
        logger.info(
            f"PC-{mode.value.upper()}: {instance.n_scenarios} cenário(s), "
            f"{fixing.elimination_pct:.1f}% dos pares fixados"
        )
        start = FrankWolfeService.solve(ObjectiveService.build_model(state), config.fw).best_atom
        search: LocalSearchConfig = config.search
        outcome = _search(instance, start, search.budget, search.seed, search.restarts, fixing)
        elapsed = time.perf_counter() - start_time
        logger.info(
            f"PC-{mode.value.upper()} concluído: concordância={outcome.objective:.4f} "
            f"movimentos avaliados={outcome.evaluated} ({elapsed:.3f}s)"
        )
        return PcResult(
            schedule=outcome.schedule,
            mode=mode.value,
            objective=outcome.objective,
            start_objective=outcome.history[0] if outcome.history else outcome.objective,
            scenarios=instance.n_scenarios,
            fixed_pairs=fixing.fixed_pairs,
            free_pairs=fixing.free_pairs,
            elimination_pct=fixing.elimination_pct,
            evaluated_moves=outcome.evaluated,
            elapsed=elapsed,
        )


def _win_bounds(state: LeagueState, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Aproveitamento máximo e mínimo alcançável por time em X para o cenário w."""
    upper = np.zeros(state.n_teams)
    lower = np.zeros(state.n_teams)
    for i in range(state.n_teams):
        home = np.sort(w[state.home_games(i)])
        away = np.sort(1.0 - w[state.away_games(i)])
        mh, ma = int(state.home_target[i]), int(state.away_target[i])
        best = home[home.size - mh:].sum() + away[away.size - ma:].sum()
        worst = home[:mh].sum() + away[:ma].sum()
        upper[i] = (state.pre_wins[i] + best) / state.m
        lower[i] = (state.pre_wins[i] + worst) / state.m
    return upper, lower


def _search(
    instance: PcInstance,
    start: Schedule,
    budget: int,
    seed: int,
    restarts: int,
    fixing: Optional[FixingReport]
) -> _SearchOutcome:
    state = instance.state
    x0 = state.check_feasible(start.selected)
    free = None
    constant = 0.0
    if fixing is not None:
        free = ~fixing.fixed_mask
        # pares fixados concordam ou não independentemente de x
        constant = ConcordanceService.pair_credit(
            instance, ConcordanceService.short_numerators(instance, x0), fixing.fixed_mask
        )

    def value(x: np.ndarray) -> float:
        numerators = ConcordanceService.short_numerators(instance, x)
        return (constant + ConcordanceService.pair_credit(instance, numerators, free)) / instance.n_scenarios

    best = _SearchOutcome(schedule=Schedule(selected=x0), objective=value(x0))
    best.history.append(best.objective)
    if budget <= 0:
        return best

    streams = np.random.SeedSequence(seed).spawn(restarts + 1)
    for r, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        x = x0 if r == 0 else FlowService.random_schedule(state, rng).vector
        current = value(x)
        evaluated = 0
        improved = True
        while improved and evaluated < budget:
            improved = False
            moves = list(SwapService.moves(state, x))
            for k in rng.permutation(len(moves)):
                if evaluated >= budget:
                    break
                evaluated += 1
                candidate = SwapService.apply(x, moves[k])
                score = value(candidate)
                if score > current + 1e-12:
                    x, current = candidate, score
                    best.accepted += 1
                    improved = True
                    if r == 0:
                        best.history.append(current)
                    break
        best.evaluated += evaluated
        logger.debug(f"Reinício {r}: concordância {current:.4f} ({evaluated} movimentos)")
        if current > best.objective:
            best.schedule = Schedule(selected=x)
            best.objective = current
    return best
