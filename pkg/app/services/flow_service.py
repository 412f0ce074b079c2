"""Subproblema de transporte: calendário inteiro de custo mínimo sobre X."""
from typing import Optional, Sequence

import numpy as np
from loguru import logger
from ortools.graph.python import max_flow, min_cost_flow

from app.core.exceptions import FeasibilityError
from app.models.league import LeagueState
from app.models.season import Schedule

# Custos reais viram inteiros com esta resolução relativa ao maior |c_g|.
COST_RESOLUTION = 1e12
# Maior custo inteiro por arco, já com o desempate.
COST_LIMIT = 2.0 ** 50


class _Network:
    """Rede bipartida S → H_i → A_j → T com um arco unitário por jogo.

    Os nós são 0 (origem), 1..n (mandantes), n+1..2n (visitantes) e 2n+1
    (destino). Os arcos dos jogos vêm primeiro, na ordem dos ids.
    """

    def __init__(self, state: LeagueState):
        n = state.n_teams
        teams = np.arange(n)
        self.n_games = state.n_games
        self.source = 0
        self.sink = 2 * n + 1
        self.supply = state.games_to_select
        self.start = np.concatenate([1 + state.host, np.zeros(n, dtype=np.int64), n + 1 + teams])
        self.end = np.concatenate([n + 1 + state.guest, 1 + teams, np.full(n, self.sink)])
        self.capacity = np.concatenate([
            np.ones(state.n_games, dtype=np.int64),
            state.home_target.astype(np.int64),
            state.away_target.astype(np.int64),
        ])
        self.n_teams = n


class FlowService:
    """Serviço para o problema de transporte do Frank-Wolfe e derivados."""

    @staticmethod
    def transportation(state: LeagueState, costs: Sequence[float]) -> Schedule:
        """Resolve min Σ c_g x_g sobre a relaxação contínua de X.

        A matriz de restrições é totalmente unimodular, então a solução de
        fluxo é inteira e é devolvida como calendário binário.

        Args:
            state: Estado da liga com as metas m^h_i e m^a_i
            costs: Custo c_g de cada jogo (pode ser negativo)

        Returns:
            Calendário binário de custo mínimo

        Raises:
            DimensionError: vetor de custos com tamanho diferente de |G|
            FeasibilityError: metas impossíveis de atender, com os times afetados
        """
        c = state.check_dimension(costs, "custos")
        network = _Network(state)
        unit_costs = np.concatenate([
            _integer_costs(c),
            np.zeros(2 * network.n_teams, dtype=np.int64),
        ])

        smcf = min_cost_flow.SimpleMinCostFlow()
        arcs = smcf.add_arcs_with_capacity_and_unit_cost(
            network.start, network.end, network.capacity, unit_costs
        )
        smcf.set_nodes_supplies(
            np.array([network.source, network.sink]),
            np.array([network.supply, -network.supply]),
        )
        status = smcf.solve()
        if status != smcf.OPTIMAL:
            teams = FlowService.unmet_teams(state)
            logger.warning(f"Subproblema de transporte inviável (status {status}); times: {teams}")
            raise FeasibilityError(
                "Metas de mandante/visitante impossíveis de atender com os jogos restantes",
                teams=teams,
            )

        flows = smcf.flows(arcs[: network.n_games])
        return Schedule(selected=flows.astype(float))

    @staticmethod
    def unmet_teams(state: LeagueState) -> list[int]:
        """Times cujas metas ficam descobertas em um fluxo máximo.

        Returns:
            Lista ordenada de ids (vazia quando X é não vazio)
        """
        network = _Network(state)
        smf = max_flow.SimpleMaxFlow()
        arcs = smf.add_arcs_with_capacity(network.start, network.end, network.capacity)
        smf.solve(network.source, network.sink)
        if smf.optimal_flow() == network.supply:
            return []
        flows = smf.flows(arcs)
        n, g = network.n_teams, network.n_games
        home = flows[g:g + n] < network.capacity[g:g + n]
        away = flows[g + n:] < network.capacity[g + n:]
        return [int(i) for i in np.flatnonzero(home | away)]

    @staticmethod
    def closest_feasible(state: LeagueState, x: Sequence[float]) -> Schedule:
        """Calendário viável que mantém o maior número possível de jogos de x.

        Equivale a aplicar caminhos alternantes a partir da seleção parcial:
        jogos já escolhidos custam 0 e os demais custam 1.
        """
        arr = state.check_dimension(x, "calendário")
        return FlowService.transportation(state, (arr < 0.5).astype(float))

    @staticmethod
    def random_schedule(state: LeagueState, rng: np.random.Generator) -> Schedule:
        """Calendário viável sorteado via custos aleatórios."""
        return FlowService.transportation(state, rng.random(state.n_games))

    @staticmethod
    def cost_of(costs: Sequence[float], schedule: Schedule) -> float:
        return float(np.dot(np.asarray(costs, dtype=float), schedule.selected))


def _integer_costs(costs: np.ndarray, resolution: Optional[float] = None) -> np.ndarray:
    """Custos inteiros com desempate pelo menor id de jogo.

    Cada unidade do custo escalado vale `spread` unidades, e o jogo g soma g.
    Como `spread` excede Σ g, o desempate nunca inverte custos distintos.
    """
    n = costs.shape[0]
    index = np.arange(n, dtype=np.int64)
    spread = n * (n - 1) // 2 + 1
    span = float(np.max(np.abs(costs))) if n else 0.0
    if span == 0.0:
        return index
    resolution = min(resolution or COST_RESOLUTION, COST_LIMIT / spread)
    scaled = np.rint(costs * (resolution / span)).astype(np.int64)
    return scaled * spread + index
