"""Testes do subproblema de transporte e da vizinhança de trocas."""
from itertools import islice

import numpy as np
import pytest
from scipy.optimize import linprog

from app.core.exceptions import FeasibilityError
from app.models.league import Conference, Game, LeagueState, Team
from app.services.exhaustive_service import ExhaustiveService
from app.services.flow_service import FlowService
from app.services.objective_service import ObjectiveService
from app.services.swap_service import Move, SwapService
from app.services.synthetic_service import SyntheticLeagueService


@pytest.fixture
def blocked_state() -> LeagueState:
    """Metas individualmente possíveis, mas sem calendário viável.

    O time 2 precisa de duas partidas fora, ambas contra o time 0, que só
    pode receber uma; o time 1 só recebe o time 0, que não tem meta fora.
    """
    records = [(9, 1, 0), (9, 1, 0), (8, 0, 2)]
    teams = [
        Team(
            id=i, name=f"T{i}", conference=Conference.EAST, pre_wins=4,
            pre_home_games=games // 2, pre_away_games=games - games // 2,
            home_target=home, away_target=away,
        )
        for i, (games, home, away) in enumerate(records)
    ]
    pairs = [(0, 2, 1), (0, 2, 2), (1, 0, 1), (2, 1, 1), (2, 1, 2)]
    games = [
        Game(id=g, host=h, guest=a, match_index=k, day=g, win_prob=0.5)
        for g, (h, a, k) in enumerate(pairs)
    ]
    return LeagueState(teams=teams, remaining_games=games, full_season_length=12, short_season_length=10)


def _relaxation_value(state: LeagueState, costs: np.ndarray) -> float:
    n = state.n_teams
    rows = np.zeros((2 * n, state.n_games))
    rows[state.host, np.arange(state.n_games)] = 1.0
    rows[n + state.guest, np.arange(state.n_games)] = 1.0
    rhs = np.concatenate([state.home_target, state.away_target]).astype(float)
    lp = linprog(costs, A_eq=rows, b_eq=rhs, bounds=(0, 1), method="highs")
    assert lp.status == 0
    return float(lp.fun)


class TestTransportation:
    """Problema de transporte sobre X̄."""

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_enumeration(self, seed: int):
        """O calendário do fluxo tem o menor custo entre os viáveis, com custos negativos e empates."""
        state = SyntheticLeagueService.paired_league(seed=seed)
        rng = np.random.default_rng(seed)
        costs = [
            -rng.random(state.n_games),
            rng.normal(size=state.n_games),
            rng.integers(-3, 4, size=state.n_games).astype(float),
            rng.normal(size=state.n_games) * (rng.random(state.n_games) < 0.5),
        ][seed % 4]
        schedule = FlowService.transportation(state, costs)
        best = min(FlowService.cost_of(costs, s) for s in ExhaustiveService.feasible_schedules(state))
        assert state.is_feasible(schedule.selected)
        assert FlowService.cost_of(costs, schedule) == pytest.approx(best, abs=1e-12)

    def test_equal_costs_prefer_lower_game_ids(self, tiny_state: LeagueState):
        for value in (0.0, 2.5, -1.0):
            schedule = FlowService.transportation(tiny_state, np.full(tiny_state.n_games, value))
            assert schedule.game_ids == [0, 1, 2, 3]

    def test_tie_break_minimizes_id_sum(self):
        """Entre calendários de mesmo custo, vence o de menor soma de ids."""
        for seed in range(20):
            state = SyntheticLeagueService.paired_league(seed=seed)
            schedule = FlowService.transportation(state, np.ones(state.n_games))
            lowest = min(sum(s.game_ids) for s in ExhaustiveService.feasible_schedules(state))
            assert sum(schedule.game_ids) == lowest

    def test_integral_optimum_of_relaxation(self, league30: LeagueState):
        """A solução inteira atinge o valor da relaxação linear (matriz TU)."""
        rng = np.random.default_rng(2)
        costs = rng.normal(size=league30.n_games)
        schedule = FlowService.transportation(league30, costs)
        assert league30.is_feasible(schedule.selected)
        assert FlowService.cost_of(costs, schedule) == pytest.approx(
            _relaxation_value(league30, costs), rel=1e-6, abs=1e-8
        )

    def test_negative_costs(self, league30: LeagueState):
        """Custos negativos não alteram o número de jogos selecionados."""
        schedule = FlowService.transportation(league30, -np.ones(league30.n_games))
        assert int(schedule.selected.sum()) == league30.games_to_select

    def test_infeasible_targets_report_teams(self, blocked_state: LeagueState):
        """Metas impossíveis geram FeasibilityError com os times descobertos."""
        assert FlowService.unmet_teams(blocked_state) == [1, 2]
        with pytest.raises(FeasibilityError) as exc:
            FlowService.transportation(blocked_state, np.zeros(blocked_state.n_games))
        assert exc.value.teams == [1, 2]

    def test_feasible_state_has_no_unmet_teams(self, league30: LeagueState):
        assert FlowService.unmet_teams(league30) == []

    def test_closest_feasible_keeps_feasible_input(self, league30: LeagueState):
        """Um calendário já viável é devolvido sem alterações."""
        schedule = FlowService.random_schedule(league30, np.random.default_rng(4))
        closest = FlowService.closest_feasible(league30, schedule.vector)
        assert closest.same_selection(schedule)


class TestSwaps:
    """Movimentos que preservam as metas."""

    def test_moves_preserve_feasibility(self, league30: LeagueState):
        x = FlowService.random_schedule(league30, np.random.default_rng(9)).vector
        moves = list(islice(SwapService.moves(league30, x), 300))
        assert moves
        for move in moves:
            assert league30.is_feasible(SwapService.apply(x, move))

    def test_pw_delta_is_exact(self, league30: LeagueState):
        """∇f(x)ᵀΔ + c(Δ) coincide com a diferença do objetivo."""
        model = ObjectiveService.build_model(league30)
        x = FlowService.random_schedule(league30, np.random.default_rng(10)).vector
        grad = ObjectiveService.gradient(model, x)
        base = ObjectiveService.evaluate(model, x)
        for move in islice(SwapService.moves(league30, x), 50):
            after = ObjectiveService.evaluate(model, SwapService.apply(x, move))
            assert SwapService.pw_delta(model, grad, move) == pytest.approx(after - base, abs=1e-12)

    def test_descent_never_worsens(self, league30: LeagueState):
        model = ObjectiveService.build_model(league30)
        start = FlowService.random_schedule(league30, np.random.default_rng(12))
        improved, moves = SwapService.descend_pw(model, start, max_moves=20)
        assert league30.is_feasible(improved.selected)
        assert moves <= 20
        assert ObjectiveService.evaluate(model, improved.vector) <= ObjectiveService.evaluate(model, start.vector)

    def test_apply_does_not_mutate(self):
        x = np.array([1.0, 0.0, 1.0, 0.0])
        moved = SwapService.apply(x, Move(removed=(0,), added=(1,)))
        assert x.tolist() == [1.0, 0.0, 1.0, 0.0]
        assert moved.tolist() == [0.0, 1.0, 1.0, 0.0]
