"""Testes do min-max regret (PW-MMR)."""
import math

import numpy as np
import pytest

from app.core.exceptions import ConfigError
from app.models.league import LeagueState
from app.schemas.solver import FwConfig, MmrConfig
from app.services.exhaustive_service import ExhaustiveService
from app.services.frank_wolfe_service import FrankWolfeService
from app.services.objective_service import ObjectiveService
from app.services.regret_service import CandidateSet, RegretService
from app.services.synthetic_service import SyntheticLeagueService


def _shifted(state: LeagueState, delta: float) -> np.ndarray:
    signs = np.where(np.arange(state.n_games) % 2 == 0, 1.0, -1.0)
    return np.clip(state.win_prob + delta * signs, 0.05, 0.95)


def _three_candidates(seed: int) -> CandidateSet:
    state = SyntheticLeagueService.paired_league(seed=seed)
    return RegretService.build_candidates(
        state, {"base": state.win_prob, "up": _shifted(state, 0.2), "down": _shifted(state, -0.2)}
    )


class TestRegret:
    """Regret por candidato e a suavização log-sum-exp."""

    def test_smoothed_max_bounds(self):
        """max(r) ≤ F_τ ≤ max(r) + τ log|L|."""
        regrets = np.array([0.1, 0.4, 0.25])
        for tau in (1.0, 0.1, 1e-3):
            value = RegretService.smoothed_max(regrets, tau)
            assert regrets.max() <= value <= regrets.max() + tau * math.log(3) + 1e-15

    def test_softmax_weights_sum_to_one(self):
        weights = RegretService.softmax_weights(np.array([0.0, 1.0, 2.0]), 0.5)
        assert weights.sum() == pytest.approx(1.0)
        assert np.argmax(weights) == 2

    def test_regret_is_objective_minus_theta(self, tiny_state: LeagueState):
        candidates = RegretService.build_candidates(tiny_state, {"base": tiny_state.win_prob})
        x = np.ones(8) * 0.5
        expected = ObjectiveService.evaluate(candidates.models[0], x) - candidates.thetas[0]
        assert RegretService.regret(candidates, "base", x) == pytest.approx(expected)
        with pytest.raises(KeyError):
            RegretService.regret(candidates, "missing", x)

    def test_theta_is_lower_bound(self, tiny_state: LeagueState):
        """θ^(l) não excede o ótimo inteiro de cada candidato."""
        candidates = RegretService.build_candidates(
            tiny_state, {"base": tiny_state.win_prob, "shifted": _shifted(tiny_state, 0.1)}
        )
        for model, theta in zip(candidates.models, candidates.thetas):
            _, optimum = ExhaustiveService.best_pw(model)
            assert theta <= optimum + 1e-12

    def test_empty_candidate_set(self, tiny_state: LeagueState):
        with pytest.raises(ConfigError):
            RegretService.build_candidates(tiny_state, {})


class TestMinMaxRegret:
    """Calendário de menor regret máximo."""

    def test_single_candidate_is_pw_optimum(self, tiny_state: LeagueState):
        """Com um único candidato, o MMR escolhe o ótimo PW."""
        candidates = RegretService.build_candidates(tiny_state, {"base": tiny_state.win_prob})
        result = RegretService.solve_mmr(candidates)
        best, _ = ExhaustiveService.best_pw(candidates.models[0])
        assert result.result.best_atom.same_selection(best)
        assert result.max_regret >= -1e-12

    @pytest.mark.parametrize("delta", [0.1, 0.3])
    def test_matches_enumeration(self, tiny_state: LeagueState, delta: float):
        """Regret máximo igual ao menor entre os calendários viáveis."""
        candidates = RegretService.build_candidates(
            tiny_state,
            {"base": tiny_state.win_prob, "up": _shifted(tiny_state, delta), "down": _shifted(tiny_state, -delta)},
        )
        result = RegretService.solve_mmr(candidates, MmrConfig(rounds=4))
        best = min(
            float(np.max(RegretService.regrets(candidates, s.vector)))
            for s in ExhaustiveService.feasible_schedules(tiny_state)
        )
        assert result.max_regret == pytest.approx(best)
        assert result.max_regret == pytest.approx(max(result.regrets.values()))
        assert set(result.regrets) == {"base", "up", "down"}
        assert tiny_state.is_feasible(result.result.best_atom.selected)

    def test_lower_bound_certificate(self, tiny_state: LeagueState):
        candidates = RegretService.build_candidates(
            tiny_state, {"base": tiny_state.win_prob, "up": _shifted(tiny_state, 0.2)}
        )
        result = RegretService.solve_mmr(candidates)
        assert result.result.lower_bound <= result.max_regret + 1e-12
        assert result.result.upper_bound == result.max_regret

    @pytest.mark.parametrize("seed", range(10))
    def test_smoothing_brackets_max_regret_at_every_iterate(self, seed: int):
        """max_l r_l(x) ≤ F_τ(x) ≤ max_l r_l(x) + τ log|L| em cada linha do histórico."""
        candidates = _three_candidates(seed)
        result = RegretService.solve_mmr(candidates, MmrConfig(rounds=4))
        log_l = math.log(len(candidates))
        assert result.result.trace
        for row in result.result.trace:
            assert row.temperature is not None and row.max_regret is not None
            assert row.max_regret <= row.objective + 1e-12
            assert row.objective <= row.max_regret + row.temperature * log_l + 1e-12

    @pytest.mark.parametrize("seed", range(10))
    def test_trace_records_incumbent(self, seed: int):
        """Limite superior é o melhor regret máximo dos átomos colhidos e nunca sobe."""
        candidates = _three_candidates(seed)
        result = RegretService.solve_mmr(candidates, MmrConfig(rounds=4))
        trace = result.result.trace
        uppers = [row.upper_bound for row in trace]
        assert all(not math.isnan(u) for u in uppers)
        assert all(later <= earlier for earlier, later in zip(uppers, uppers[1:]))
        for row in trace:
            assert row.lower_bound <= row.upper_bound + 1e-12
        assert uppers[-1] == pytest.approx(result.max_regret, abs=1e-12)
        harvested = min(
            float(np.max(RegretService.regrets(candidates, atom.vector))) for atom in result.result.atoms
        )
        assert result.max_regret == pytest.approx(harvested, abs=1e-12)

    @pytest.mark.parametrize("seed", range(20))
    def test_single_candidate_within_pw_gap(self, seed: int):
        """Com um candidato, o átomo do MMR fica dentro do gap absoluto do FW."""
        state = SyntheticLeagueService.paired_league(seed=seed)
        candidates = RegretService.build_candidates(state, {"base": state.win_prob})
        model = candidates.models[0]
        fw = FrankWolfeService.solve(model, FwConfig(polish=False))
        result = RegretService.solve_mmr(candidates)
        f_mmr = ObjectiveService.evaluate(model, result.result.best_atom.vector)
        f_fw = ObjectiveService.evaluate(model, fw.best_atom.vector)
        assert abs(f_mmr - f_fw) <= fw.abs_gap + 1e-12
        assert state.is_feasible(result.result.best_atom.selected)

    def test_temperatures_are_geometric(self):
        temperatures = MmrConfig(rounds=3, tau_start=1.0, tau_end=0.01).temperatures()
        assert temperatures == pytest.approx([1.0, 0.1, 0.01])
        assert MmrConfig(rounds=1, tau_end=0.5).temperatures() == [0.5]

    @pytest.mark.slow
    def test_full_league(self, league30: LeagueState):
        candidates = RegretService.build_candidates(
            league30, {"base": league30.win_prob, "shifted": _shifted(league30, 0.05)}
        )
        result = RegretService.solve_mmr(candidates, MmrConfig(rounds=3, max_iterations=60))
        assert league30.is_feasible(result.result.best_atom.selected)
        assert result.max_regret >= -1e-12
