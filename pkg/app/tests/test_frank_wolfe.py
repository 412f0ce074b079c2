"""Testes do Frank-Wolfe (PW-FW) e da extensão com força de tabela (PW-SoS)."""
import math
import time

import numpy as np
import pytest

from app.core.exceptions import DegenerateInstanceError
from app.models.league import LeagueState
from app.schemas.solver import FwConfig
from app.services.exhaustive_service import ExhaustiveService
from app.services.frank_wolfe_service import FrankWolfeService, relative_gap
from app.services.objective_service import ObjectiveService
from app.services.strength_service import StrengthService
from app.services.synthetic_service import SyntheticLeagueService


class TestFrankWolfe:
    """Relaxação contínua e melhor átomo inteiro."""

    def test_matches_enumeration_on_paired_leagues(self):
        """Em 100 ligas com confrontos repetidos, o melhor átomo é o ótimo inteiro em pelo menos 95.

        O limite inferior nunca passa do ótimo.
        """
        exact = 0
        for seed in range(100):
            model = ObjectiveService.build_model(SyntheticLeagueService.paired_league(seed=seed))
            result = FrankWolfeService.solve(model)
            _, value = ExhaustiveService.best_pw(model)
            assert result.lower_bound <= value + 1e-12
            assert result.upper_bound >= value - 1e-12
            exact += result.upper_bound == pytest.approx(value, abs=1e-12)
        assert exact >= 95

    def test_paired_league_has_many_schedules(self):
        """Qualquer escolha de cópia por confronto é viável."""
        for seed in range(10):
            state = SyntheticLeagueService.paired_league(seed=seed)
            assert state.n_games == 8
            assert len(list(ExhaustiveService.feasible_schedules(state))) >= 16

    def test_certificates(self, tiny_model):
        """LB ≤ f(melhor átomo) = UB e o histórico é coerente."""
        result = FrankWolfeService.solve(tiny_model)
        assert result.lower_bound <= result.upper_bound + 1e-12
        assert result.upper_bound == pytest.approx(
            ObjectiveService.evaluate(tiny_model, result.best_atom.vector)
        )
        assert result.iterations == len(result.trace)
        assert all(0.0 <= row.step <= 1.0 for row in result.trace)
        lower = [row.lower_bound for row in result.trace]
        assert lower == sorted(lower)

    def test_best_atom_is_integral_and_feasible(self, league30: LeagueState):
        model = ObjectiveService.build_model(league30)
        result = FrankWolfeService.solve(model, FwConfig(polish=False))
        assert result.best_atom.is_integral
        assert league30.is_feasible(result.best_atom.selected)
        assert result.fractional.fractional is not None
        assert np.all((result.fractional.fractional >= 0) & (result.fractional.fractional <= 1))

    def test_polish_never_worsens(self, league30: LeagueState):
        """O polimento por trocas só aceita melhoras e mantém o limite inferior."""
        model = ObjectiveService.build_model(league30)
        raw = FrankWolfeService.solve(model, FwConfig(polish=False))
        polished = FrankWolfeService.solve(model, FwConfig(polish=True))
        assert polished.upper_bound <= raw.upper_bound + 1e-15
        assert polished.lower_bound == pytest.approx(raw.lower_bound)
        assert league30.is_feasible(polished.best_atom.selected)

    def test_summary(self, tiny_model):
        summary = FrankWolfeService.solve(tiny_model).summary()
        assert summary["objective"] >= summary["lower_bound"]
        assert summary["atoms"] >= 1
        assert "elapsed" in summary

    def test_line_search_minimizes_along_segment(self, tiny_model):
        """γ exato não é pior que uma grade em [0,1]."""
        x = np.full(8, 0.5)
        atom = np.array([1, 1, 1, 1, 0, 0, 0, 0], dtype=float)
        gamma = FrankWolfeService.line_search(tiny_model, x, atom)
        assert 0.0 <= gamma <= 1.0
        best = ObjectiveService.evaluate(tiny_model, x + gamma * (atom - x))
        for g in np.linspace(0, 1, 101):
            assert best <= ObjectiveService.evaluate(tiny_model, x + g * (atom - x)) + 1e-14

    @pytest.mark.slow
    def test_runtime_on_full_league(self, league30: LeagueState):
        """30 times e 259 jogos resolvidos em menos de um segundo."""
        model = ObjectiveService.build_model(league30)
        start = time.perf_counter()
        result = FrankWolfeService.solve(model, FwConfig(polish=False))
        assert time.perf_counter() - start < 1.0
        assert result.abs_gap >= -1e-12


class TestRelativeGap:
    def test_zero_when_bounds_match(self):
        assert relative_gap(1.0, 1.0) == 0.0

    def test_infinite_for_nonpositive_lower_bound(self):
        assert math.isinf(relative_gap(1.0, 0.0))

    def test_regular(self):
        assert relative_gap(1.1, 1.0) == pytest.approx(0.1)


class TestStrengthOfSchedule:
    """PW-SoS e o desvio de força de tabela."""

    def test_infinite_epsilon_is_plain_fw(self, tiny_model):
        plain = FrankWolfeService.solve(tiny_model)
        sos = FrankWolfeService.solve_sos(tiny_model, FwConfig(sos_epsilon=math.inf))
        assert sos.best_atom.same_selection(plain.best_atom)
        assert sos.sos_violation == 0.0

    def test_matches_constrained_enumeration(self):
        """Com ε separando os calendários, PW-SoS atinge o ótimo restrito na maioria das ligas.

        O limite inferior Lagrangiano nunca passa do ótimo restrito.
        """
        checked = exact = 0
        for seed in range(40):
            state = SyntheticLeagueService.paired_league(seed=seed)
            try:
                constraints = StrengthService.sos_constraints(state)
            except DegenerateInstanceError:
                continue
            levels = sorted({
                float(np.max(constraints.excess(s.vector)))
                for s in ExhaustiveService.feasible_schedules(state)
            })
            cuts = [(a + b) / 2 for a, b in zip(levels, levels[1:]) if b - a > 1e-4 and a + b >= 0]
            if not cuts:
                continue
            epsilon = cuts[len(cuts) // 2]
            model = ObjectiveService.build_model(state)
            result = FrankWolfeService.solve_sos(
                model, FwConfig(sos_epsilon=epsilon, sos_step=50.0, sos_max_dual_iters=200)
            )
            _, value = ExhaustiveService.best_constrained(
                model, lambda s: constraints.violation(s.vector, epsilon) <= 1e-9
            )
            assert result.lower_bound <= value + 1e-12
            if result.sos_violation <= 1e-9:
                assert result.upper_bound >= value - 1e-12
                exact += result.upper_bound == pytest.approx(value, abs=1e-12)
            checked += 1
        assert checked >= 10
        assert exact >= 0.8 * checked

    def test_ssd_of_full_season_is_zero(self, league30: LeagueState):
        """Sem calendário reduzido OW = ÔW e SSD = 0."""
        report = StrengthService.strength_of_schedule(league30)
        np.testing.assert_allclose(report.ow, report.ow_full)
        assert report.ssd == pytest.approx(0.0, abs=1e-12)

    def test_ssd_is_nonnegative(self, league30: LeagueState):
        model = ObjectiveService.build_model(league30)
        result = FrankWolfeService.solve(model, FwConfig(polish=False))
        report = StrengthService.strength_of_schedule(league30, result.best_atom)
        assert report.ssd >= 0
        assert report.ssd == pytest.approx(float(np.mean(np.maximum(report.relative_excess, 0))))

    def test_constraints_are_linear_form_of_ow(self, league30: LeagueState):
        """r_i(x) + 1 = OW_i(x)/ÔW_i para todos os times com jogos restantes."""
        schedule = FrankWolfeService.initial_point(ObjectiveService.build_model(league30))
        constraints = StrengthService.sos_constraints(league30)
        report = StrengthService.strength_of_schedule(league30, schedule)
        ratio = report.ow[constraints.teams] / report.ow_full[constraints.teams]
        np.testing.assert_allclose(constraints.excess(schedule.vector) + 1.0, ratio)

    def test_zero_opponent_strength_is_degenerate(self, tiny_state: LeagueState):
        """ÔW_i = 0 torna a restrição indefinida."""
        winless = LeagueState(
            teams=[t.model_copy(update={"pre_wins": 0}) for t in tiny_state.teams],
            remaining_games=tiny_state.remaining_games,
            full_season_length=tiny_state.full_season_length,
            short_season_length=tiny_state.short_season_length,
        )
        model = ObjectiveService.build_model(winless)
        with pytest.raises(DegenerateInstanceError) as exc:
            FrankWolfeService.solve_sos(model, FwConfig(sos_epsilon=0.1))
        assert exc.value.context["teams"] == [0, 1, 2, 3]
