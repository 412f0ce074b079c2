"""Testes da simulação de desfechos, do guloso, do Status Quo e dos diagnósticos."""
import numpy as np
import pytest

from app.core.exceptions import ConfigError, DegenerateInstanceError, DimensionError, DomainError, FeasibilityError
from app.models.league import Conference, Game, LeagueState, Team
from app.models.season import Scenario, Schedule, ScoreVector
from app.schemas.simulation import AgreementCutoffs, Category, EvalConfig
from app.schemas.solver import FwConfig
from app.services.frank_wolfe_service import FrankWolfeService
from app.services.objective_service import ObjectiveService
from app.services.simulation_service import STATUS_QUO, SimulationService
from app.services.strength_service import StrengthService
from app.services.synthetic_service import SyntheticLeagueService

SMALL = AgreementCutoffs(playoff=2, home_court=1, lottery=1)
FIRST = Schedule(selected=[1, 1, 1, 1, 0, 0, 0, 0])


class TestGreedy:
    """Guloso por data e reparo por caminhos alternantes."""

    def test_greedy_reports_shortfall(self, greedy_state: LeagueState):
        outcome = SimulationService.greedy_selection(greedy_state)
        assert outcome.schedule.game_ids == [0]
        assert outcome.home_shortfall == {1: 1}
        assert outcome.away_shortfall == {2: 1}
        assert not outcome.feasible

    def test_repair_reaches_feasible_schedule(self, greedy_state: LeagueState):
        schedule = SimulationService.greedy_schedule(greedy_state)
        assert schedule.game_ids == [1, 2]
        assert greedy_state.is_feasible(schedule.selected)

    def test_without_repair(self, greedy_state: LeagueState):
        schedule = SimulationService.greedy_schedule(greedy_state, repair=False)
        assert schedule.game_ids == [0]

    def test_greedy_follows_day_order(self, tiny_state: LeagueState):
        """Com metas cumpridas, o guloso fica com os primeiros jogos permitidos."""
        outcome = SimulationService.greedy_selection(tiny_state)
        if outcome.feasible:
            assert tiny_state.is_feasible(outcome.schedule.selected)
        first = int(np.lexsort((np.arange(8), tiny_state.day))[0])
        assert outcome.schedule.selected[first] == 1


class TestStatusQuo:
    def test_scores_are_pre_suspension_percentages(self, tiny_state: LeagueState):
        scores = SimulationService.status_quo_scores(tiny_state)
        assert scores.denominator == 1
        np.testing.assert_allclose(scores.win_pct, tiny_state.pre_wins / 8)

    def test_reference_percentage(self):
        """33 vitórias em 64 jogos."""
        teams = [
            Team(id=i, name=f"T{i}", pre_wins=33 - i, pre_home_games=33, pre_away_games=31,
                 home_target=4, away_target=4)
            for i in range(2)
        ]
        games = [
            Game(id=g, host=g % 2, guest=1 - g % 2, match_index=g // 2 + 1, win_prob=0.5)
            for g in range(18)
        ]
        state = LeagueState(teams=teams, remaining_games=games, full_season_length=82, short_season_length=72)
        assert SimulationService.status_quo_scores(state).win_pct[0] == pytest.approx(0.515625)

    def test_unplayed_team_is_degenerate(self):
        fresh = [
            Team(id=i, name=f"N{i}", pre_wins=0, pre_home_games=0, pre_away_games=0, home_target=1, away_target=1)
            for i in range(2)
        ]
        games = [
            Game(id=0, host=0, guest=1, win_prob=0.5),
            Game(id=1, host=1, guest=0, win_prob=0.5),
        ]
        state = LeagueState(teams=fresh, remaining_games=games, full_season_length=2, short_season_length=2)
        with pytest.raises(DegenerateInstanceError) as exc:
            SimulationService.status_quo_scores(state)
        assert exc.value.context["teams"] == [0, 1]


class TestAgreement:
    """Concordância de grupos entre classificações."""

    def test_playoff_by_conference(self):
        conferences = ["East", "East", "East", "West", "West", "West"]
        short = ScoreVector(numerators=[6, 5, 1, 6, 2, 5], denominator=10)
        full = ScoreVector(numerators=[6, 1, 5, 6, 5, 2], denominator=10)
        cutoffs = AgreementCutoffs(playoff=2, home_court=1, lottery=2)
        # leste: {0,1} contra {0,2}; oeste: {3,5} contra {3,4}
        assert SimulationService.agreement(short, full, conferences, Category.PLAYOFF, cutoffs) == 50.0
        assert SimulationService.agreement(short, full, conferences, Category.HOME_COURT, cutoffs) == 100.0
        # piores no geral: {2,4} contra {1,5}
        assert SimulationService.agreement(short, full, conferences, Category.LOTTERY, cutoffs) == 0.0

    def test_cutoff_larger_than_conference(self):
        scores = ScoreVector(numerators=[1, 2, 3, 4], denominator=4)
        with pytest.raises(ConfigError):
            SimulationService.agreement(
                scores, scores, ["East", "East", "West", "West"], Category.PLAYOFF, AgreementCutoffs(playoff=3)
            )


class TestSimulate:
    """Avaliação Monte Carlo."""

    def test_report_fields(self, tiny_state: LeagueState):
        config = EvalConfig(replications=2000, base_seed=1, cutoffs=SMALL)
        report = SimulationService.simulate(tiny_state, FIRST, config)
        assert report.replications == 2000
        assert report.max_concordance == 6
        assert 0 <= report.mean_concordance <= 6
        low, high = report.concordance_ci
        assert low <= report.mean_concordance <= high
        assert set(report.agreement) == {"playoff", "home_court", "lottery"}
        assert all(0 <= v <= 100 for v in report.agreement.values())
        assert report.ssd is not None
        assert not report.single_path

    def test_deterministic_across_threads(self, tiny_state: LeagueState):
        """Mesma semente e blocos: relatórios idênticos com 1 ou 3 threads."""
        base = EvalConfig(replications=3000, base_seed=4, cutoffs=SMALL, chunk_size=500)
        one = SimulationService.simulate(tiny_state, FIRST, base.model_copy(update={"threads": 1}))
        three = SimulationService.simulate(tiny_state, FIRST, base.model_copy(update={"threads": 3}))
        assert one.to_dict() == three.to_dict()

    def test_status_quo_label(self, tiny_state: LeagueState):
        report = SimulationService.simulate(tiny_state, None, EvalConfig(replications=200, cutoffs=SMALL))
        assert report.label == STATUS_QUO
        assert report.ssd is None

    def test_keep_replications(self, tiny_state: LeagueState):
        config = EvalConfig(replications=50, cutoffs=SMALL, keep_replications=True)
        report = SimulationService.simulate(tiny_state, FIRST, config)
        frame = report.per_replication
        assert len(frame) == 50
        assert list(frame.columns) == ["replication", "concordance", "playoff", "home_court", "lottery"]
        assert frame["concordance"].mean() == pytest.approx(report.mean_concordance)
        assert "per_replication" not in report.to_dict()

    def test_certain_outcomes_give_fixed_concordance(self, tiny_state: LeagueState):
        """Com p ∈ {0,1} todas as réplicas coincidem."""
        config = EvalConfig(replications=20, cutoffs=SMALL, sim_probs=[1, 0, 1, 0, 1, 0, 1, 0])
        report = SimulationService.simulate(tiny_state, FIRST, config)
        assert report.concordance_std == 0.0

    def test_invalid_evaluator_probabilities(self, tiny_state: LeagueState):
        with pytest.raises(DomainError):
            SimulationService.simulate(
                tiny_state, FIRST, EvalConfig(replications=5, cutoffs=SMALL, sim_probs=[1.2] * 8)
            )
        with pytest.raises(DimensionError):
            SimulationService.simulate(
                tiny_state, FIRST, EvalConfig(replications=5, cutoffs=SMALL, sim_probs=[0.5] * 3)
            )

    def test_infeasible_schedule(self, tiny_state: LeagueState):
        with pytest.raises(FeasibilityError):
            SimulationService.simulate(tiny_state, Schedule(selected=np.ones(8)), EvalConfig(cutoffs=SMALL))

    def test_default_cutoffs_do_not_fit_tiny_league(self, tiny_state: LeagueState):
        with pytest.raises(ConfigError):
            SimulationService.simulate(tiny_state, FIRST, EvalConfig(replications=5))

    def test_compare_uses_common_scenarios(self, tiny_state: LeagueState):
        """Uma política contra ela mesma empata em todas as réplicas."""
        config = EvalConfig(replications=500, cutoffs=SMALL)
        comparison = SimulationService.compare(tiny_state, {"a": FIRST, "b": FIRST, "sq": None}, config)
        assert set(comparison.reports) == {"a", "b", "sq"}
        first = comparison.pairwise[0]
        assert (first.first, first.second) == ("a", "b")
        assert first.tie_rate == 1.0
        assert first.mean_margin_win is None
        assert len(comparison.pairwise) == 3
        for pair in comparison.pairwise:
            assert pair.win_rate + pair.tie_rate + pair.loss_rate == pytest.approx(1.0)

    def test_compare_requires_policy(self, tiny_state: LeagueState):
        with pytest.raises(ConfigError):
            SimulationService.compare(tiny_state, {})

    def test_cross_evaluate(self, tiny_state: LeagueState):
        config = EvalConfig(replications=300, cutoffs=SMALL)
        table = SimulationService.cross_evaluate(
            tiny_state,
            {"first": FIRST, "sq": None},
            {"own": tiny_state.win_prob, "flat": [0.5] * 8},
            config,
        )
        assert list(table.index) == ["first", "sq"]
        assert list(table.columns) == ["own", "flat"]
        own = SimulationService.simulate(tiny_state, FIRST, config, label="first")
        assert table.loc["first", "own"] == pytest.approx(own.mean_concordance)

    @pytest.mark.slow
    def test_optimized_schedule_on_full_league(self, league30: LeagueState):
        """PW-FW e guloso avaliados sob os mesmos cenários."""
        model = ObjectiveService.build_model(league30)
        optimized = FrankWolfeService.solve(model).best_atom
        greedy = SimulationService.greedy_schedule(league30)
        comparison = SimulationService.compare(
            league30, {"pw": optimized, "greedy": greedy}, EvalConfig(replications=2000, base_seed=3)
        )
        assert comparison.reports["pw"].max_concordance == 435
        assert 0 < comparison.reports["pw"].mean_concordance <= 435
        assert league30.is_feasible(greedy.selected)

    @pytest.mark.slow
    def test_pw_beats_greedy_across_leagues(self):
        """Em 50 ligas de 30 times com m = 66, PW-FW supera o guloso em pelo menos 90% delas.

        Na média do lote vale PW ≥ guloso ≥ Status Quo.
        """
        means = {"pw": [], "greedy": [], STATUS_QUO: []}
        for seed in range(50):
            state = SyntheticLeagueService.league(
                teams=30, remaining_games=270, short_season_length=66, full_season_length=82, seed=seed
            )
            schedules = {
                "pw": FrankWolfeService.solve(ObjectiveService.build_model(state)).best_atom,
                "greedy": SimulationService.greedy_schedule(state),
                STATUS_QUO: None,
            }
            comparison = SimulationService.compare(
                state, schedules, EvalConfig(replications=1000, base_seed=seed)
            )
            for label in means:
                means[label].append(comparison.reports[label].mean_concordance)

        pw, greedy, status_quo = (np.array(means[k]) for k in ("pw", "greedy", STATUS_QUO))
        assert np.mean(pw > greedy) >= 0.9
        assert pw.mean() >= greedy.mean() >= status_quo.mean()

    @pytest.mark.slow
    def test_sos_lowers_schedule_strength_deviation(self):
        """PW-SoS(ε = 0.02) respeita ε ou reporta a violação, e reduz o SSD médio do PW-FW."""
        epsilon = 0.02
        ssd = {"fw": [], "sos": []}
        for seed in range(20):
            state = SyntheticLeagueService.league(seed=100 + seed)
            model = ObjectiveService.build_model(state)
            plain = FrankWolfeService.solve(model).best_atom
            sos = FrankWolfeService.solve_sos(model, FwConfig(sos_epsilon=epsilon))
            constraints = StrengthService.sos_constraints(state)
            excess = float(np.max(constraints.excess(sos.best_atom.vector)))
            assert excess - epsilon <= sos.sos_violation + 1e-6
            ssd["fw"].append(StrengthService.strength_of_schedule(state, plain).ssd)
            ssd["sos"].append(StrengthService.strength_of_schedule(state, sos.best_atom).ssd)
        assert np.mean(ssd["sos"]) <= np.mean(ssd["fw"])


class TestBacktest:
    def test_single_path_report(self, tiny_state: LeagueState):
        actual = Scenario(outcomes=[1, 0, 1, 1, 0, 0, 1, 0])
        report = SimulationService.backtest(tiny_state, FIRST, actual, SMALL)
        assert report.single_path
        assert report.replications == 1
        assert report.concordance_ci is None
        assert report.mean_concordance == int(report.mean_concordance)

    def test_matches_simulation_with_certain_outcomes(self, tiny_state: LeagueState):
        outcomes = [1, 0, 1, 1, 0, 0, 1, 0]
        backtest = SimulationService.backtest(tiny_state, FIRST, Scenario(outcomes=outcomes), SMALL)
        simulated = SimulationService.simulate(
            tiny_state, FIRST, EvalConfig(replications=3, cutoffs=SMALL, sim_probs=outcomes)
        )
        assert backtest.mean_concordance == simulated.mean_concordance
        assert backtest.agreement == simulated.agreement

    def test_rejects_fractional_outcomes(self, tiny_state: LeagueState):
        with pytest.raises(DomainError):
            SimulationService.backtest(tiny_state, FIRST, Scenario(outcomes=[0.5] * 8), SMALL)

    def test_rejects_wrong_length(self, tiny_state: LeagueState):
        with pytest.raises(DimensionError):
            SimulationService.backtest(tiny_state, FIRST, Scenario(outcomes=[1, 0]), SMALL)


class TestDiagnostics:
    def test_variance_and_sharpness(self, tiny_state: LeagueState):
        diagnostics = SimulationService.variance_sharpness_diagnostics(tiny_state, FIRST)
        p = tiny_state.win_prob
        assert diagnostics.selected_games == 4
        assert diagnostics.coefficient == pytest.approx(2 * (1 - 20 / 12) * 4 / 100)
        assert diagnostics.coefficient < 0
        assert diagnostics.mean_variance["selected"] == pytest.approx(np.mean((p * (1 - p))[:4]))
        assert diagnostics.mean_sharpness["excluded"] == pytest.approx(np.mean(np.maximum(p, 1 - p)[4:]))

    def test_empty_group(self, tiny_state: LeagueState):
        """Com m = m̂ todos os jogos entram e o grupo dos excluídos fica vazio."""
        everything = LeagueState(
            teams=[t.model_copy(update={"home_target": 2, "away_target": 2}) for t in tiny_state.teams],
            remaining_games=tiny_state.remaining_games,
            full_season_length=12,
            short_season_length=12,
        )
        diagnostics = SimulationService.variance_sharpness_diagnostics(everything, Schedule(selected=np.ones(8)))
        assert diagnostics.selected_games == 8
        assert diagnostics.mean_variance["excluded"] is None
        assert diagnostics.mean_sharpness["all"] == pytest.approx(diagnostics.mean_sharpness["selected"])

    def test_rejects_infeasible_schedule(self, tiny_state: LeagueState):
        with pytest.raises(FeasibilityError):
            SimulationService.variance_sharpness_diagnostics(tiny_state, Schedule(selected=np.ones(8)))


class TestConference:
    def test_enum_values(self):
        assert Conference("East") is Conference.EAST
