"""Testes de leitura e escrita dos CSVs da liga."""
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from app.core.config import settings
from app.core.exceptions import ConfigError, IngestError
from app.models.league import LeagueState
from app.models.season import Schedule
from app.services.ingest_service import IngestService
from app.services.synthetic_service import SyntheticLeagueService


def _edit(path: Path, row: int, column: str, value) -> None:
    frame = pd.read_csv(path)
    frame[column] = frame[column].astype(object)
    frame.loc[row, column] = value
    frame.to_csv(path, index=False)


class TestLoadState:
    """Montagem do LeagueState a partir de teams.csv e remaining.csv."""

    def test_emitted_files_reload_the_same_league(self, tiny_state: LeagueState, tiny_files: dict[str, Path]):
        state = IngestService.load_state(
            tiny_files["teams"], tiny_files["remaining"], short_season_length=10,
            full_season_length=12, targets_path=tiny_files["targets"],
        )
        assert state.model_dump() == tiny_state.model_dump()

    def test_automatic_targets_and_inferred_full_length(self, tiny_state: LeagueState, tiny_files: dict[str, Path]):
        """Metas m/2 - jogos disputados em cada mando; m̂ inferido."""
        state = IngestService.load_state(tiny_files["teams"], tiny_files["remaining"], short_season_length=10)
        assert state.m_hat == 12
        np.testing.assert_array_equal(state.home_target, [1, 1, 1, 1])
        assert state.model_dump() == tiny_state.model_dump()

    def test_odd_short_season_needs_explicit_targets(self, tiny_files: dict[str, Path]):
        with pytest.raises(ConfigError):
            IngestService.load_state(tiny_files["teams"], tiny_files["remaining"], short_season_length=9)

    def test_explicit_probability_vector(self, tiny_files: dict[str, Path]):
        state = IngestService.load_state(
            tiny_files["teams"], tiny_files["remaining"], short_season_length=10, probabilities=[0.5] * 8
        )
        np.testing.assert_array_equal(state.win_prob, np.full(8, 0.5))

    def test_probs_file_overrides_column(self, tmp_path: Path, tiny_files: dict[str, Path]):
        probs = IngestService.write_probabilities(np.linspace(0.2, 0.8, 8), range(8), tmp_path / "probs.csv")
        state = IngestService.load_state(
            tiny_files["teams"], tiny_files["remaining"], short_season_length=10, probs_path=probs
        )
        np.testing.assert_allclose(state.win_prob, np.linspace(0.2, 0.8, 8))

    def test_duplicate_team_id(self, tiny_files: dict[str, Path]):
        _edit(tiny_files["teams"], 2, "team_id", 1)
        with pytest.raises(IngestError) as exc:
            IngestService.load_state(tiny_files["teams"], tiny_files["remaining"], short_season_length=10)
        assert exc.value.file == "teams.csv"
        assert exc.value.row is not None

    def test_unknown_team_in_game(self, tiny_files: dict[str, Path]):
        _edit(tiny_files["remaining"], 0, "host_id", 9)
        with pytest.raises(IngestError) as exc:
            IngestService.load_state(tiny_files["teams"], tiny_files["remaining"], short_season_length=10)
        assert exc.value.row == 2
        assert "remaining.csv" in str(exc.value)

    def test_non_integer_value(self, tiny_files: dict[str, Path]):
        _edit(tiny_files["teams"], 1, "pre_wins", "many")
        with pytest.raises(IngestError) as exc:
            IngestService.load_state(tiny_files["teams"], tiny_files["remaining"], short_season_length=10)
        assert exc.value.row == 3

    def test_missing_column(self, tiny_files: dict[str, Path]):
        frame = pd.read_csv(tiny_files["teams"]).drop(columns=["pre_wins"])
        frame.to_csv(tiny_files["teams"], index=False)
        with pytest.raises(IngestError):
            IngestService.load_state(tiny_files["teams"], tiny_files["remaining"], short_season_length=10)

    def test_missing_file(self, tmp_path: Path, tiny_files: dict[str, Path]):
        with pytest.raises(IngestError):
            IngestService.load_state(tmp_path / "nope.csv", tiny_files["remaining"], short_season_length=10)

    def test_probability_outside_open_interval(self, tiny_files: dict[str, Path]):
        _edit(tiny_files["remaining"], 3, "prob", 1.2)
        with pytest.raises(IngestError) as exc:
            IngestService.load_state(tiny_files["teams"], tiny_files["remaining"], short_season_length=10)
        assert exc.value.row == 5

    def test_probability_clamp(self, tiny_files: dict[str, Path]):
        _edit(tiny_files["remaining"], 3, "prob", 1.2)
        state = IngestService.load_state(
            tiny_files["teams"], tiny_files["remaining"], short_season_length=10, clamp=True
        )
        assert state.win_prob[3] == pytest.approx(1.0 - settings.PROB_EPSILON)

    def test_negative_target(self, tiny_files: dict[str, Path]):
        """Time que já jogou mais em casa do que m/2."""
        _edit(tiny_files["teams"], 0, "pre_home_played", 6)
        with pytest.raises(IngestError) as exc:
            IngestService.load_state(tiny_files["teams"], tiny_files["remaining"], short_season_length=10)
        assert exc.value.context["team"] == 0

    def test_inconsistent_league(self, tiny_files: dict[str, Path]):
        """m̂ explícito que não fecha com jogos disputados e restantes."""
        with pytest.raises(IngestError):
            IngestService.load_state(
                tiny_files["teams"], tiny_files["remaining"], short_season_length=10, full_season_length=14
            )


class TestAuxiliaryFiles:
    """Probabilidades, resultados, calendários e atributos."""

    def test_probabilities_must_cover_all_games(self, tmp_path: Path):
        path = IngestService.write_probabilities([0.4, 0.6], [0, 2], tmp_path / "probs.csv")
        with pytest.raises(IngestError):
            IngestService.load_probabilities(path, n_games=3)

    def test_outcomes(self, tmp_path: Path):
        path = tmp_path / "outcomes.csv"
        pd.DataFrame({"game_id": [1, 0, 2], "host_won": [0, 1, 1]}).to_csv(path, index=False)
        scenario = IngestService.load_outcomes(path, n_games=3)
        np.testing.assert_array_equal(scenario.outcomes, [1.0, 0.0, 1.0])
        assert scenario.is_binary

    def test_outcomes_must_be_binary(self, tmp_path: Path):
        path = tmp_path / "outcomes.csv"
        pd.DataFrame({"game_id": [0, 1], "host_won": [1, 2]}).to_csv(path, index=False)
        with pytest.raises(IngestError) as exc:
            IngestService.load_outcomes(path, n_games=2)
        assert exc.value.row == 3

    def test_schedule_file(self, tmp_path: Path):
        schedule = Schedule(selected=[1, 0, 0, 1, 1])
        path = IngestService.write_schedule(schedule, tmp_path / "schedule.csv")
        assert pd.read_csv(path).columns.tolist() == ["game_id", "selected"]
        assert IngestService.load_schedule(path, n_games=5).same_selection(schedule)
        with pytest.raises(IngestError):
            IngestService.load_schedule(path, n_games=6)

    def test_feature_file(self, tmp_path: Path):
        data = SyntheticLeagueService.feature_dataset(rows=20, features=3, seed=2)
        path = IngestService.write_features(data, tmp_path / "features.csv")
        loaded = IngestService.load_features(path, require_labels=True)
        assert loaded.feature_names == ["f1", "f2", "f3"]
        np.testing.assert_array_equal(loaded.labels, data.labels)
        np.testing.assert_array_equal(loaded.rows, data.rows)

    def test_features_without_labels(self, tmp_path: Path):
        data = SyntheticLeagueService.feature_dataset(rows=5, features=2, labelled=False)
        path = IngestService.write_features(data, tmp_path / "upcoming.csv")
        assert IngestService.load_features(path).labels is None
        with pytest.raises(IngestError):
            IngestService.load_features(path, require_labels=True)

    def test_feature_label_must_be_binary(self, tmp_path: Path):
        path = tmp_path / "features.csv"
        pd.DataFrame({"game_id": [0, 1], "label": [1, 3], "f1": [0.2, 0.4]}).to_csv(path, index=False)
        with pytest.raises(IngestError) as exc:
            IngestService.load_features(path)
        assert exc.value.row == 3
