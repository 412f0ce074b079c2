"""Leitura e escrita dos arquivos CSV da liga, probabilidades, resultados e atributos."""
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import ConfigError, DataError, IngestError
from app.models.league import Game, LeagueState, Team
from app.models.season import Scenario, Schedule
from app.schemas.predictor import FeatureDataset

PathLike = Union[str, Path]

TEAM_COLUMNS = ["team_id", "name", "conference", "division", "pre_wins", "pre_home_played", "pre_away_played"]
GAME_COLUMNS = ["game_id", "day", "host_id", "guest_id", "match_index"]
TARGET_COLUMNS = ["team_id", "home_target", "away_target"]
FLOAT_FORMAT = "%.17g"
# Linha 1 do CSV é o cabeçalho
ROW_OFFSET = 2


class IngestService:
    """Conversão entre arquivos CSV e os modelos de domínio."""

    @staticmethod
    def read_table(
        path: PathLike,
        required: Sequence[str],
        integer: Sequence[str] = (),
        real: Sequence[str] = ()
    ) -> pd.DataFrame:
        """Lê um CSV validando colunas obrigatórias e tipos numéricos.

        Raises:
            IngestError: arquivo ausente, coluna faltando ou valor inválido (com a linha)
        """
        name = Path(path).name
        try:
            frame = pd.read_csv(path)
        except FileNotFoundError:
            raise IngestError("Arquivo não encontrado", file=str(path))
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            raise IngestError(f"CSV ilegível: {e}", file=name)

        missing = [c for c in required if c not in frame.columns]
        if missing:
            raise IngestError(f"Colunas ausentes: {missing}", file=name)

        for column in list(integer) + list(real):
            values = pd.to_numeric(frame[column], errors="coerce")
            bad = values.isna()
            if column in integer:
                bad |= values.notna() & (values != values.round())
            if bad.any():
                row = int(np.flatnonzero(bad.to_numpy())[0]) + ROW_OFFSET
                raise IngestError(
                    f"Valor inválido na coluna '{column}': {frame[column].iloc[row - ROW_OFFSET]!r}",
                    file=name, row=row,
                )
            frame[column] = values.astype(np.int64 if column in integer else float)
        frame.insert(0, "source_row", np.arange(len(frame)) + ROW_OFFSET)
        return frame

    @staticmethod
    def load_state(
        teams_path: PathLike,
        remaining_path: PathLike,
        short_season_length: int,
        full_season_length: Optional[int] = None,
        targets_path: Optional[PathLike] = None,
        probs_path: Optional[PathLike] = None,
        probabilities: Optional[Sequence[float]] = None,
        clamp: bool = False
    ) -> LeagueState:
        """Monta e valida o LeagueState a partir dos CSVs.

        Sem `targets_path`, as metas são m/2 - jogos disputados em casa (e fora).
        As probabilidades vêm de `probabilities`, de `probs_path` ou da coluna
        `prob` de remaining.csv, nessa ordem. m̂ é inferido quando omitido.

        Args:
            teams_path: teams.csv
            remaining_path: remaining.csv
            short_season_length: m
            full_season_length: m̂ (opcional)
            targets_path: Metas explícitas (team_id, home_target, away_target)
            probs_path: probs.csv (game_id, prob)
            probabilities: Vetor de probabilidades já calculado
            clamp: Corta probabilidades fora de (0,1) para [ε, 1-ε] em vez de rejeitar

        Returns:
            LeagueState validado

        Raises:
            IngestError: esquema, referência ou meta inválida
            ConfigError: m ímpar sem metas explícitas
        """
        teams = IngestService.read_table(
            teams_path, TEAM_COLUMNS,
            integer=["team_id", "pre_wins", "pre_home_played", "pre_away_played"],
        )
        teams = teams.sort_values("team_id", kind="stable").reset_index(drop=True)
        _check_ids(teams, "team_id", teams_path)
        n = len(teams)

        games = IngestService.read_table(
            remaining_path, GAME_COLUMNS,
            integer=["game_id", "day", "host_id", "guest_id", "match_index"],
            real=["prob"] if "prob" in _header(remaining_path) else [],
        )
        games = games.sort_values("game_id", kind="stable").reset_index(drop=True)
        _check_ids(games, "game_id", remaining_path)
        for column in ("host_id", "guest_id"):
            unknown = (games[column] < 0) | (games[column] >= n)
            if unknown.any():
                k = int(np.flatnonzero(unknown.to_numpy())[0])
                raise IngestError(
                    f"{column} referencia time inexistente ({games[column].iloc[k]})",
                    file=Path(remaining_path).name, row=int(games["source_row"].iloc[k]),
                )

        probs = _resolve_probabilities(games, remaining_path, probs_path, probabilities, clamp)
        home_target, away_target = _resolve_targets(teams, teams_path, short_season_length, targets_path)

        if full_season_length is None:
            remaining = np.bincount(games["host_id"], minlength=n) + np.bincount(games["guest_id"], minlength=n)
            played = teams["pre_home_played"].to_numpy() + teams["pre_away_played"].to_numpy()
            full_season_length = int(played[0] + remaining[0])

        try:
            team_models = [
                Team(
                    id=int(row.team_id),
                    name=str(row.name),
                    conference=str(row.conference),
                    division="" if pd.isna(row.division) else str(row.division),
                    pre_wins=int(row.pre_wins),
                    pre_home_games=int(row.pre_home_played),
                    pre_away_games=int(row.pre_away_played),
                    home_target=int(home_target[i]),
                    away_target=int(away_target[i]),
                )
                for i, row in enumerate(teams.itertuples(index=False))
            ]
        except ValidationError as e:
            raise IngestError(f"Time inválido: {_first_error(e)}", file=Path(teams_path).name)

        game_models = []
        for k, row in enumerate(games.itertuples(index=False)):
            try:
                game_models.append(Game(
                    id=int(row.game_id),
                    host=int(row.host_id),
                    guest=int(row.guest_id),
                    match_index=int(row.match_index),
                    day=int(row.day),
                    win_prob=float(probs[k]),
                ))
            except ValidationError as e:
                raise IngestError(
                    f"Jogo inválido: {_first_error(e)}",
                    file=Path(remaining_path).name, row=int(row.source_row),
                )

        try:
            state = LeagueState(
                teams=team_models,
                remaining_games=game_models,
                full_season_length=full_season_length,
                short_season_length=short_season_length,
            )
        except ValidationError as e:
            raise IngestError(f"Liga inconsistente: {_first_error(e)}", file=Path(teams_path).name)
        logger.info(
            f"Liga carregada: {state.n_teams} times, {state.n_games} jogos restantes, "
            f"m={state.m}, m̂={state.m_hat}"
        )
        return state

    @staticmethod
    def emit_state(state: LeagueState, directory: PathLike) -> dict[str, Path]:
        """Escreve teams.csv, remaining.csv (com prob) e targets.csv.

        `load_state(..., targets_path=targets.csv)` reconstrói a mesma liga.
        """
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"teams": out / "teams.csv", "remaining": out / "remaining.csv", "targets": out / "targets.csv"}
        pd.DataFrame({
            "team_id": [t.id for t in state.teams],
            "name": [t.name for t in state.teams],
            "conference": [t.conference.value for t in state.teams],
            "division": [t.division for t in state.teams],
            "pre_wins": [t.pre_wins for t in state.teams],
            "pre_home_played": [t.pre_home_games for t in state.teams],
            "pre_away_played": [t.pre_away_games for t in state.teams],
        }).to_csv(paths["teams"], index=False)
        pd.DataFrame({
            "game_id": [g.id for g in state.remaining_games],
            "day": [g.day for g in state.remaining_games],
            "host_id": [g.host for g in state.remaining_games],
            "guest_id": [g.guest for g in state.remaining_games],
            "match_index": [g.match_index for g in state.remaining_games],
            "prob": [g.win_prob for g in state.remaining_games],
        }).to_csv(paths["remaining"], index=False, float_format=FLOAT_FORMAT)
        pd.DataFrame({
            "team_id": [t.id for t in state.teams],
            "home_target": [t.home_target for t in state.teams],
            "away_target": [t.away_target for t in state.teams],
        }).to_csv(paths["targets"], index=False)
        return paths

    @staticmethod
    def load_probabilities(path: PathLike, n_games: int, clamp: bool = False) -> np.ndarray:
        """probs.csv (game_id, prob) cobrindo exatamente os jogos 0..|G|-1."""
        frame = IngestService.read_table(path, ["game_id", "prob"], integer=["game_id"], real=["prob"])
        frame = frame.sort_values("game_id", kind="stable").reset_index(drop=True)
        _check_ids(frame, "game_id", path, expected=n_games)
        return _check_probabilities(frame["prob"].to_numpy(), frame, path, clamp)

    @staticmethod
    def write_probabilities(probs: Sequence[float], game_ids: Sequence[int], path: PathLike) -> Path:
        path = Path(path)
        pd.DataFrame({"game_id": np.asarray(game_ids), "prob": np.asarray(probs, dtype=float)}).to_csv(
            path, index=False, float_format=FLOAT_FORMAT
        )
        return path

    @staticmethod
    def load_outcomes(path: PathLike, n_games: int) -> Scenario:
        """outcomes.csv (game_id, host_won) com resultados 0/1 realizados."""
        frame = IngestService.read_table(path, ["game_id", "host_won"], integer=["game_id", "host_won"])
        frame = frame.sort_values("game_id", kind="stable").reset_index(drop=True)
        _check_ids(frame, "game_id", path, expected=n_games)
        bad = ~frame["host_won"].isin([0, 1])
        if bad.any():
            k = int(np.flatnonzero(bad.to_numpy())[0])
            raise IngestError(
                "host_won deve ser 0 ou 1", file=Path(path).name,
                row=int(frame["source_row"].iloc[k]),
            )
        return Scenario(outcomes=frame["host_won"].to_numpy(dtype=float))

    @staticmethod
    def load_features(path: PathLike, require_labels: bool = False) -> FeatureDataset:
        """CSV de atributos: game_id, label opcional e as demais colunas como atributos.

        Raises:
            IngestError: rótulo ausente quando exigido, rótulo não binário ou atributo inválido
        """
        header = _header(path)
        has_label = "label" in header
        if require_labels and not has_label:
            raise IngestError("Coluna 'label' obrigatória para treino", file=Path(path).name)
        feature_names = [c for c in header if c not in ("game_id", "label")]
        if not feature_names:
            raise IngestError("Nenhuma coluna de atributo", file=Path(path).name)
        frame = IngestService.read_table(
            path, ["game_id"] + feature_names,
            integer=["game_id"] + (["label"] if has_label else []),
            real=feature_names,
        )
        if has_label and not frame["label"].isin([0, 1]).all():
            k = int(np.flatnonzero(~frame["label"].isin([0, 1]).to_numpy())[0])
            raise IngestError("label deve ser 0 ou 1", file=Path(path).name, row=k + ROW_OFFSET)
        if frame["game_id"].duplicated().any():
            k = int(np.flatnonzero(frame["game_id"].duplicated().to_numpy())[0])
            raise IngestError("game_id duplicado", file=Path(path).name, row=k + ROW_OFFSET)
        try:
            return FeatureDataset(
                rows=frame[feature_names].to_numpy(dtype=float),
                labels=frame["label"].to_numpy() if has_label else None,
                game_ids=frame["game_id"].to_numpy(),
                feature_names=feature_names,
            )
        except DataError as e:
            raise IngestError(e.message, file=Path(path).name)

    @staticmethod
    def write_features(data: FeatureDataset, path: PathLike) -> Path:
        path = Path(path)
        frame = pd.DataFrame(data.rows, columns=data.feature_names)
        if data.labels is not None:
            frame.insert(0, "label", data.labels)
        frame.insert(0, "game_id", data.game_ids)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
        return path

    @staticmethod
    def write_schedule(schedule: Schedule, path: PathLike) -> Path:
        """schedule.csv com game_id e selected (0/1)."""
        path = Path(path)
        pd.DataFrame({
            "game_id": np.arange(len(schedule)),
            "selected": schedule.selected.astype(np.int64),
        }).to_csv(path, index=False)
        return path

    @staticmethod
    def load_schedule(path: PathLike, n_games: int) -> Schedule:
        frame = IngestService.read_table(path, ["game_id", "selected"], integer=["game_id", "selected"])
        frame = frame.sort_values("game_id", kind="stable").reset_index(drop=True)
        _check_ids(frame, "game_id", path, expected=n_games)
        if not frame["selected"].isin([0, 1]).all():
            raise IngestError("selected deve ser 0 ou 1", file=Path(path).name)
        return Schedule(selected=frame["selected"].to_numpy(dtype=float))


def _check_ids(frame: pd.DataFrame, column: str, path: PathLike, expected: Optional[int] = None) -> None:
    """Exige ids únicos e contíguos 0..k-1 (k = `expected` quando informado)."""
    name = Path(path).name
    duplicated = frame[column].duplicated()
    if duplicated.any():
        k = int(np.flatnonzero(duplicated.to_numpy())[0])
        raise IngestError(
            f"{column} duplicado ({frame[column].iloc[k]})",
            file=name, row=int(frame["source_row"].iloc[k]),
        )
    count = len(frame) if expected is None else expected
    if frame[column].tolist() != list(range(count)):
        raise IngestError(f"{column} deve cobrir 0..{count - 1} sem lacunas", file=name)


def _resolve_probabilities(
    games: pd.DataFrame,
    remaining_path: PathLike,
    probs_path: Optional[PathLike],
    probabilities: Optional[Sequence[float]],
    clamp: bool
) -> np.ndarray:
    if probabilities is not None:
        probs = np.asarray(probabilities, dtype=float)
        if probs.shape != (len(games),):
            raise IngestError(f"{probs.shape[0]} probabilidades para {len(games)} jogos")
        return _check_probabilities(probs, games, remaining_path, clamp)
    if probs_path is not None:
        return IngestService.load_probabilities(probs_path, len(games), clamp)
    if "prob" in games.columns:
        return _check_probabilities(games["prob"].to_numpy(), games, remaining_path, clamp)
    raise IngestError(
        "Sem probabilidades: informe probs.csv ou a coluna 'prob'", file=Path(remaining_path).name
    )


def _check_probabilities(probs: np.ndarray, frame: pd.DataFrame, path: PathLike, clamp: bool) -> np.ndarray:
    outside = (probs <= 0.0) | (probs >= 1.0)
    if not outside.any():
        return probs
    if clamp:
        eps = settings.PROB_EPSILON
        logger.warning(f"{int(outside.sum())} probabilidade(s) cortada(s) para [{eps}, {1 - eps}]")
        return np.clip(probs, eps, 1.0 - eps)
    k = int(np.flatnonzero(outside)[0])
    raise IngestError(
        f"Probabilidade fora de (0,1): {probs[k]}",
        file=Path(path).name, row=int(frame["source_row"].iloc[k]),
    )


def _resolve_targets(
    teams: pd.DataFrame,
    teams_path: PathLike,
    m: int,
    targets_path: Optional[PathLike]
) -> tuple[np.ndarray, np.ndarray]:
    if targets_path is not None:
        targets = IngestService.read_table(
            targets_path, TARGET_COLUMNS, integer=TARGET_COLUMNS
        ).sort_values("team_id", kind="stable").reset_index(drop=True)
        _check_ids(targets, "team_id", targets_path, expected=len(teams))
        home = targets["home_target"].to_numpy()
        away = targets["away_target"].to_numpy()
        negative = (home < 0) | (away < 0)
        rows = targets["source_row"].to_numpy()
        name = Path(targets_path).name
    else:
        if m % 2:
            raise ConfigError(f"m={m} ímpar: metas automáticas exigem m par (ou informe as metas)")
        home = m // 2 - teams["pre_home_played"].to_numpy()
        away = m // 2 - teams["pre_away_played"].to_numpy()
        negative = (home < 0) | (away < 0)
        rows = teams["source_row"].to_numpy()
        name = Path(teams_path).name
    if negative.any():
        k = int(np.flatnonzero(negative)[0])
        raise IngestError(
            f"Meta negativa para o time {k}: mandante {home[k]}, visitante {away[k]}",
            file=name, row=int(rows[k]), team=k,
        )
    return home, away


def _first_error(error: ValidationError) -> str:
    first = error.errors()[0]
    return str(first.get("msg", error))


def _header(path: PathLike) -> list[str]:
    try:
        return list(pd.read_csv(path, nrows=0).columns)
    except FileNotFoundError:
        raise IngestError("Arquivo não encontrado", file=str(path))
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise IngestError(f"CSV ilegível: {e}", file=Path(path).name)
