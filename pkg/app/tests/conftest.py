"""Configurações e fixtures para testes."""
from pathlib import Path
from typing import AsyncGenerator

import pytest
import pytest_asyncio
from httpx import AsyncClient

from app.main import app
from app.models.league import Conference, Game, LeagueState, Team
from app.models.season import Ranking
from app.services.ingest_service import IngestService
from app.services.objective_service import ObjectiveService, PwObjectiveModel
from app.services.synthetic_service import SyntheticLeagueService


@pytest.fixture
def tiny_state() -> LeagueState:
    """4 times, 8 jogos restantes e exatamente dois calendários viáveis."""
    return SyntheticLeagueService.tiny_league(seed=0)


@pytest.fixture
def tiny_model(tiny_state: LeagueState) -> PwObjectiveModel:
    return ObjectiveService.build_model(tiny_state)


@pytest.fixture
def greedy_state() -> LeagueState:
    """Liga em que o guloso por data não cumpre as metas.

    Jogos: A recebe D (dia 1), B recebe D (dia 2), A recebe C (dia 3) e
    C recebe B (dia 4). O guloso fica só com o primeiro; o único calendário
    viável usa o segundo e o terceiro.
    """
    records = [
        ("A", Conference.EAST, 6, 1, 0),
        ("B", Conference.EAST, 5, 1, 0),
        ("C", Conference.WEST, 4, 0, 1),
        ("D", Conference.WEST, 3, 0, 1),
    ]
    teams = [
        Team(
            id=i, name=name, conference=conference, pre_wins=wins,
            pre_home_games=5, pre_away_games=4, home_target=home, away_target=away,
        )
        for i, (name, conference, wins, home, away) in enumerate(records)
    ]
    games = [
        Game(id=0, host=0, guest=3, day=1, win_prob=0.6),
        Game(id=1, host=1, guest=3, day=2, win_prob=0.55),
        Game(id=2, host=0, guest=2, day=3, win_prob=0.7),
        Game(id=3, host=2, guest=1, day=4, win_prob=0.45),
    ]
    return LeagueState(teams=teams, remaining_games=games, full_season_length=11, short_season_length=10)


@pytest.fixture(scope="session")
def league30() -> LeagueState:
    """Liga sintética no tamanho da NBA de 2019-20."""
    return SyntheticLeagueService.league(teams=30, remaining_games=259, short_season_length=70, seed=7)


@pytest.fixture
def table_rankings() -> dict[str, Ranking]:
    """Temporada completa r̂ e duas temporadas reduzidas r¹ e r²."""
    return {
        "full": Ranking(rank=[1, 2, 3, 4]),
        "first": Ranking(rank=[1, 4, 2, 3]),
        "second": Ranking(rank=[4, 1, 3, 2]),
    }


@pytest.fixture
def tiny_files(tmp_path: Path, tiny_state: LeagueState) -> dict[str, Path]:
    """CSVs da liga pequena gravados em um diretório temporário."""
    return IngestService.emit_state(tiny_state, tmp_path / "league")


@pytest_asyncio.fixture
async def client() -> AsyncGenerator[AsyncClient, None]:
    """Cliente HTTP para testes."""
    async with AsyncClient(app=app, base_url="http://test") as client:
        yield client
