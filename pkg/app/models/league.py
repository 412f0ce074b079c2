"""Modelos de domínio da liga suspensa: times, jogos restantes e estado da liga."""
from enum import Enum
from typing import Any, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

from app.core.exceptions import DimensionError, FeasibilityError


class Conference(str, Enum):
    """Conferência do time."""
    EAST = "East"
    WEST = "West"


class Team(BaseModel):
    """Time com o retrospecto anterior à suspensão e as metas do calendário reduzido."""
    model_config = ConfigDict(frozen=True)

    id: int = Field(ge=0)
    name: str
    conference: Conference = Conference.EAST
    division: str = ""
    pre_wins: int = Field(ge=0)
    pre_home_games: int = Field(ge=0)
    pre_away_games: int = Field(ge=0)
    home_target: int = Field(ge=0)
    away_target: int = Field(ge=0)

    @property
    def pre_games(self) -> int:
        """Jogos disputados antes da suspensão (m⁰_i)."""
        return self.pre_home_games + self.pre_away_games

    @property
    def pre_win_pct(self) -> float:
        """Aproveitamento na data da suspensão (0 se o time não jogou)."""
        if self.pre_games == 0:
            return 0.0
        return self.pre_wins / self.pre_games

    @model_validator(mode="after")
    def check_record(self) -> "Team":
        """Valida que as vitórias não excedem os jogos disputados."""
        if self.pre_wins > self.pre_games:
            raise ValueError(
                f"Time {self.id}: vitórias ({self.pre_wins}) maiores que jogos ({self.pre_games})"
            )
        return self


class Game(BaseModel):
    """Jogo restante g = (mandante, visitante, índice do confronto)."""
    model_config = ConfigDict(frozen=True)

    id: int = Field(ge=0)
    host: int = Field(ge=0)
    guest: int = Field(ge=0)
    match_index: int = Field(default=1, ge=1)
    day: int = 0
    win_prob: float = Field(gt=0.0, lt=1.0, description="Probabilidade de vitória do mandante")

    @model_validator(mode="after")
    def check_teams(self) -> "Game":
        """Mandante e visitante devem ser diferentes."""
        if self.host == self.guest:
            raise ValueError(f"Jogo {self.id}: mandante igual ao visitante ({self.host})")
        return self


class LeagueState(BaseModel):
    """Instância do problema: times, jogos restantes e tamanhos de temporada.

    Os índices G^h_i / G^a_i e os vetores numéricos usados pelos solvers são
    derivados uma única vez na construção e ficam disponíveis como arrays numpy
    somente leitura.
    """
    model_config = ConfigDict(frozen=True)

    teams: list[Team]
    remaining_games: list[Game]
    full_season_length: int = Field(ge=1)
    short_season_length: int = Field(ge=0)

    _host: np.ndarray = PrivateAttr()
    _guest: np.ndarray = PrivateAttr()
    _prob: np.ndarray = PrivateAttr()
    _day: np.ndarray = PrivateAttr()
    _pre_wins: np.ndarray = PrivateAttr()
    _pre_games: np.ndarray = PrivateAttr()
    _home_target: np.ndarray = PrivateAttr()
    _away_target: np.ndarray = PrivateAttr()
    _pre_win_pct: np.ndarray = PrivateAttr()
    _conference: np.ndarray = PrivateAttr()
    _home_games: list[np.ndarray] = PrivateAttr()
    _away_games: list[np.ndarray] = PrivateAttr()

    @model_validator(mode="after")
    def check_consistency(self) -> "LeagueState":
        """Valida identificadores, referências e o balanço das metas."""
        n = len(self.teams)
        if n < 2:
            raise ValueError("A liga precisa de pelo menos dois times")
        if [t.id for t in self.teams] != list(range(n)):
            raise ValueError("IDs de times devem ser 0..n-1 em ordem")
        if [g.id for g in self.remaining_games] != list(range(len(self.remaining_games))):
            raise ValueError("IDs de jogos devem ser 0..|G|-1 em ordem")

        m, m_hat = self.short_season_length, self.full_season_length
        if m > m_hat:
            raise ValueError(f"Temporada reduzida ({m}) maior que a completa ({m_hat})")

        home_count = [0] * n
        away_count = [0] * n
        for game in self.remaining_games:
            if game.host >= n or game.guest >= n:
                raise ValueError(f"Jogo {game.id} referencia time inexistente")
            home_count[game.host] += 1
            away_count[game.guest] += 1

        for team in self.teams:
            i = team.id
            if team.home_target > home_count[i]:
                raise ValueError(
                    f"Time {i}: meta de mandante {team.home_target} > {home_count[i]} jogos restantes"
                )
            if team.away_target > away_count[i]:
                raise ValueError(
                    f"Time {i}: meta de visitante {team.away_target} > {away_count[i]} jogos restantes"
                )
            if team.pre_games + team.home_target + team.away_target != m:
                raise ValueError(
                    f"Time {i}: jogos disputados + metas != m ({team.pre_games} + "
                    f"{team.home_target} + {team.away_target} != {m})"
                )
            if team.pre_games + home_count[i] + away_count[i] != m_hat:
                raise ValueError(
                    f"Time {i}: jogos disputados + restantes != m̂ ({team.pre_games} + "
                    f"{home_count[i] + away_count[i]} != {m_hat})"
                )

        if sum(t.home_target for t in self.teams) != sum(t.away_target for t in self.teams):
            raise ValueError("Soma das metas de mandante difere da soma das metas de visitante")
        return self

    def model_post_init(self, __context: Any) -> None:
        games = self.remaining_games
        n = len(self.teams)
        self._host = _frozen(np.array([g.host for g in games], dtype=np.int64))
        self._guest = _frozen(np.array([g.guest for g in games], dtype=np.int64))
        self._prob = _frozen(np.array([g.win_prob for g in games], dtype=float))
        self._day = _frozen(np.array([g.day for g in games], dtype=np.int64))
        self._pre_wins = _frozen(np.array([t.pre_wins for t in self.teams], dtype=np.int64))
        self._pre_games = _frozen(np.array([t.pre_games for t in self.teams], dtype=np.int64))
        self._home_target = _frozen(np.array([t.home_target for t in self.teams], dtype=np.int64))
        self._away_target = _frozen(np.array([t.away_target for t in self.teams], dtype=np.int64))
        self._pre_win_pct = _frozen(np.array([t.pre_win_pct for t in self.teams], dtype=float))
        self._conference = np.array([t.conference.value for t in self.teams])
        self._home_games = [_frozen(np.flatnonzero(self._host == i)) for i in range(n)]
        self._away_games = [_frozen(np.flatnonzero(self._guest == i)) for i in range(n)]

    # Dimensões
    @property
    def n_teams(self) -> int:
        return len(self.teams)

    @property
    def n_games(self) -> int:
        return len(self.remaining_games)

    @property
    def m(self) -> int:
        return self.short_season_length

    @property
    def m_hat(self) -> int:
        return self.full_season_length

    @property
    def alpha(self) -> float:
        """Coeficiente do termo de variância, 1 - 2m/m̂."""
        return 1.0 - 2.0 * self.m / self.m_hat

    @property
    def games_to_select(self) -> int:
        """Número de jogos de qualquer calendário viável (Σ m^h_i)."""
        return int(self._home_target.sum())

    # Vetores derivados
    @property
    def host(self) -> np.ndarray:
        return self._host

    @property
    def guest(self) -> np.ndarray:
        return self._guest

    @property
    def win_prob(self) -> np.ndarray:
        return self._prob

    @property
    def day(self) -> np.ndarray:
        return self._day

    @property
    def pre_wins(self) -> np.ndarray:
        return self._pre_wins

    @property
    def pre_games(self) -> np.ndarray:
        return self._pre_games

    @property
    def home_target(self) -> np.ndarray:
        return self._home_target

    @property
    def away_target(self) -> np.ndarray:
        return self._away_target

    @property
    def pre_win_pct(self) -> np.ndarray:
        return self._pre_win_pct

    @property
    def conferences(self) -> np.ndarray:
        return self._conference

    def home_games(self, team: int) -> np.ndarray:
        """G^h_i: jogos restantes em que o time é mandante."""
        return self._home_games[team]

    def away_games(self, team: int) -> np.ndarray:
        """G^a_i: jogos restantes em que o time é visitante."""
        return self._away_games[team]

    # Viabilidade
    def home_loads(self, x: np.ndarray) -> np.ndarray:
        return np.bincount(self._host, weights=x, minlength=self.n_teams)

    def away_loads(self, x: np.ndarray) -> np.ndarray:
        return np.bincount(self._guest, weights=x, minlength=self.n_teams)

    def check_dimension(self, vector: Sequence[float], what: str = "vetor") -> np.ndarray:
        """Converte para array e valida o comprimento |G|."""
        arr = np.asarray(vector, dtype=float)
        if arr.ndim != 1 or arr.shape[0] != self.n_games:
            raise DimensionError(
                f"{what} com dimensão {arr.shape} incompatível com {self.n_games} jogos",
                expected=self.n_games,
                got=list(arr.shape),
            )
        return arr

    def violated_teams(self, x: np.ndarray, atol: float = 1e-9) -> list[int]:
        """Times cujas metas de mandante ou visitante não são atendidas por x."""
        home_gap = np.abs(self.home_loads(x) - self._home_target) > atol
        away_gap = np.abs(self.away_loads(x) - self._away_target) > atol
        return [int(i) for i in np.flatnonzero(home_gap | away_gap)]

    def check_feasible(self, x: Sequence[float]) -> np.ndarray:
        """Valida que x é binário e pertence a X; retorna o vetor como float.

        Raises:
            DimensionError: comprimento diferente de |G|
            FeasibilityError: x fracionário ou metas violadas
        """
        arr = self.check_dimension(x, "calendário")
        if not np.all((arr == 0.0) | (arr == 1.0)):
            raise FeasibilityError("Calendário não é integral")
        violated = self.violated_teams(arr)
        if violated:
            raise FeasibilityError(
                f"Calendário viola as metas de {len(violated)} time(s)", teams=violated
            )
        return arr

    def is_feasible(self, x: Sequence[float]) -> bool:
        try:
            self.check_feasible(x)
        except (FeasibilityError, DimensionError):
            return False
        return True

    def with_probabilities(self, probs: Sequence[float]) -> "LeagueState":
        """Nova instância com as probabilidades p_g substituídas."""
        arr = self.check_dimension(probs, "probabilidades")
        games = [
            Game(**{**g.model_dump(), "win_prob": float(p)})
            for g, p in zip(self.remaining_games, arr)
        ]
        return LeagueState(
            teams=self.teams,
            remaining_games=games,
            full_season_length=self.full_season_length,
            short_season_length=self.short_season_length,
        )


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr
