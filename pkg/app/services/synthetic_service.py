"""Geração determinística de ligas suspensas e conjuntos de atributos sintéticos."""
from typing import Optional, Sequence

import numpy as np
from loguru import logger
from scipy.special import expit

from app.core.exceptions import ConfigError
from app.models.league import Conference, Game, LeagueState, Team
from app.schemas.predictor import FeatureDataset

HOME_ADVANTAGE = 0.3
SUSPENSION_DAY = 100
DIVISIONS = 3


class SyntheticLeagueService:
    """Fábrica de instâncias para testes, benchmarks e demonstrações."""

    @staticmethod
    def tiny_league(seed: int = 0) -> LeagueState:
        """4 times, 8 jogos restantes; cada time recebe os dois seguintes (mod 4).

        Metas 1/1 para todos, m = 10 e m̂ = 12. Só há dois calendários viáveis.
        """
        rng = np.random.default_rng(seed)
        teams = [
            Team(
                id=i,
                name=f"T{i}",
                conference=Conference.EAST if i < 2 else Conference.WEST,
                pre_wins=int(rng.integers(0, 9)),
                pre_home_games=4,
                pre_away_games=4,
                home_target=1,
                away_target=1,
            )
            for i in range(4)
        ]
        pairs = [(i, (i + d) % 4) for d in (1, 2) for i in range(4)]
        probs = rng.uniform(0.15, 0.85, size=len(pairs))
        days = rng.integers(1, 6, size=len(pairs))
        games = [
            Game(id=g, host=h, guest=a, day=int(days[g]), win_prob=float(probs[g]))
            for g, (h, a) in enumerate(pairs)
        ]
        return LeagueState(teams=teams, remaining_games=games, full_season_length=12, short_season_length=10)

    @staticmethod
    def paired_league(seed: int = 0, copies: int = 2) -> LeagueState:
        """4 times em um ciclo aleatório de confrontos, cada um repetido `copies` vezes.

        Cada time aparece em dois confrontos e a meta pede um jogo de cada, então
        qualquer escolha de cópia é viável: pelo menos copies**4 calendários.
        m = 10 e m̂ = 8 + 2·copies.

        Raises:
            ConfigError: copies < 2
        """
        if copies < 2:
            raise ConfigError("paired_league requer copies >= 2", copies=copies)
        rng = np.random.default_rng(seed)
        order = rng.permutation(4)
        matchups = []
        for k in range(4):
            a, b = int(order[k]), int(order[(k + 1) % 4])
            matchups.append((a, b) if rng.random() < 0.5 else (b, a))

        home_target = np.zeros(4, dtype=np.int64)
        away_target = np.zeros(4, dtype=np.int64)
        for h, a in matchups:
            home_target[h] += 1
            away_target[a] += 1

        slots = [(h, a, c + 1) for h, a in matchups for c in range(copies)]
        shuffle = rng.permutation(len(slots))
        probs = rng.uniform(0.15, 0.85, size=len(slots))
        days = rng.integers(1, 6, size=len(slots))
        games = [
            Game(
                id=g, host=slots[k][0], guest=slots[k][1], match_index=slots[k][2],
                day=int(days[g]), win_prob=float(probs[g]),
            )
            for g, k in enumerate(shuffle)
        ]
        teams = [
            Team(
                id=i,
                name=f"P{i}",
                conference=Conference.EAST if i < 2 else Conference.WEST,
                pre_wins=int(rng.integers(0, 9)),
                pre_home_games=4,
                pre_away_games=4,
                home_target=int(home_target[i]),
                away_target=int(away_target[i]),
            )
            for i in range(4)
        ]
        return LeagueState(
            teams=teams, remaining_games=games, full_season_length=8 + 2 * copies, short_season_length=10
        )

    @staticmethod
    def league(
        teams: int = 30,
        remaining_games: int = 259,
        short_season_length: int = 70,
        seed: int = 0,
        full_season_length: int = 82
    ) -> LeagueState:
        """Liga no estilo NBA suspensa, com metas viáveis por construção.

        Cada time deixa de jogar exatamente m̂ - m dos seus jogos restantes; os
        demais formam um calendário viável que define as metas. Forças latentes
        geram o retrospecto pré-suspensão e as probabilidades logísticas com
        vantagem de mando.

        Raises:
            ConfigError: parâmetros incompatíveis
        """
        n, m, m_hat = teams, short_season_length, full_season_length
        excluded_degree = m_hat - m
        if n < 2 or excluded_degree < 0:
            raise ConfigError("Requer pelo menos 2 times e m <= m̂", teams=n, m=m, m_hat=m_hat)
        if excluded_degree % 2 and n % 2:
            raise ConfigError("m̂ - m ímpar exige número par de times")
        rng = np.random.default_rng(seed)
        order = rng.permutation(n)

        excluded = []
        for offset in range(1, excluded_degree // 2 + 1):
            excluded += [(order[i], order[(i + offset) % n]) for i in range(n)]
        if excluded_degree % 2:
            excluded += [(order[i], order[i + n // 2]) for i in range(n // 2)]
        extra = remaining_games - len(excluded)
        if extra < 0:
            raise ConfigError(
                f"{remaining_games} jogos restantes não comportam {len(excluded)} jogos excluídos"
            )

        degree = np.zeros(n, dtype=np.int64)
        selected = []
        for _ in range(extra):
            candidates = rng.permutation(n)
            a, b = candidates[np.argsort(degree[candidates], kind="stable")[:2]]
            selected.append((a, b))
            degree[a] += 1
            degree[b] += 1

        pairs = [tuple(rng.permutation(pair)) for pair in excluded + selected]
        in_short = np.array([False] * len(excluded) + [True] * len(selected))
        host = np.array([p[0] for p in pairs], dtype=np.int64)
        guest = np.array([p[1] for p in pairs], dtype=np.int64)
        home_target = np.bincount(host[in_short], minlength=n)
        away_target = np.bincount(guest[in_short], minlength=n)
        pre_games = m - home_target - away_target
        pre_home = m // 2 - home_target
        pre_away = pre_games - pre_home
        if np.any(pre_home < 0) or np.any(pre_away < 0):
            raise ConfigError("Metas excedem m/2; aumente m ou reduza os jogos restantes")

        strength = rng.normal(0.0, 1.0, size=n)
        pre_wins = rng.binomial(pre_games, expit(0.8 * strength))
        probs = np.clip(expit(HOME_ADVANTAGE + strength[host] - strength[guest]), 0.02, 0.98)
        days = rng.integers(SUSPENSION_DAY + 1, SUSPENSION_DAY + 61, size=len(pairs))

        shuffle = rng.permutation(len(pairs))
        match_index: dict[tuple[int, int], int] = {}
        games = []
        for g, k in enumerate(shuffle):
            key = (int(host[k]), int(guest[k]))
            match_index[key] = match_index.get(key, 0) + 1
            games.append(Game(
                id=g, host=key[0], guest=key[1], match_index=match_index[key],
                day=int(days[k]), win_prob=float(probs[k]),
            ))

        team_list = []
        for i in range(n):
            conference = Conference.EAST if i < (n + 1) // 2 else Conference.WEST
            team_list.append(Team(
                id=i,
                name=f"Team {i:02d}",
                conference=conference,
                division=f"{conference.value}-{i % DIVISIONS + 1}",
                pre_wins=int(pre_wins[i]),
                pre_home_games=int(pre_home[i]),
                pre_away_games=int(pre_away[i]),
                home_target=int(home_target[i]),
                away_target=int(away_target[i]),
            ))
        logger.debug(
            f"Liga sintética: {n} times, {len(games)} jogos restantes, "
            f"{int(home_target.sum())} a selecionar (seed={seed})"
        )
        return LeagueState(
            teams=team_list,
            remaining_games=games,
            full_season_length=m_hat,
            short_season_length=m,
        )

    @staticmethod
    def feature_dataset(
        rows: int = 500,
        features: int = 4,
        seed: int = 0,
        weights: Optional[Sequence[float]] = None,
        intercept: float = 0.2,
        labelled: bool = True,
        first_game_id: int = 0
    ) -> FeatureDataset:
        """Atributos uniformes em [0,1] com rótulos de um modelo logístico conhecido.

        Args:
            rows: Número de jogos
            features: Número de atributos
            seed: Semente
            weights: Pesos verdadeiros (padrão: alternando ±2)
            intercept: Intercepto verdadeiro
            labelled: False para jogos ainda não disputados
            first_game_id: Primeiro id de jogo

        Returns:
            FeatureDataset
        """
        rng = np.random.default_rng(seed)
        w = np.asarray(
            weights if weights is not None else [2.0 * (-1) ** k for k in range(features)],
            dtype=float,
        )
        if w.shape[0] != features:
            raise ConfigError(f"{w.shape[0]} pesos para {features} atributos")
        x = rng.random((rows, features))
        labels = None
        if labelled:
            labels = (rng.random(rows) < expit(x @ w + intercept)).astype(np.int64)
        return FeatureDataset(
            rows=x,
            labels=labels,
            game_ids=np.arange(first_game_id, first_game_id + rows),
        )
