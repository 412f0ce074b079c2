"""Modelos de domínio da liga e da temporada."""
from app.models.league import Conference, Game, LeagueState, Team
from app.models.season import Horizon, Ranking, Scenario, Schedule, ScoreVector, TieBreak

__all__ = [
    # Liga
    "Conference", "Game", "LeagueState", "Team",
    # Temporada
    "Horizon", "Ranking", "Scenario", "Schedule", "ScoreVector", "TieBreak",
]
