"""Schemas de requisição e resposta da API HTTP."""
from typing import Any, Optional

from pydantic import BaseModel, Field

from app.models.league import LeagueState
from app.schemas.run import SolverOptions
from app.schemas.simulation import EvalConfig


class OptimizeRequest(BaseModel):
    """Liga e política para escolher o calendário reduzido."""
    state: LeagueState
    options: SolverOptions = Field(default_factory=SolverOptions)
    candidates: Optional[dict[str, list[float]]] = Field(
        default=None, description="Previsões candidatas (PW-MMR)"
    )


class OptimizeResponse(BaseModel):
    solver: str
    selected: list[int]
    game_ids: list[int]
    summary: dict[str, Any]


class SimulateRequest(BaseModel):
    """Calendário a avaliar; `selected` ausente avalia o Status Quo."""
    state: LeagueState
    selected: Optional[list[int]] = None
    config: EvalConfig = Field(default_factory=EvalConfig)
    label: Optional[str] = None


class RankingMetricsRequest(BaseModel):
    """Dois vetores de aproveitamento (maior = melhor) ou duas classificações (1 = topo)."""
    first: list[float] = Field(min_length=2)
    second: list[float] = Field(min_length=2)
    ranks: bool = False


class RankingMetricsResponse(BaseModel):
    concordance: int
    max_concordance: int
    euclidean: int
    manhattan: int
    max_euclidean: int
