"""Rotas de métricas entre classificações."""
import numpy as np
from fastapi import APIRouter

from app.core.exceptions import DimensionError
from app.models.season import Ranking, ScoreVector
from app.schemas.api import RankingMetricsRequest, RankingMetricsResponse
from app.services.ranking_service import RankingService

router = APIRouter(prefix="/metrics", tags=["Métricas"])


@router.post("/rankings", response_model=RankingMetricsResponse, summary="Concordância e distâncias")
async def ranking_metrics(request: RankingMetricsRequest) -> RankingMetricsResponse:
    """Compara dois vetores de aproveitamento ou duas classificações."""
    if len(request.first) != len(request.second):
        raise DimensionError(
            f"Vetores com dimensões diferentes: {len(request.first)} e {len(request.second)}"
        )
    if request.ranks:
        a = first = Ranking(rank=np.asarray(request.first, dtype=np.int64))
        b = second = Ranking(rank=np.asarray(request.second, dtype=np.int64))
    else:
        a = ScoreVector(numerators=request.first, denominator=1)
        b = ScoreVector(numerators=request.second, denominator=1)
        first, second = RankingService.rank_from_scores(a), RankingService.rank_from_scores(b)
    n = len(request.first)
    return RankingMetricsResponse(
        concordance=RankingService.concordance(a, b),
        max_concordance=RankingService.max_concordance(n),
        euclidean=RankingService.euclidean_distance(first, second),
        manhattan=RankingService.manhattan_distance(first, second),
        max_euclidean=RankingService.max_euclidean_distance(n),
    )
