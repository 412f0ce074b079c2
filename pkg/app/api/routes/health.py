"""Rotas para verificação de saúde do sistema."""
import time
from datetime import datetime, timezone
from typing import Any, Callable, Dict

import numpy as np
from fastapi import APIRouter, HTTPException, status
from fastapi.concurrency import run_in_threadpool

from app.core.config import settings
from app.schemas.simulation import AgreementCutoffs, EvalConfig
from app.services.flow_service import FlowService
from app.services.simulation_service import SimulationService
from app.services.synthetic_service import SyntheticLeagueService

router = APIRouter(tags=["Sistema"])


@router.get("/health", summary="Verificação básica de saúde")
async def health_check() -> Dict[str, Any]:
    """Verificação básica de saúde da aplicação."""
    return {
        "status": "healthy",
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "version": settings.VERSION,
        "environment": settings.ENV,
    }


@router.get("/health/detailed", summary="Verificação detalhada de saúde")
async def detailed_health_check() -> Dict[str, Any]:
    """Resolve um fluxo de custo mínimo e uma simulação curta na liga de 4 times."""
    checks: Dict[str, Any] = {
        "status": "healthy",
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "version": settings.VERSION,
        "environment": settings.ENV,
        "checks": {},
    }
    state = SyntheticLeagueService.tiny_league()
    tasks: Dict[str, Callable[[], Any]] = {
        "min_cost_flow": lambda: FlowService.transportation(state, np.arange(state.n_games, dtype=float)),
        "simulation": lambda: SimulationService.simulate(
            state, None, EvalConfig(replications=10, cutoffs=AgreementCutoffs(playoff=2, home_court=1, lottery=1))
        ),
    }
    for name, task in tasks.items():
        try:
            start = time.perf_counter()
            await run_in_threadpool(task)
            checks["checks"][name] = {
                "status": "healthy",
                "response_time_ms": round((time.perf_counter() - start) * 1000, 2),
            }
        except Exception as e:
            checks["status"] = "unhealthy"
            checks["checks"][name] = {"status": "unhealthy", "error": str(e)}

    # Se algum check falhou, retorna 503
    if checks["status"] == "unhealthy":
        raise HTTPException(status_code=status.HTTP_503_SERVICE_UNAVAILABLE, detail=checks)
    return checks


@router.get("/health/liveness", summary="Verificação de vida")
async def liveness_check() -> Dict[str, str]:
    """Verificação se a aplicação está viva."""
    return {"status": "alive"}
