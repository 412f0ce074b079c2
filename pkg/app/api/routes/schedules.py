"""Rotas de otimização e simulação de calendários."""
from typing import Any

import numpy as np
from fastapi import APIRouter
from fastapi.concurrency import run_in_threadpool

from app.models.season import Schedule
from app.schemas.api import OptimizeRequest, OptimizeResponse, SimulateRequest
from app.services.pipeline_service import PipelineService
from app.services.simulation_service import SimulationService

router = APIRouter(prefix="/schedules", tags=["Calendários"])


@router.post("/optimize", response_model=OptimizeResponse, summary="Escolhe os jogos restantes")
async def optimize_schedule(request: OptimizeRequest) -> OptimizeResponse:
    """Executa a política pedida sobre a liga enviada."""
    outcome = await run_in_threadpool(
        PipelineService.optimize, request.state, request.options, request.candidates
    )
    schedule = outcome.schedule or Schedule(selected=np.zeros(request.state.n_games))
    return OptimizeResponse(
        solver=outcome.solver.value,
        selected=[int(v) for v in schedule.selected],
        game_ids=schedule.game_ids,
        summary=_plain(outcome.summary),
    )


@router.post("/simulate", summary="Avalia um calendário por Monte Carlo")
async def simulate_schedule(request: SimulateRequest) -> dict[str, Any]:
    """Concordância média, intervalo de confiança, grupos e SSD."""
    schedule = None if request.selected is None else Schedule(selected=request.selected)
    report = await run_in_threadpool(
        SimulationService.simulate, request.state, schedule, request.config, request.label
    )
    return report.to_dict()


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.generic, np.ndarray)):
        return value.tolist()
    return value
