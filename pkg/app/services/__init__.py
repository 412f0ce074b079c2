"""Serviços da aplicação com a lógica de seleção, simulação e previsão."""
from app.services.concordance_service import ConcordanceService
from app.services.exhaustive_service import ExhaustiveService
from app.services.flow_service import FlowService
from app.services.frank_wolfe_service import FrankWolfeService
from app.services.ingest_service import IngestService
from app.services.objective_service import ObjectiveService
from app.services.pipeline_service import PipelineService
from app.services.predictor_service import PredictorService
from app.services.ranking_service import RankingService
from app.services.regret_service import RegretService
from app.services.simulation_service import SimulationService
from app.services.strength_service import StrengthService
from app.services.swap_service import SwapService
from app.services.synthetic_service import SyntheticLeagueService

__all__ = [
    "ConcordanceService", "ExhaustiveService", "FlowService", "FrankWolfeService",
    "IngestService", "ObjectiveService", "PipelineService", "PredictorService",
    "RankingService", "RegretService", "SimulationService", "StrengthService",
    "SwapService", "SyntheticLeagueService",
]
