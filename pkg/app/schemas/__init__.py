"""Schemas Pydantic de configuração, relatórios e API."""
from app.schemas.api import (
    OptimizeRequest, OptimizeResponse, RankingMetricsRequest, RankingMetricsResponse, SimulateRequest
)
from app.schemas.predictor import CvReport, FeatureDataset, LogisticConfig, TrainedModel
from app.schemas.run import RunConfig, Solver, SolverOptions
from app.schemas.simulation import AgreementCutoffs, Category, EvalConfig, SimulationReport
from app.schemas.solver import FwConfig, LocalSearchConfig, MmrConfig, PcConfig

__all__ = [
    # API
    "OptimizeRequest", "OptimizeResponse", "RankingMetricsRequest", "RankingMetricsResponse",
    "SimulateRequest",
    # Preditor
    "CvReport", "FeatureDataset", "LogisticConfig", "TrainedModel",
    # Execução
    "RunConfig", "Solver", "SolverOptions",
    # Simulação
    "AgreementCutoffs", "Category", "EvalConfig", "SimulationReport",
    # Solvers
    "FwConfig", "LocalSearchConfig", "MmrConfig", "PcConfig",
]
