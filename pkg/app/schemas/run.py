"""Configuração e artefatos de uma execução completa (prever, otimizar, simular)."""
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.config import settings
from app.models.season import Schedule
from app.schemas.predictor import CvReport, TrainedModel
from app.schemas.simulation import AgreementCutoffs


class Solver(str, Enum):
    """Políticas de seleção de jogos disponíveis."""
    PW_FW = "pw-fw"
    PW_MMR = "pw-mmr"
    PW_SOS = "pw-sos"
    PC_MVP = "pc-mvp"
    PC_SAA = "pc-saa"
    GREEDY = "greedy"
    STATUS_QUO = "status-quo"


class SolverOptions(BaseModel):
    """Parâmetros da política de seleção."""
    model_config = ConfigDict(frozen=True)

    solver: Solver = Solver.PW_FW
    sos_epsilon: float = Field(default=0.02, ge=0)
    saa_scenarios: int = Field(default=settings.SAA_SCENARIOS, ge=1)
    search_budget: int = Field(default=2000, ge=0)
    search_restarts: int = Field(default=3, ge=0)
    seed: int = 0


class RunConfig(BaseModel):
    """Tudo o que define uma execução; o manifesto guarda este objeto."""
    model_config = ConfigDict(frozen=True)

    teams_path: Path
    remaining_path: Path
    short_season_length: int = Field(ge=0, description="m")
    full_season_length: Optional[int] = Field(default=None, ge=1, description="m̂ (inferido se ausente)")
    targets_path: Optional[Path] = None
    probs_path: Optional[Path] = None
    played_features_path: Optional[Path] = None
    remaining_features_path: Optional[Path] = None
    outcomes_path: Optional[Path] = None
    candidate_probs_paths: list[Path] = Field(default_factory=list)
    clamp_probabilities: bool = False

    solver: Solver = Solver.PW_FW
    sos_epsilon: float = Field(default=0.02, ge=0)
    saa_scenarios: int = Field(default=settings.SAA_SCENARIOS, ge=1)
    search_budget: int = Field(default=2000, ge=0)
    search_restarts: int = Field(default=3, ge=0)

    l2_grid: list[float] = Field(default_factory=lambda: [1e-4, 1e-3, 1e-2])
    mmr_l2_grid: list[float] = Field(default_factory=lambda: [1e-4, 1e-2])
    use_pca: bool = False
    calibrate: bool = True
    holdout_fraction: float = Field(default=0.2, ge=0, lt=1)
    cv_folds: int = Field(default=5, ge=1)

    seed: int = 0
    replications: int = Field(default=settings.DEFAULT_REPLICATIONS, ge=1)
    cutoffs: AgreementCutoffs = Field(default_factory=AgreementCutoffs)
    threads: Optional[int] = Field(default=None, ge=1, description="Threads da simulação")
    chunk_size: Optional[int] = Field(default=None, ge=1)
    output_dir: Path = Path(settings.OUTPUT_DIR)

    @model_validator(mode="after")
    def check_features(self) -> "RunConfig":
        """Atributos de jogos disputados exigem os atributos dos jogos restantes."""
        if (self.played_features_path is None) != (self.remaining_features_path is None):
            raise ValueError("played_features_path e remaining_features_path andam juntos")
        return self

    def solver_options(self) -> SolverOptions:
        return SolverOptions(**{name: getattr(self, name) for name in SolverOptions.model_fields})


@dataclass(eq=False)
class Prediction:
    """Probabilidades do otimizador (treino parcial) e do avaliador (todos os jogos)."""
    optimizer_probs: np.ndarray
    evaluator_probs: np.ndarray
    optimizer_model: TrainedModel
    evaluator_model: TrainedModel
    cv: Optional[CvReport] = None


@dataclass(eq=False)
class OptimizeOutcome:
    """Calendário escolhido pela política e o resumo do solver.

    `schedule` é None para o Status Quo.
    """
    solver: Solver
    schedule: Optional[Schedule]
    summary: dict[str, Any] = field(default_factory=dict)
    elapsed: float = 0.0


@dataclass(eq=False)
class RunOutcome:
    """Relatório e caminhos dos artefatos gravados."""
    report: dict[str, Any]
    manifest: dict[str, Any]
    paths: dict[str, Path]
    schedule: Optional[Schedule] = None
