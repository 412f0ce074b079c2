"""Schemas de configuração e relatórios da simulação Monte Carlo."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from app.core.config import settings
from app.models.season import Schedule


class Category(str, Enum):
    """Grupos de times comparados entre as classificações."""
    PLAYOFF = "playoff"
    HOME_COURT = "home_court"
    LOTTERY = "lottery"


class AgreementCutoffs(BaseModel):
    """Tamanho dos grupos comparados entre as duas temporadas."""
    model_config = ConfigDict(frozen=True)

    playoff: int = Field(default=settings.PLAYOFF_CUTOFF, ge=1, description="Melhores por conferência")
    home_court: int = Field(default=settings.HOME_COURT_CUTOFF, ge=1, description="Melhores por conferência")
    lottery: int = Field(default=settings.LOTTERY_CUTOFF, ge=1, description="Piores no geral")


class EvalConfig(BaseModel):
    """Configuração da simulação de desfechos.

    `sim_probs` permite avaliar com probabilidades diferentes das usadas
    pelo otimizador.
    """
    model_config = ConfigDict(frozen=True)

    replications: int = Field(default=settings.DEFAULT_REPLICATIONS, ge=1)
    base_seed: int = 0
    sim_probs: Optional[list[float]] = None
    cutoffs: AgreementCutoffs = Field(default_factory=AgreementCutoffs)
    threads: Optional[int] = Field(default=None, ge=1)
    chunk_size: Optional[int] = Field(default=None, ge=1)
    keep_replications: bool = False


@dataclass(eq=False)
class SimulationReport:
    """Distribuição da concordância e das concordâncias de grupos."""
    label: str
    replications: int
    mean_concordance: float
    concordance_std: float
    concordance_ci: Optional[tuple[float, float]]
    max_concordance: int
    agreement: dict[str, float]
    ssd: Optional[float] = None
    ssd_flagged: list[int] = field(default_factory=list)
    single_path: bool = False
    per_replication: Optional[pd.DataFrame] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "replications": self.replications,
            "mean_concordance": self.mean_concordance,
            "concordance_std": self.concordance_std,
            "concordance_ci": list(self.concordance_ci) if self.concordance_ci else None,
            "max_concordance": self.max_concordance,
            "agreement": self.agreement,
            "ssd": self.ssd,
            "ssd_flagged": self.ssd_flagged,
            "single_path": self.single_path,
        }


@dataclass(frozen=True)
class PairwiseComparison:
    """Quantas vezes (e por quanto) a política `first` supera `second`."""
    first: str
    second: str
    win_rate: float
    tie_rate: float
    loss_rate: float
    mean_margin_win: Optional[float]
    mean_margin_loss: Optional[float]


@dataclass(eq=False)
class ComparisonReport:
    """Relatórios por política sob os mesmos cenários sorteados."""
    reports: dict[str, SimulationReport]
    pairwise: list[PairwiseComparison]

    def to_dict(self) -> dict[str, Any]:
        return {
            "reports": {k: v.to_dict() for k, v in self.reports.items()},
            "pairwise": [p.__dict__ for p in self.pairwise],
        }


@dataclass(frozen=True)
class VarianceDiagnostics:
    """Variância p(1-p) e nitidez max(p, 1-p) médias por grupo de jogos.

    `coefficient` é 2(1 - 2m/m̂)·G₁/m², com G₁ o número de jogos selecionados;
    negativo (m > m̂/2) quando o objetivo favorece jogos equilibrados.
    """
    coefficient: float
    selected_games: int
    mean_variance: dict[str, Optional[float]]
    mean_sharpness: dict[str, Optional[float]]


@dataclass(frozen=True)
class GreedyOutcome:
    """Seleção gulosa por data e os déficits de metas por time."""
    schedule: Schedule
    home_shortfall: dict[int, int]
    away_shortfall: dict[int, int]

    @property
    def feasible(self) -> bool:
        return not self.home_shortfall and not self.away_shortfall
