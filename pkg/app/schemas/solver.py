"""Schemas de configuração e resultado dos solvers de calendário."""
import math
from dataclasses import dataclass, field, fields
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from app.core.config import settings
from app.models.season import Schedule


class FwConfig(BaseModel):
    """Controles de convergência do Frank-Wolfe e da extensão SoS."""
    model_config = ConfigDict(frozen=True)

    max_iterations: int = Field(default=settings.FW_MAX_ITERATIONS, ge=1)
    rel_gap_tol: float = Field(default=settings.FW_REL_GAP_TOL, gt=0)
    stall_tol: float = Field(default=settings.FW_STALL_TOL, gt=0)
    sos_epsilon: Optional[float] = Field(default=None, ge=0)
    sos_max_dual_iters: int = Field(default=settings.SOS_MAX_DUAL_ITERS, ge=1)
    sos_step: float = Field(default=1.0, gt=0, description="Passo inicial η₀ do subgradiente")
    sos_tol: float = Field(default=1e-6, gt=0)
    polish: bool = True


@dataclass(frozen=True)
class FwIteration:
    """Uma linha do histórico de iterações."""
    iteration: int
    objective: float
    lower_bound: float
    upper_bound: float
    step: float
    temperature: Optional[float] = None
    max_regret: Optional[float] = None


@dataclass(eq=False)
class FwResult:
    """Resultado do Frank-Wolfe com certificados de qualidade.

    `best_atom` é o melhor calendário inteiro produzido; `fractional` é o
    último iterado contínuo. Vale lower_bound ≤ f(best_atom) = upper_bound.
    """
    best_atom: Schedule
    fractional: Schedule
    upper_bound: float
    lower_bound: float
    rel_gap: float
    abs_gap: float
    iterations: int
    converged: bool = False
    polished: bool = False
    sos_violation: Optional[float] = None
    elapsed: float = 0.0
    trace: list[FwIteration] = field(default_factory=list)
    atoms: list[Schedule] = field(default_factory=list)

    def summary(self) -> dict:
        """Campos escalares para relatórios JSON."""
        return {
            "objective": self.upper_bound,
            "lower_bound": self.lower_bound,
            "rel_gap": self.rel_gap if math.isfinite(self.rel_gap) else None,
            "abs_gap": self.abs_gap,
            "iterations": self.iterations,
            "converged": self.converged,
            "polished": self.polished,
            "sos_violation": self.sos_violation,
            "atoms": len(self.atoms),
            "elapsed": self.elapsed,
        }


class MmrConfig(BaseModel):
    """Parâmetros do Frank-Wolfe suavizado para o min-max regret."""
    model_config = ConfigDict(frozen=True)

    rounds: int = Field(default=7, ge=1)
    tau_start: float = Field(default=1.0, gt=0)
    tau_end: float = Field(default=1e-3, gt=0)
    max_iterations: int = Field(default=settings.FW_MAX_ITERATIONS, ge=1)
    line_search_tol: float = Field(default=1e-8, gt=0)
    stall_tol: float = Field(default=settings.FW_STALL_TOL, gt=0)

    def temperatures(self) -> list[float]:
        """Sequência geométrica τ_0 = tau_start, ..., τ_{R-1} = tau_end."""
        if self.rounds == 1:
            return [self.tau_end]
        ratio = (self.tau_end / self.tau_start) ** (1.0 / (self.rounds - 1))
        return [self.tau_start * ratio ** k for k in range(self.rounds)]


@dataclass(eq=False)
class MmrResult:
    """Resultado do PW-MMR: átomo escolhido e regrets por candidato."""
    result: FwResult
    regrets: dict[str, float]
    thetas: dict[str, float]
    max_regret: float


class LocalSearchConfig(BaseModel):
    """Busca local do modelo de concordância."""
    model_config = ConfigDict(frozen=True)

    budget: int = Field(default=2000, ge=0, description="Movimentos avaliados por reinício")
    restarts: int = Field(default=3, ge=0)
    seed: int = 0


class PcConfig(BaseModel):
    """Configuração de solve_pc."""
    model_config = ConfigDict(frozen=True)

    scenarios: int = Field(default=settings.SAA_SCENARIOS, ge=1)
    seed: int = 0
    search: LocalSearchConfig = Field(default_factory=LocalSearchConfig)
    fw: FwConfig = Field(default_factory=FwConfig)


@dataclass(eq=False)
class PcResult:
    """Resultado dos modelos de concordância (MVP ou SAA)."""
    schedule: Schedule
    mode: str
    objective: float
    start_objective: float
    scenarios: int
    fixed_pairs: int
    free_pairs: int
    elimination_pct: float
    evaluated_moves: int
    elapsed: float

    def summary(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "schedule"}
