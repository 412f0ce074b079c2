"""Schemas do modelo preditivo de vitória do mandante."""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.core.config import settings
from app.core.exceptions import DataError


@dataclass(frozen=True, eq=False)
class FeatureDataset:
    """Matriz de atributos por jogo com rótulo y_g (1 = vitória do mandante).

    `labels` é None para jogos ainda não disputados.
    """
    rows: np.ndarray
    labels: Optional[np.ndarray]
    game_ids: np.ndarray
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "game_ids", np.asarray(self.game_ids, dtype=np.int64))
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape[0] != rows.shape[0]:
                raise DataError(
                    f"{rows.shape[0]} linhas de atributos e {labels.shape[0]} rótulos"
                )
            object.__setattr__(self, "labels", labels)
        if np.isnan(rows).any():
            raise DataError("Atributos com valores ausentes")
        if self.game_ids.shape[0] != rows.shape[0]:
            raise DataError("game_ids desalinhados com as linhas de atributos")
        if not self.feature_names:
            object.__setattr__(
                self, "feature_names", [f"f{k + 1}" for k in range(rows.shape[1])]
            )

    @property
    def n_features(self) -> int:
        return int(self.rows.shape[1])

    def __len__(self) -> int:
        return int(self.rows.shape[0])

    def subset(self, index: np.ndarray) -> "FeatureDataset":
        return FeatureDataset(
            rows=self.rows[index],
            labels=None if self.labels is None else self.labels[index],
            game_ids=self.game_ids[index],
            feature_names=self.feature_names,
        )


class LogisticConfig(BaseModel):
    """Configuração do ajuste da regressão logística."""
    model_config = ConfigDict(frozen=True)

    l2: float = Field(default=1e-3, ge=0)
    use_pca: bool = False
    pca_variance: float = Field(default=0.90, gt=0, le=1)
    max_iter: int = Field(default=10000, ge=1)
    gtol: float = Field(default=1e-8, gt=0)
    prob_epsilon: float = Field(default=settings.PROB_EPSILON, gt=0, lt=0.5)


class TrainedModel(BaseModel):
    """Modelo treinado em arrays simples (serializável em JSON).

    A entrada é escalada para [0,1] com o mínimo/máximo do treino, projetada
    nas componentes principais quando houver e passada pela logística;
    `platt_a`/`platt_b` recalibram o logit quando presentes.
    """
    weights: list[float]
    intercept: float
    scale_min: list[float]
    scale_max: list[float]
    pca_mean: Optional[list[float]] = None
    pca_components: Optional[list[list[float]]] = None
    pca_explained: Optional[float] = None
    platt_a: Optional[float] = None
    platt_b: Optional[float] = None
    l2: float = 0.0
    prob_epsilon: float = settings.PROB_EPSILON

    @property
    def n_features(self) -> int:
        return len(self.scale_min)

    @property
    def is_calibrated(self) -> bool:
        return self.platt_a is not None

    def raw_coefficients(self) -> tuple[np.ndarray, float]:
        """Pesos e intercepto na escala original (apenas sem PCA)."""
        if self.pca_components is not None:
            raise DataError("Coeficientes na escala original indisponíveis com PCA")
        lo = np.asarray(self.scale_min)
        span = np.asarray(self.scale_max) - lo
        span = np.where(span > 0, span, 1.0)
        w = np.asarray(self.weights) / span
        return w, float(self.intercept - w @ lo)


class FoldMetrics(BaseModel):
    """Métricas de uma partição treino/validação."""
    fold: int
    log_loss: float
    accuracy: float
    auc: Optional[float] = None


class CvReport(BaseModel):
    """Resultado da validação cruzada por partições aleatórias."""
    folds: list[FoldMetrics]
    mean_log_loss: float
    mean_accuracy: float
    mean_auc: Optional[float] = None
    best_l2: float
    grid: dict[str, float] = Field(default_factory=dict, description="l2 -> LogLoss média")
