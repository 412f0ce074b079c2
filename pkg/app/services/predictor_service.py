"""Fase preditiva: regressão logística, métricas, calibração de Platt e validação cruzada."""
from typing import Optional, Sequence

import numpy as np
from loguru import logger
from scipy.optimize import minimize
from scipy.special import expit, log_expit
from sklearn.decomposition import PCA
from sklearn.metrics import roc_auc_score
from sklearn.model_selection import ShuffleSplit, StratifiedShuffleSplit
from sklearn.preprocessing import MinMaxScaler

from app.core.config import settings
from app.core.exceptions import DataError, DegenerateDataError, DimensionError, DomainError
from app.schemas.predictor import CvReport, FeatureDataset, FoldMetrics, LogisticConfig, TrainedModel

VALIDATION_FRACTION = 0.30
MIN_ROWS_PER_CLASS = 2


class PredictorService:
    """Serviço do modelo de probabilidade de vitória do mandante."""

    @staticmethod
    def fit_logistic(
        data: FeatureDataset,
        l2: Optional[float] = None,
        config: Optional[LogisticConfig] = None
    ) -> TrainedModel:
        """Ajusta a regressão logística minimizando LogLoss + l2·‖w‖²/2.

        Os atributos são escalados para [0,1] com o mínimo/máximo do treino e,
        se configurado, projetados nas componentes principais que explicam a
        fração de variância pedida. O intercepto não é penalizado.

        Args:
            data: Jogos disputados com rótulo
            l2: Penalidade (sobrepõe config.l2)
            config: Configuração do ajuste

        Returns:
            TrainedModel com pesos e transformações em arrays simples

        Raises:
            DegenerateDataError: menos de duas linhas de alguma classe
        """
        config = config or LogisticConfig()
        l2 = config.l2 if l2 is None else l2
        labels = _labels(data)
        counts = np.bincount(labels, minlength=2)
        if counts.min() < MIN_ROWS_PER_CLASS:
            raise DegenerateDataError(
                "Treino requer pelo menos duas linhas de cada classe",
                home_wins=int(counts[1]), home_losses=int(counts[0]),
            )

        scaler = MinMaxScaler(clip=True).fit(data.rows)
        z = scaler.transform(data.rows)
        pca_fields = {}
        if config.use_pca:
            # 1.0 mantém todas as componentes; o sklearn só aceita fração em (0, 1)
            n_components = None if config.pca_variance >= 1.0 else config.pca_variance
            pca = PCA(n_components=n_components, svd_solver="full").fit(z)
            z = pca.transform(z)
            pca_fields = {
                "pca_mean": pca.mean_.tolist(),
                "pca_components": pca.components_.tolist(),
                "pca_explained": float(pca.explained_variance_ratio_.sum()),
            }
            logger.debug(
                f"PCA: {pca.n_components_} componentes explicam "
                f"{pca_fields['pca_explained']:.3f} da variância"
            )

        start = np.zeros(z.shape[1] + 1)
        fit = minimize(
            PredictorService.loss_and_gradient,
            start,
            args=(z, labels, l2),
            jac=True,
            method="L-BFGS-B",
            options={"gtol": config.gtol, "maxiter": config.max_iter},
        )
        if not fit.success:
            logger.warning(f"L-BFGS-B não convergiu: {fit.message}")
        weights, intercept = fit.x[:-1], float(fit.x[-1])
        logger.info(
            f"Logit ajustado: {len(data)} jogos, {z.shape[1]} atributos, l2={l2}, "
            f"LogLoss={fit.fun:.5f}, iterações={fit.nit}"
        )
        return TrainedModel(
            weights=weights.tolist(),
            intercept=intercept,
            scale_min=scaler.data_min_.tolist(),
            scale_max=scaler.data_max_.tolist(),
            l2=l2,
            prob_epsilon=config.prob_epsilon,
            **pca_fields,
        )

    @staticmethod
    def loss_and_gradient(
        params: np.ndarray,
        z: np.ndarray,
        labels: np.ndarray,
        l2: float
    ) -> tuple[float, np.ndarray]:
        """LogLoss média + l2·‖w‖²/2 e seu gradiente; o último parâmetro é o intercepto."""
        w, b = params[:-1], params[-1]
        score = z @ w + b
        loss = -np.mean(labels * log_expit(score) + (1 - labels) * log_expit(-score))
        loss += 0.5 * l2 * float(w @ w)
        residual = (expit(score) - labels) / labels.shape[0]
        grad = np.empty_like(params)
        grad[:-1] = z.T @ residual + l2 * w
        grad[-1] = residual.sum()
        return float(loss), grad

    @staticmethod
    def transform(model: TrainedModel, features: np.ndarray) -> np.ndarray:
        """Escala para [0,1] (com corte) e aplica a PCA do treino."""
        rows = np.atleast_2d(np.asarray(features, dtype=float))
        if rows.shape[1] != model.n_features:
            raise DimensionError(
                f"Esperados {model.n_features} atributos, recebidos {rows.shape[1]}"
            )
        lo = np.asarray(model.scale_min)
        span = np.asarray(model.scale_max) - lo
        span = np.where(span > 0, span, 1.0)
        z = np.clip((rows - lo) / span, 0.0, 1.0)
        if model.pca_components is not None:
            z = (z - np.asarray(model.pca_mean)) @ np.asarray(model.pca_components).T
        return z

    @staticmethod
    def raw_scores(model: TrainedModel, features: np.ndarray) -> np.ndarray:
        """Logit não calibrado wᵀz + b."""
        return PredictorService.transform(model, features) @ np.asarray(model.weights) + model.intercept

    @staticmethod
    def predict_proba(model: TrainedModel, features: np.ndarray) -> np.ndarray:
        """Probabilidade de vitória do mandante, recalibrada se houver Platt.

        O resultado fica em [ε, 1-ε].

        Raises:
            DimensionError: número de atributos diferente do treino
        """
        score = PredictorService.raw_scores(model, features)
        if model.is_calibrated:
            score = model.platt_a * score + model.platt_b
        eps = model.prob_epsilon
        return np.clip(expit(score), eps, 1.0 - eps)

    @staticmethod
    def log_loss(probs: Sequence[float], labels: Sequence[int], clamp: bool = False) -> float:
        """-(1/N) Σ [y log p + (1 - y) log(1 - p)].

        Raises:
            DomainError: probabilidade 0 ou 1 sem `clamp`
            DimensionError: vetores desalinhados
        """
        p, y = _aligned(probs, labels)
        if clamp:
            eps = settings.PROB_EPSILON
            p = np.clip(p, eps, 1.0 - eps)
        elif np.any((p <= 0.0) | (p >= 1.0)):
            raise DomainError("LogLoss indefinida para probabilidades 0 ou 1 (use clamp)")
        return float(-np.mean(y * np.log(p) + (1 - y) * np.log1p(-p)))

    @staticmethod
    def accuracy(probs: Sequence[float], labels: Sequence[int], threshold: float = 0.5) -> float:
        p, y = _aligned(probs, labels)
        return float(np.mean((p > threshold).astype(int) == y))

    @staticmethod
    def auc(probs: Sequence[float], labels: Sequence[int]) -> float:
        """Área sob a curva ROC; empates contam ½.

        Raises:
            DegenerateDataError: apenas uma classe presente
        """
        p, y = _aligned(probs, labels)
        if np.unique(y).size < 2:
            raise DegenerateDataError("AUC requer as duas classes")
        return float(roc_auc_score(y, p))

    @staticmethod
    def calibrate_platt(
        model: TrainedModel,
        held_out: FeatureDataset,
        splits: int = 5,
        seed: int = 0
    ) -> TrainedModel:
        """Ajusta σ(A·s + B) sobre o logit bruto s em amostras aleatórias de validação.

        (A, B) é a média dos ajustes em `splits` sorteios estratificados.

        Raises:
            DegenerateDataError: validação com uma única classe
        """
        labels = _labels(held_out)
        if np.unique(labels).size < 2:
            raise DegenerateDataError("Calibração de Platt requer as duas classes")
        scores = PredictorService.raw_scores(model, held_out.rows)
        sampler = StratifiedShuffleSplit(
            n_splits=splits, test_size=VALIDATION_FRACTION, random_state=seed
        )
        fits = []
        for _, index in sampler.split(scores.reshape(-1, 1), labels):
            fit = minimize(
                _platt_loss, np.array([1.0, 0.0]), args=(scores[index], labels[index]),
                jac=True, method="L-BFGS-B", options={"gtol": 1e-10},
            )
            fits.append(fit.x)
        a, b = np.mean(fits, axis=0)
        logger.info(f"Calibração de Platt: A={a:.4f} B={b:.4f} ({splits} amostras)")
        return model.model_copy(update={"platt_a": float(a), "platt_b": float(b)})

    @staticmethod
    def cross_validate(
        data: FeatureDataset,
        k: int = 5,
        seed: int = 0,
        l2_grid: Optional[Sequence[float]] = None,
        config: Optional[LogisticConfig] = None
    ) -> CvReport:
        """k partições aleatórias treino/validação (30% para validação).

        Com `l2_grid`, cada valor é avaliado nas mesmas partições e o de menor
        LogLoss média é escolhido.

        Raises:
            DataError: linhas insuficientes para as partições
        """
        config = config or LogisticConfig()
        labels = _labels(data)
        if len(data) * VALIDATION_FRACTION < 2 or len(data) < 10:
            raise DataError(f"Linhas insuficientes para validação cruzada ({len(data)})")
        grid = list(l2_grid) if l2_grid else [config.l2]
        splitter = ShuffleSplit(n_splits=k, test_size=VALIDATION_FRACTION, random_state=seed)
        partitions = list(splitter.split(data.rows))

        results: dict[float, list[FoldMetrics]] = {}
        for l2 in grid:
            folds = []
            for fold, (train, valid) in enumerate(partitions):
                model = PredictorService.fit_logistic(data.subset(train), l2, config)
                probs = PredictorService.predict_proba(model, data.rows[valid])
                y = labels[valid]
                folds.append(FoldMetrics(
                    fold=fold,
                    log_loss=PredictorService.log_loss(probs, y),
                    accuracy=PredictorService.accuracy(probs, y),
                    auc=PredictorService.auc(probs, y) if np.unique(y).size == 2 else None,
                ))
            results[l2] = folds

        means = {l2: float(np.mean([f.log_loss for f in folds])) for l2, folds in results.items()}
        best = min(grid, key=lambda l2: (means[l2], grid.index(l2)))
        folds = results[best]
        aucs = [f.auc for f in folds if f.auc is not None]
        logger.info(f"Validação cruzada: melhor l2={best} LogLoss média={means[best]:.5f}")
        return CvReport(
            folds=folds,
            mean_log_loss=means[best],
            mean_accuracy=float(np.mean([f.accuracy for f in folds])),
            mean_auc=float(np.mean(aucs)) if aucs else None,
            best_l2=best,
            grid={str(l2): v for l2, v in means.items()},
        )

    @staticmethod
    def holdout_split(
        data: FeatureDataset,
        fraction: float = 0.2,
        seed: int = 0
    ) -> tuple[FeatureDataset, FeatureDataset]:
        """Separa aleatoriamente `fraction` dos jogos (treino, reservado)."""
        if not 0 < fraction < 1:
            raise DataError("Fração reservada deve estar em (0, 1)")
        splitter = ShuffleSplit(n_splits=1, test_size=fraction, random_state=seed)
        train, held = next(splitter.split(data.rows))
        return data.subset(np.sort(train)), data.subset(np.sort(held))


def _labels(data: FeatureDataset) -> np.ndarray:
    if data.labels is None:
        raise DataError("Conjunto de atributos sem rótulos")
    return data.labels


def _aligned(probs: Sequence[float], labels: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(probs, dtype=float)
    y = np.asarray(labels, dtype=float)
    if p.shape != y.shape:
        raise DimensionError(f"Probabilidades {p.shape} e rótulos {y.shape} desalinhados")
    return p, y


def _platt_loss(params: np.ndarray, scores: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    a, b = params
    t = a * scores + b
    loss = -np.mean(labels * log_expit(t) + (1 - labels) * log_expit(-t))
    residual = (expit(t) - labels) / labels.shape[0]
    return float(loss), np.array([residual @ scores, residual.sum()])
