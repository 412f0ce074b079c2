"""Equivalente determinístico do objetivo PW e estimador Monte Carlo independente."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from loguru import logger

from app.core.config import settings
from app.core.exceptions import DimensionError, DomainError
from app.models.league import LeagueState
from app.models.season import Schedule


@dataclass(frozen=True, eq=False)
class PwObjectiveModel:
    """Coeficientes do objetivo Σ((μ_i - μ̂_i)² + α·v_i + v̂_i).

    μ̂ e v̂ são a média e a variância do aproveitamento de cada time na
    temporada completa; μ(x) e v(x) são avaliados sob demanda.
    """
    state: LeagueState
    mu_hat: np.ndarray
    v_hat: np.ndarray
    alpha: float
    game_var: np.ndarray

    @property
    def prob(self) -> np.ndarray:
        return self.state.win_prob

    @property
    def constant(self) -> float:
        """Parcela Σ v̂_i, que não depende de x."""
        return float(self.v_hat.sum())

    def mu(self, x: np.ndarray) -> np.ndarray:
        state = self.state
        p = state.win_prob
        wins = np.bincount(state.host, weights=p * x, minlength=state.n_teams)
        wins += np.bincount(state.guest, weights=(1.0 - p) * x, minlength=state.n_teams)
        return (state.pre_wins + wins) / state.m

    def v(self, x: np.ndarray) -> np.ndarray:
        state = self.state
        w = self.game_var * x
        total = np.bincount(state.host, weights=w, minlength=state.n_teams)
        total += np.bincount(state.guest, weights=w, minlength=state.n_teams)
        return total / state.m ** 2


class ObjectiveService:
    """Serviço para o objetivo PW e suas derivadas."""

    @staticmethod
    def build_model(state: LeagueState) -> PwObjectiveModel:
        """Monta o modelo determinístico a partir das probabilidades p_g.

        Args:
            state: Estado da liga com probabilidades de vitória dos mandantes

        Returns:
            Modelo com μ̂, v̂, α e p_g(1 - p_g) por jogo
        """
        p = state.win_prob
        n = state.n_teams
        game_var = p * (1.0 - p)
        wins = np.bincount(state.host, weights=p, minlength=n)
        wins += np.bincount(state.guest, weights=1.0 - p, minlength=n)
        mu_hat = (state.pre_wins + wins) / state.m_hat
        var = np.bincount(state.host, weights=game_var, minlength=n)
        var += np.bincount(state.guest, weights=game_var, minlength=n)
        v_hat = var / state.m_hat ** 2
        return PwObjectiveModel(
            state=state,
            mu_hat=mu_hat,
            v_hat=v_hat,
            alpha=state.alpha,
            game_var=game_var,
        )

    @staticmethod
    def team_terms(model: PwObjectiveModel, x: Sequence[float]) -> np.ndarray:
        """Contribuição de cada time para o objetivo."""
        arr = _box(model, x)
        return (model.mu(arr) - model.mu_hat) ** 2 + model.alpha * model.v(arr) + model.v_hat

    @staticmethod
    def evaluate(model: PwObjectiveModel, x: Sequence[float]) -> float:
        """Valor do objetivo em x ∈ [0,1]^|G|.

        Para x binário é igual a E[Σ_i (y_i(x,ξ) - ŷ_i(ξ))²].

        Raises:
            DomainError: x fora da caixa [0,1]
            DimensionError: tamanho diferente de |G|
        """
        return float(ObjectiveService.team_terms(model, x).sum())

    @staticmethod
    def gradient(model: PwObjectiveModel, x: Sequence[float]) -> np.ndarray:
        """Gradiente analítico ∂f/∂x_g."""
        arr = _box(model, x)
        state = model.state
        p = state.win_prob
        m = state.m
        dev = model.mu(arr) - model.mu_hat
        linear = (2.0 / m) * (dev[state.host] * p + dev[state.guest] * (1.0 - p))
        # x_g entra em v_{i(g)} e em v_{j(g)}
        return linear + model.alpha * (2.0 / m ** 2) * model.game_var

    @staticmethod
    def team_shift(model: PwObjectiveModel, direction: Sequence[float]) -> np.ndarray:
        """a_i(Δ): variação de μ_i ao longo de Δ."""
        state = model.state
        delta = np.asarray(direction, dtype=float)
        p = state.win_prob
        shift = np.bincount(state.host, weights=p * delta, minlength=state.n_teams)
        shift += np.bincount(state.guest, weights=(1.0 - p) * delta, minlength=state.n_teams)
        return shift / state.m

    @staticmethod
    def directional_curvature(model: PwObjectiveModel, direction: Sequence[float]) -> float:
        """Curvatura c tal que f(x + γΔ) = f(x) + γ∇f(x)ᵀΔ + γ²c."""
        delta = model.state.check_dimension(direction, "direção")
        return float(np.sum(ObjectiveService.team_shift(model, delta) ** 2))

    @staticmethod
    def mc_estimate(
        state: LeagueState,
        x: Schedule,
        samples: int,
        seed: int,
        chunk_size: Optional[int] = None,
        threads: Optional[int] = None
    ) -> tuple[float, float]:
        """Estimativa Monte Carlo de E[Σ_i (y_i - ŷ_i)²] para um calendário viável.

        Args:
            state: Estado da liga
            x: Calendário binário viável
            samples: Número de cenários sorteados
            seed: Semente base; cada bloco recebe um fluxo próprio
            chunk_size: Cenários por bloco (SIM_CHUNK_SIZE se None)
            threads: Threads para os blocos (SIM_THREADS se None)

        Returns:
            (média, erro padrão)

        Raises:
            FeasibilityError: calendário fora de X
        """
        selected = state.check_feasible(x.selected)
        if samples < 1:
            raise DomainError("samples deve ser >= 1")
        chunk = chunk_size or settings.SIM_CHUNK_SIZE
        sizes = [min(chunk, samples - start) for start in range(0, samples, chunk)]
        streams = np.random.SeedSequence(seed).spawn(len(sizes))

        n = state.n_teams
        host_inc = np.zeros((state.n_games, n))
        host_inc[np.arange(state.n_games), state.host] = 1.0
        guest_inc = np.zeros((state.n_games, n))
        guest_inc[np.arange(state.n_games), state.guest] = 1.0

        def run_chunk(args: tuple[int, np.random.SeedSequence]) -> np.ndarray:
            size, stream = args
            rng = np.random.default_rng(stream)
            w = (rng.random((size, state.n_games)) < state.win_prob).astype(float)
            full = state.pre_wins + w @ host_inc + (1.0 - w) @ guest_inc
            short = state.pre_wins + (w * selected) @ host_inc + ((1.0 - w) * selected) @ guest_inc
            return np.sum((short / state.m - full / state.m_hat) ** 2, axis=1)

        workers = threads or settings.SIM_THREADS
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = np.concatenate(list(pool.map(run_chunk, zip(sizes, streams))))

        mean = float(values.mean())
        stderr = float(values.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
        logger.debug(f"Monte Carlo PW: média={mean:.6g} ep={stderr:.3g} amostras={samples}")
        return mean, stderr


def _box(model: PwObjectiveModel, x: Sequence[float]) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != model.state.n_games:
        raise DimensionError(
            f"x com dimensão {arr.shape} incompatível com {model.state.n_games} jogos"
        )
    if np.any(arr < -1e-12) or np.any(arr > 1 + 1e-12):
        raise DomainError("x fora da caixa [0,1]^|G|")
    return arr
