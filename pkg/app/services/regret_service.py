"""Min-max regret (PW-MMR) sobre várias previsões candidatas, via Frank-Wolfe suavizado."""
import math
import time
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
from loguru import logger
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp, softmax

from app.core.exceptions import ConfigError
from app.models.league import LeagueState
from app.models.season import Schedule
from app.schemas.solver import FwConfig, FwIteration, FwResult, MmrConfig, MmrResult
from app.services.flow_service import FlowService
from app.services.frank_wolfe_service import FrankWolfeService, relative_gap
from app.services.objective_service import ObjectiveService, PwObjectiveModel


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Previsões candidatas p^(l), seus modelos PW e os limites θ^(l)."""
    state: LeagueState
    labels: list[str]
    models: list[PwObjectiveModel]
    thetas: np.ndarray
    seed_atoms: tuple[Schedule, ...] = ()

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(label) from None

    def __len__(self) -> int:
        return len(self.labels)


class RegretService:
    """Serviço do modelo robusto de min-max regret."""

    @staticmethod
    def build_candidates(
        state: LeagueState,
        candidates: Mapping[str, Sequence[float]],
        config: Optional[FwConfig] = None
    ) -> CandidateSet:
        """Monta o conjunto de candidatos com θ^(l) = limite inferior do FW.

        Args:
            state: Estado da liga (as metas valem para todos os candidatos)
            candidates: Rótulo -> vetor de probabilidades por jogo
            config: Configuração do FW usado para calcular θ (sem polimento)

        Returns:
            CandidateSet pronto para regret/solve_mmr

        Raises:
            ConfigError: conjunto vazio
        """
        if not candidates:
            raise ConfigError("PW-MMR requer pelo menos uma previsão candidata")
        fw_config = (config or FwConfig()).model_copy(update={"polish": False})
        labels, models, thetas, atoms = [], [], [], []
        for label, probs in candidates.items():
            model = ObjectiveService.build_model(state.with_probabilities(probs))
            fw = FrankWolfeService.solve(model, fw_config)
            labels.append(label)
            models.append(model)
            thetas.append(fw.lower_bound)
            atoms.append(fw.best_atom)
            logger.debug(f"Candidato {label}: θ={fw.lower_bound:.6g} f(x̂)={fw.upper_bound:.6g}")
        return CandidateSet(
            state=state,
            labels=labels,
            models=models,
            thetas=np.asarray(thetas, dtype=float),
            seed_atoms=tuple(atoms),
        )

    @staticmethod
    def regret(candidates: CandidateSet, label: str, x: Sequence[float]) -> float:
        """f_l(x) - θ^(l).

        Raises:
            KeyError: rótulo desconhecido
        """
        l = candidates.index(label)
        return ObjectiveService.evaluate(candidates.models[l], x) - float(candidates.thetas[l])

    @staticmethod
    def regrets(candidates: CandidateSet, x: Sequence[float]) -> np.ndarray:
        return np.array([
            ObjectiveService.evaluate(model, x) - theta
            for model, theta in zip(candidates.models, candidates.thetas)
        ])

    @staticmethod
    def smoothed_max(regrets: np.ndarray, tau: float) -> float:
        """F_τ = τ·log Σ_l exp(r_l/τ); entre max(r) e max(r) + τ·log|L|."""
        return float(tau * logsumexp(np.asarray(regrets, dtype=float) / tau))

    @staticmethod
    def softmax_weights(regrets: np.ndarray, tau: float) -> np.ndarray:
        return softmax(np.asarray(regrets, dtype=float) / tau)

    @staticmethod
    def smoothed_gradient(candidates: CandidateSet, x: np.ndarray, tau: float) -> np.ndarray:
        weights = RegretService.softmax_weights(RegretService.regrets(candidates, x), tau)
        grads = np.stack([ObjectiveService.gradient(model, x) for model in candidates.models])
        return weights @ grads

    @staticmethod
    def solve_mmr(candidates: CandidateSet, config: Optional[MmrConfig] = None) -> MmrResult:
        """Minimiza a suavização log-sum-exp do regret máximo com temperatura decrescente.

        Cada rodada roda Frank-Wolfe em F_τ com busca linear limitada em [0,1].
        Ao final, o regret máximo exato de todos os átomos colhidos é calculado
        e o menor é devolvido. Cada linha do histórico guarda F_τ no iterado,
        o regret máximo exato nele, a temperatura e o melhor regret máximo
        entre os átomos colhidos até ali.

        Args:
            candidates: Conjunto de candidatos (ver build_candidates)
            config: Rodadas, temperaturas e tolerâncias

        Returns:
            MmrResult com o átomo escolhido e regrets por candidato

        Raises:
            ConfigError: conjunto vazio
        """
        if len(candidates) == 0:
            raise ConfigError("PW-MMR requer pelo menos uma previsão candidata")
        config = config or MmrConfig()
        start = time.perf_counter()
        state = candidates.state
        log_l = math.log(len(candidates))

        def max_regret_at(v: np.ndarray) -> float:
            return float(np.max(RegretService.regrets(candidates, v)))

        first = FrankWolfeService.initial_point(candidates.models[0])
        pool: dict[bytes, Schedule] = {first.selected.tobytes(): first}
        for atom in candidates.seed_atoms:
            pool.setdefault(atom.selected.tobytes(), atom)
        incumbent = min(max_regret_at(a.vector) for a in pool.values())

        x = first.vector
        lower = 0.0
        trace: list[FwIteration] = []
        iterations = 0
        per_round = max(1, config.max_iterations // config.rounds)

        for tau in config.temperatures():

            def smoothed(v: np.ndarray) -> float:
                return RegretService.smoothed_max(RegretService.regrets(candidates, v), tau)

            fx = smoothed(x)
            for _ in range(per_round):
                iterations += 1
                grad = RegretService.smoothed_gradient(candidates, x, tau)
                atom = FlowService.transportation(state, grad)
                key = atom.selected.tobytes()
                if key not in pool:
                    pool[key] = atom
                    incumbent = min(incumbent, max_regret_at(atom.vector))
                s = atom.vector
                delta = s - x
                lower = max(lower, fx + float(grad @ delta) - tau * log_l)

                search = minimize_scalar(
                    lambda g: smoothed(x + g * delta),
                    bounds=(0.0, 1.0),
                    method="bounded",
                    options={"xatol": config.line_search_tol},
                )
                gamma, f_next = float(search.x), float(search.fun)
                f_full = smoothed(s)
                if f_full < f_next:
                    gamma, f_next = 1.0, f_full
                trace.append(FwIteration(
                    iteration=iterations,
                    objective=fx,
                    lower_bound=lower,
                    upper_bound=incumbent,
                    step=gamma,
                    temperature=tau,
                    max_regret=max_regret_at(x),
                ))
                if fx - f_next < config.stall_tol:
                    break
                x = np.clip(x + gamma * delta, 0.0, 1.0)
                fx = smoothed(x)
            logger.debug(f"MMR τ={tau:.3g}: F_τ={fx:.6g} LB={lower:.6g}")

        scored = sorted(
            ((float(np.max(RegretService.regrets(candidates, a.vector))), i, a)
             for i, a in enumerate(pool.values())),
            key=lambda item: (item[0], item[1]),
        )
        max_regret, _, best = scored[0]
        regrets = RegretService.regrets(candidates, best.vector)
        lower = min(lower, max_regret)
        result = FwResult(
            best_atom=best,
            fractional=Schedule.from_fractional(x),
            upper_bound=max_regret,
            lower_bound=lower,
            rel_gap=relative_gap(max_regret, lower),
            abs_gap=max_regret - lower,
            iterations=iterations,
            elapsed=time.perf_counter() - start,
            trace=trace,
            atoms=list(pool.values()),
        )
        logger.info(
            f"PW-MMR concluído: regret máximo={max_regret:.6g} LB={lower:.6g} "
            f"candidatos={len(candidates)} ({result.elapsed:.3f}s)"
        )
        return MmrResult(
            result=result,
            regrets={label: float(r) for label, r in zip(candidates.labels, regrets)},
            thetas={label: float(t) for label, t in zip(candidates.labels, candidates.thetas)},
            max_regret=max_regret,
        )
