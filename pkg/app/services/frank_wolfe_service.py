"""Frank-Wolfe para a relaxação contínua do PW e a extensão com força de tabela (SoS)."""
import math
import time
from typing import Optional, Sequence

import numpy as np
from loguru import logger

from app.models.season import Schedule
from app.schemas.solver import FwConfig, FwIteration, FwResult
from app.services.flow_service import FlowService
from app.services.objective_service import ObjectiveService, PwObjectiveModel
from app.services.strength_service import StrengthService
from app.services.swap_service import SwapService


def relative_gap(upper: float, lower: float) -> float:
    """(UB - LB)/LB, com 0 quando os limites coincidem e ∞ quando LB ≤ 0."""
    if upper - lower <= 1e-15:
        return 0.0
    if lower > 0:
        return (upper - lower) / lower
    return math.inf


class FrankWolfeService:
    """Serviço do algoritmo de gradiente condicional sobre X̄."""

    @staticmethod
    def line_search(
        model: PwObjectiveModel,
        x: Sequence[float],
        atom: Sequence[float],
        linear: Optional[np.ndarray] = None
    ) -> float:
        """Passo exato γ ∈ [0,1] na direção Δ = atom - x.

        O objetivo é quadrático ao longo do segmento, então
        γ = clamp(-g/(2c), 0, 1) com g = ∇f(x)ᵀΔ e c a curvatura direcional.
        """
        x = np.asarray(x, dtype=float)
        delta = np.asarray(atom, dtype=float) - x
        grad = ObjectiveService.gradient(model, x)
        if linear is not None:
            grad = grad + linear
        g = float(grad @ delta)
        return _step(g, ObjectiveService.directional_curvature(model, delta))

    @staticmethod
    def initial_point(model: PwObjectiveModel, linear: Optional[np.ndarray] = None) -> Schedule:
        """x⁰: átomo que favorece (α < 0) ou evita (α > 0) jogos de maior variância."""
        costs = model.alpha * (2.0 / model.state.m ** 2) * model.game_var
        if linear is not None:
            costs = costs + linear
        return FlowService.transportation(model.state, costs)

    @staticmethod
    def solve(model: PwObjectiveModel, config: Optional[FwConfig] = None) -> FwResult:
        """Resolve a relaxação contínua do PW e devolve o melhor átomo inteiro.

        Args:
            model: Objetivo PW da instância
            config: Critérios de parada e polimento

        Returns:
            FwResult com best_atom ∈ X, limites inferior/superior e histórico

        Raises:
            FeasibilityError: metas impossíveis de atender
        """
        config = config or FwConfig()
        start = time.perf_counter()
        logger.info(
            f"Frank-Wolfe PW: {model.state.n_teams} times, {model.state.n_games} jogos, "
            f"α={model.alpha:.4f}"
        )
        result = _frank_wolfe(model, config)
        if config.polish:
            _polish(model, result)
        result.elapsed = time.perf_counter() - start
        logger.info(
            f"Frank-Wolfe PW concluído: f={result.upper_bound:.6g} LB={result.lower_bound:.6g} "
            f"gap={result.rel_gap:.3g} iterações={result.iterations} ({result.elapsed:.3f}s)"
        )
        return result

    @staticmethod
    def solve_sos(
        model: PwObjectiveModel,
        config: FwConfig,
        pre_win_pct: Optional[Sequence[float]] = None
    ) -> FwResult:
        """PW com restrições (OW_i - ÔW_i)/ÔW_i ≤ ε via relaxação Lagrangiana.

        As restrições são lineares em x, então cada subproblema continua sendo
        um Frank-Wolfe com custo linear extra Σ λ_i r_i(x). Os multiplicadores
        seguem o subgradiente projetado com passo η₀/√k.

        Args:
            model: Objetivo PW
            config: Configuração com sos_epsilon (None ou ∞ desativa as restrições)
            pre_win_pct: ȳ⁰ dos adversários (padrão: aproveitamento pré-suspensão)

        Returns:
            FwResult com o melhor átomo viável (ou o menos violado) e sos_violation

        Raises:
            DegenerateInstanceError: ÔW_i = 0 para algum time
        """
        epsilon = config.sos_epsilon
        if epsilon is None or math.isinf(epsilon):
            result = FrankWolfeService.solve(model, config)
            result.sos_violation = 0.0
            return result

        start = time.perf_counter()
        state = model.state
        constraints = StrengthService.sos_constraints(state, pre_win_pct)
        inner_config = config.model_copy(update={"polish": False})
        multipliers = np.zeros(constraints.teams.size)
        pool: dict[bytes, Schedule] = {}
        lower = -math.inf
        fractional = None
        iterations = 0

        for k in range(1, config.sos_max_dual_iters + 1):
            linear = multipliers @ constraints.coefficients
            inner = _frank_wolfe(model, inner_config, linear=linear)
            iterations += inner.iterations
            fractional = inner.fractional
            lower = max(lower, inner.lower_bound - multipliers.sum() * (1.0 + epsilon))
            for atom in inner.atoms:
                pool.setdefault(atom.selected.tobytes(), atom)

            excess = constraints.excess(inner.best_atom.vector)
            violation = float(max(np.max(excess, initial=-math.inf) - epsilon, 0.0))
            logger.debug(f"SoS dual {k}: violação={violation:.3g} Σλ={multipliers.sum():.4g}")
            if violation <= config.sos_tol:
                break
            step = config.sos_step / math.sqrt(k)
            multipliers = np.maximum(multipliers + step * (excess - epsilon), 0.0)

        def violation_of(atom: Schedule) -> float:
            return constraints.violation(atom.vector, epsilon)

        scored = [
            (violation_of(a) > config.sos_tol, violation_of(a), ObjectiveService.evaluate(model, a.vector), a)
            for a in pool.values()
        ]
        feasible = [s for s in scored if not s[0]]
        if feasible:
            _, _, _, best = min(feasible, key=lambda s: s[2])
        else:
            _, _, _, best = min(scored, key=lambda s: (s[1], s[2]))

        polished = False
        if config.polish and violation_of(best) <= config.sos_tol:
            improved, moves = SwapService.descend_pw(
                model, best, accept=lambda x: constraints.violation(x, epsilon) <= config.sos_tol
            )
            if moves:
                best, polished = improved, True

        upper = ObjectiveService.evaluate(model, best.vector)
        lower = min(lower, upper)
        result = FwResult(
            best_atom=best,
            fractional=fractional,
            upper_bound=upper,
            lower_bound=lower,
            rel_gap=relative_gap(upper, lower),
            abs_gap=upper - lower,
            iterations=iterations,
            converged=violation_of(best) <= config.sos_tol,
            polished=polished,
            sos_violation=violation_of(best),
            elapsed=time.perf_counter() - start,
            atoms=list(pool.values()),
        )
        if result.sos_violation > config.sos_tol:
            logger.warning(
                f"PW-SoS sem átomo viável para ε={epsilon}: violação mínima {result.sos_violation:.4g}"
            )
        logger.info(
            f"PW-SoS concluído: f={upper:.6g} violação={result.sos_violation:.3g} "
            f"duais={k} ({result.elapsed:.3f}s)"
        )
        return result


def _frank_wolfe(
    model: PwObjectiveModel,
    config: FwConfig,
    linear: Optional[np.ndarray] = None
) -> FwResult:
    """Laço principal sobre F(x) = f(x) + linearᵀx."""
    state = model.state
    offset = np.zeros(state.n_games) if linear is None else np.asarray(linear, dtype=float)

    def objective(v: np.ndarray) -> float:
        return ObjectiveService.evaluate(model, v) + float(offset @ v)

    first = FrankWolfeService.initial_point(model, linear)
    x = first.vector
    fx = objective(x)
    best, upper = first, fx
    atoms: dict[bytes, Schedule] = {first.selected.tobytes(): first}
    lower = -math.inf
    trace: list[FwIteration] = []
    converged = False
    iterations = 0

    for t in range(1, config.max_iterations + 1):
        iterations = t
        grad = ObjectiveService.gradient(model, x) + offset
        atom = FlowService.transportation(state, grad)
        s = state.check_feasible(atom.selected)
        key = atom.selected.tobytes()
        if key not in atoms:
            atoms[key] = atom
            fs = objective(s)
            if fs < upper:
                best, upper = atom, fs

        delta = s - x
        lower = max(lower, fx + float(grad @ delta))
        gap = relative_gap(upper, lower)
        g = float(grad @ delta)
        gamma = _step(g, ObjectiveService.directional_curvature(model, delta))
        trace.append(FwIteration(iteration=t, objective=fx, lower_bound=lower, upper_bound=upper, step=gamma))

        if gap <= config.rel_gap_tol:
            converged = True
            break
        x_next = np.clip(x + gamma * delta, 0.0, 1.0)
        f_next = objective(x_next)
        decrease = fx - f_next
        x, fx = x_next, f_next
        if decrease < config.stall_tol:
            logger.debug(f"Frank-Wolfe estagnou na iteração {t} (queda {decrease:.3g})")
            break

    return FwResult(
        best_atom=best,
        fractional=Schedule.from_fractional(x),
        upper_bound=upper,
        lower_bound=lower,
        rel_gap=relative_gap(upper, lower),
        abs_gap=upper - lower,
        iterations=iterations,
        converged=converged,
        trace=trace,
        atoms=list(atoms.values()),
    )


def _step(g: float, c: float) -> float:
    if c > 0:
        return float(min(max(-g / (2.0 * c), 0.0), 1.0))
    return 1.0 if g < 0 else 0.0


def _polish(model: PwObjectiveModel, result: FwResult) -> None:
    """Melhora o melhor átomo por trocas; o limite inferior não muda."""
    improved, moves = SwapService.descend_pw(model, result.best_atom)
    if not moves:
        return
    value = ObjectiveService.evaluate(model, improved.vector)
    if value < result.upper_bound:
        result.best_atom = improved
        result.upper_bound = value
        result.rel_gap = relative_gap(value, result.lower_bound)
        result.abs_gap = value - result.lower_bound
        result.polished = True
        result.atoms.append(improved)
