"""Orquestração da execução completa: prever, otimizar, simular e gravar artefatos."""
import json
import platform
import time
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
import scipy
import sklearn
from loguru import logger
from ortools import __version__ as ortools_version

from app.core.config import settings
from app.core.exceptions import ConfigError, DataError
from app.core.logging import add_run_sink
from app.models.league import LeagueState
from app.models.season import Schedule
from app.schemas.predictor import FeatureDataset, LogisticConfig
from app.schemas.run import OptimizeOutcome, Prediction, RunConfig, RunOutcome, Solver, SolverOptions
from app.schemas.simulation import EvalConfig
from app.schemas.solver import FwConfig, LocalSearchConfig, PcConfig
from app.services.concordance_service import ConcordanceService, PcMode
from app.services.frank_wolfe_service import FrankWolfeService
from app.services.ingest_service import IngestService
from app.services.objective_service import ObjectiveService
from app.services.predictor_service import PredictorService
from app.services.regret_service import RegretService
from app.services.simulation_service import SimulationService

TIMING_KEY = "timings"


class PipelineService:
    """Pipeline prever-e-otimizar com artefatos reproduzíveis."""

    @staticmethod
    def predict(config: RunConfig) -> Optional[Prediction]:
        """Treina os modelos do otimizador e do avaliador a partir dos atributos.

        O avaliador usa todos os jogos disputados; o otimizador usa apenas a
        fração não reservada (e a reserva para a calibração de Platt).

        Returns:
            Prediction, ou None quando não há arquivos de atributos
        """
        if config.played_features_path is None:
            return None
        played, remaining = _load_features(config)
        return PipelineService.train_models(
            played,
            remaining,
            l2_grid=config.l2_grid,
            use_pca=config.use_pca,
            calibrate=config.calibrate,
            holdout_fraction=config.holdout_fraction,
            cv_folds=config.cv_folds,
            seed=config.seed,
        )

    @staticmethod
    def train_models(
        played: FeatureDataset,
        remaining: FeatureDataset,
        l2_grid: Sequence[float],
        use_pca: bool = False,
        calibrate: bool = True,
        holdout_fraction: float = 0.2,
        cv_folds: int = 5,
        seed: int = 0
    ) -> Prediction:
        """Escolhe l2 por validação cruzada e ajusta os dois modelos.

        Returns:
            Prediction com as probabilidades dos jogos restantes em ordem de game_id
        """
        cv = PredictorService.cross_validate(
            played, k=cv_folds, seed=seed, l2_grid=l2_grid, config=LogisticConfig(use_pca=use_pca),
        )
        logistic = LogisticConfig(l2=cv.best_l2, use_pca=use_pca)
        evaluator_model = PredictorService.fit_logistic(played, config=logistic)

        if holdout_fraction > 0:
            train, held = PredictorService.holdout_split(played, holdout_fraction, seed)
            optimizer_model = PredictorService.fit_logistic(train, config=logistic)
            if calibrate:
                optimizer_model = PredictorService.calibrate_platt(optimizer_model, held, seed=seed)
        else:
            optimizer_model = evaluator_model

        order = np.argsort(remaining.game_ids, kind="stable")
        rows = remaining.rows[order]
        return Prediction(
            optimizer_probs=PredictorService.predict_proba(optimizer_model, rows),
            evaluator_probs=PredictorService.predict_proba(evaluator_model, rows),
            optimizer_model=optimizer_model,
            evaluator_model=evaluator_model,
            cv=cv,
        )

    @staticmethod
    def load_league(config: RunConfig, probabilities: Optional[np.ndarray] = None) -> LeagueState:
        return IngestService.load_state(
            config.teams_path,
            config.remaining_path,
            config.short_season_length,
            full_season_length=config.full_season_length,
            targets_path=config.targets_path,
            probs_path=None if probabilities is not None else config.probs_path,
            probabilities=probabilities,
            clamp=config.clamp_probabilities,
        )

    @staticmethod
    def candidate_probabilities(config: RunConfig, state: LeagueState) -> dict[str, np.ndarray]:
        """Previsões candidatas do PW-MMR.

        Vêm dos arquivos `candidate_probs_paths` ou, sem eles, de logits com
        cada l2 de `mmr_l2_grid`, com e sem PCA, treinados na parte não reservada.

        Raises:
            ConfigError: nenhuma fonte de candidatos
        """
        if config.candidate_probs_paths:
            return {
                Path(path).stem: IngestService.load_probabilities(path, state.n_games, config.clamp_probabilities)
                for path in config.candidate_probs_paths
            }
        if config.played_features_path is None:
            raise ConfigError("PW-MMR requer candidate_probs_paths ou arquivos de atributos")
        played, remaining = _load_features(config)
        if config.holdout_fraction > 0:
            played, _ = PredictorService.holdout_split(played, config.holdout_fraction, config.seed)
        rows = remaining.rows[np.argsort(remaining.game_ids, kind="stable")]
        candidates = {}
        for l2 in config.mmr_l2_grid:
            for use_pca in (False, True):
                model = PredictorService.fit_logistic(played, config=LogisticConfig(l2=l2, use_pca=use_pca))
                label = f"l2={l2:g}" + ("-pca" if use_pca else "")
                candidates[label] = PredictorService.predict_proba(model, rows)
        return candidates

    @staticmethod
    def optimize(
        state: LeagueState,
        options: SolverOptions,
        candidates: Optional[Mapping[str, Sequence[float]]] = None,
        config: Optional[RunConfig] = None
    ) -> OptimizeOutcome:
        """Executa a política escolhida e resume o resultado.

        Args:
            state: Estado da liga
            options: Política e seus parâmetros
            candidates: Previsões candidatas do PW-MMR
            config: Execução de onde carregar os candidatos quando `candidates` é None

        Raises:
            ConfigError: PW-MMR sem candidatos
        """
        solver = Solver(options.solver)
        start = time.perf_counter()
        model = ObjectiveService.build_model(state)
        summary: dict[str, Any]

        if solver == Solver.PW_FW:
            result = FrankWolfeService.solve(model, FwConfig())
            schedule, summary = result.best_atom, result.summary()
        elif solver == Solver.PW_SOS:
            result = FrankWolfeService.solve_sos(model, FwConfig(sos_epsilon=options.sos_epsilon))
            schedule, summary = result.best_atom, result.summary()
        elif solver == Solver.PW_MMR:
            if candidates is None:
                if config is None:
                    raise ConfigError("PW-MMR requer previsões candidatas")
                candidates = PipelineService.candidate_probabilities(config, state)
            mmr = RegretService.solve_mmr(RegretService.build_candidates(state, candidates))
            schedule = mmr.result.best_atom
            summary = {**mmr.result.summary(), "regrets": mmr.regrets, "max_regret": mmr.max_regret}
        elif solver in (Solver.PC_MVP, Solver.PC_SAA):
            mode = PcMode.MVP if solver == Solver.PC_MVP else PcMode.SAA
            pc = ConcordanceService.solve_pc(state, mode, PcConfig(
                scenarios=options.saa_scenarios,
                seed=options.seed,
                search=LocalSearchConfig(
                    budget=options.search_budget, restarts=options.search_restarts, seed=options.seed
                ),
            ))
            schedule, summary = pc.schedule, pc.summary()
        elif solver == Solver.GREEDY:
            greedy = SimulationService.greedy_selection(state)
            schedule = SimulationService.greedy_schedule(state, outcome=greedy)
            summary = {
                "home_shortfall": greedy.home_shortfall,
                "away_shortfall": greedy.away_shortfall,
                "repaired": not greedy.feasible,
            }
        else:
            schedule, summary = None, {}

        if schedule is not None:
            summary["pw_objective"] = ObjectiveService.evaluate(model, schedule.vector)
            summary["selected_games"] = len(schedule.game_ids)
        summary.pop("elapsed", None)
        elapsed = time.perf_counter() - start
        logger.info(f"Política {solver.value} concluída em {elapsed:.3f}s")
        return OptimizeOutcome(solver=solver, schedule=schedule, summary=summary, elapsed=elapsed)

    @staticmethod
    def evaluate(
        state: LeagueState,
        outcome: OptimizeOutcome,
        config: RunConfig,
        evaluator_probs: Optional[np.ndarray] = None
    ) -> dict[str, Any]:
        """Simulação, diagnósticos de variância e backtest (se houver resultados reais)."""
        eval_config = EvalConfig(
            replications=config.replications,
            base_seed=config.seed,
            sim_probs=None if evaluator_probs is None else [float(p) for p in evaluator_probs],
            cutoffs=config.cutoffs,
            threads=config.threads,
            chunk_size=config.chunk_size,
        )
        label = outcome.solver.value
        section: dict[str, Any] = {
            "simulation": SimulationService.simulate(state, outcome.schedule, eval_config, label).to_dict(),
        }
        if outcome.schedule is not None:
            diagnostics = SimulationService.variance_sharpness_diagnostics(state, outcome.schedule)
            section["diagnostics"] = diagnostics.__dict__
        if config.outcomes_path is not None:
            actual = IngestService.load_outcomes(config.outcomes_path, state.n_games)
            section["backtest"] = SimulationService.backtest(
                state, outcome.schedule, actual, config.cutoffs, label
            ).to_dict()
        return section

    @staticmethod
    def run(config: RunConfig) -> RunOutcome:
        """Executa prever → otimizar → simular e grava schedule.csv, report.json e run-manifest.json.

        O log da execução vai para run.log no mesmo diretório.

        Raises:
            SeasonError: qualquer falha dos módulos, com contexto
        """
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        sink = add_run_sink(out)
        try:
            outcome = _execute(config, out)
        finally:
            logger.remove(sink)
        outcome.paths["log"] = out / "run.log"
        return outcome

    @staticmethod
    def config_from_manifest(path: Path) -> RunConfig:
        """Reconstrói o RunConfig gravado em run-manifest.json."""
        return RunConfig.model_validate(json.loads(Path(path).read_text())["config"])


def _execute(config: RunConfig, out: Path) -> RunOutcome:
    timings: dict[str, float] = {}
    paths: dict[str, Path] = {}

    start = time.perf_counter()
    prediction = PipelineService.predict(config)
    timings["predict"] = time.perf_counter() - start

    state = PipelineService.load_league(
        config, None if prediction is None else prediction.optimizer_probs
    )
    evaluator_probs = None
    if prediction is not None:
        evaluator_probs = prediction.evaluator_probs
        paths["probs"] = IngestService.write_probabilities(
            prediction.optimizer_probs, np.arange(state.n_games), out / "probs.csv"
        )
        paths["eval_probs"] = IngestService.write_probabilities(
            evaluator_probs, np.arange(state.n_games), out / "eval_probs.csv"
        )
        paths["model"] = out / "model.json"
        paths["model"].write_text(prediction.optimizer_model.model_dump_json(indent=2))

    outcome = PipelineService.optimize(state, config.solver_options(), config=config)
    timings["optimize"] = outcome.elapsed

    start = time.perf_counter()
    evaluation = PipelineService.evaluate(state, outcome, config, evaluator_probs)
    timings["simulate"] = time.perf_counter() - start

    schedule = outcome.schedule or Schedule(selected=np.zeros(state.n_games))
    paths["schedule"] = IngestService.write_schedule(schedule, out / "schedule.csv")

    report = {
        "solver": outcome.solver.value,
        "league": {"teams": state.n_teams, "remaining_games": state.n_games, "m": state.m, "m_hat": state.m_hat},
        "optimizer": outcome.summary,
        **evaluation,
    }
    if prediction is not None and prediction.cv is not None:
        report["prediction"] = prediction.cv.model_dump()
    report[TIMING_KEY] = timings

    manifest = {
        "config": config.model_dump(mode="json"),
        "seeds": {"base": config.seed, "simulation": config.seed, "search": config.seed},
        "versions": _versions(),
    }
    paths["report"] = _write_json(report, out / "report.json")
    paths["manifest"] = _write_json(manifest, out / "run-manifest.json")
    logger.info(f"Execução gravada em {out}")
    return RunOutcome(report=report, manifest=manifest, paths=paths, schedule=schedule)


def _load_features(config: RunConfig) -> tuple[FeatureDataset, FeatureDataset]:
    played = IngestService.load_features(config.played_features_path, require_labels=True)
    remaining = IngestService.load_features(config.remaining_features_path)
    ids = np.sort(remaining.game_ids)
    if not np.array_equal(ids, np.arange(ids.shape[0])):
        raise DataError("Atributos dos jogos restantes devem cobrir game_id 0..|G|-1")
    return played, remaining


def _versions() -> dict[str, str]:
    return {
        "app": settings.VERSION,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "scikit-learn": sklearn.__version__,
        "ortools": ortools_version,
    }


def _write_json(payload: dict[str, Any], path: Path) -> Path:
    path.write_text(json.dumps(payload, indent=2, default=_to_builtin, allow_nan=False) + "\n")
    return path


def _to_builtin(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Tipo não serializável: {type(value).__name__}")
