"""Linha de comando: predict, optimize, simulate, backtest e pipeline."""
import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import ValidationError

from app.core.exceptions import ConfigError, SeasonError
from app.core.logging import setup_logging
from app.models.season import Schedule
from app.schemas.run import RunConfig, Solver
from app.schemas.simulation import AgreementCutoffs, EvalConfig
from app.services.ingest_service import IngestService
from app.services.pipeline_service import PipelineService
from app.services.simulation_service import SimulationService


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="season",
        description="Seleção de jogos para concluir uma temporada suspensa",
    )
    parser.add_argument("--log-level", default=None, help="Nível de log (padrão: LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    predict = sub.add_parser("predict", help="Treina o logit e grava probs.csv")
    _add_feature_args(predict, required=True)
    predict.add_argument("--seed", type=int, default=0)
    predict.add_argument("--output", type=Path, default=Path("."), help="Diretório de saída")
    _add_format(predict)

    optimize = sub.add_parser("optimize", help="Escolhe os jogos do calendário reduzido")
    _add_league_args(optimize)
    _add_solver_args(optimize)
    optimize.add_argument("--seed", type=int, default=0)
    optimize.add_argument("--output", dest="schedule_out", type=Path, default=None, help="schedule.csv")
    _add_format(optimize)

    simulate = sub.add_parser("simulate", help="Avalia um calendário por Monte Carlo")
    _add_league_args(simulate)
    _add_eval_args(simulate)
    simulate.add_argument("--schedule", type=Path, default=None, help="schedule.csv (omitido: Status Quo)")
    simulate.add_argument("--sim-probs", type=Path, default=None, help="Probabilidades do avaliador")
    _add_format(simulate)

    backtest = sub.add_parser("backtest", help="Compara com os resultados realizados")
    _add_league_args(backtest)
    backtest.add_argument("--schedule", type=Path, default=None, help="schedule.csv (omitido: Status Quo)")
    backtest.add_argument("--outcomes", type=Path, required=True, help="outcomes.csv")
    _add_cutoff_args(backtest)
    _add_format(backtest)

    pipeline = sub.add_parser("pipeline", help="Prever, otimizar, simular e gravar artefatos")
    _add_league_args(pipeline)
    _add_solver_args(pipeline)
    _add_feature_args(pipeline, required=False)
    _add_eval_args(pipeline)
    pipeline.add_argument("--outcomes", type=Path, default=None)
    pipeline.add_argument("--output", type=Path, default=None, help="Diretório dos artefatos")
    _add_format(pipeline)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Ponto de entrada; retorna 0 em sucesso, 1 em erro de domínio e 2 em erro de argumentos."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    setup_logging(args.log_level)
    handlers = {
        "predict": _predict,
        "optimize": _optimize,
        "simulate": _simulate,
        "backtest": _backtest,
        "pipeline": _pipeline,
    }
    try:
        handlers[args.command](args)
    except ValidationError as e:
        logger.error(f"[{args.command}] Configuração inválida: {e.errors()[0]['msg']}")
        return 1
    except SeasonError as e:
        logger.error(f"[{args.command}] {e}")
        return 1
    return 0


def _predict(args: argparse.Namespace) -> None:
    played = IngestService.load_features(args.played_features, require_labels=True)
    remaining = IngestService.load_features(args.remaining_features)
    prediction = PipelineService.train_models(
        played,
        remaining,
        l2_grid=args.l2_grid or [1e-4, 1e-3, 1e-2],
        use_pca=bool(args.pca),
        calibrate=not args.no_calibrate,
        holdout_fraction=args.holdout,
        seed=args.seed,
    )
    args.output.mkdir(parents=True, exist_ok=True)
    ids = np.arange(prediction.optimizer_probs.shape[0])
    IngestService.write_probabilities(prediction.optimizer_probs, ids, args.output / "probs.csv")
    IngestService.write_probabilities(prediction.evaluator_probs, ids, args.output / "eval_probs.csv")
    (args.output / "model.json").write_text(prediction.optimizer_model.model_dump_json(indent=2))
    if args.format == "csv":
        _print_csv(pd.DataFrame({"game_id": ids, "prob": prediction.optimizer_probs}))
    else:
        _print_json(prediction.cv.model_dump())


def _optimize(args: argparse.Namespace) -> None:
    config = _run_config(args)
    state = PipelineService.load_league(config)
    outcome = PipelineService.optimize(state, config.solver_options(), config=config)
    schedule = outcome.schedule or Schedule(selected=np.zeros(state.n_games))
    if args.schedule_out is not None:
        IngestService.write_schedule(schedule, args.schedule_out)
    if args.format == "csv":
        _print_csv(pd.DataFrame({"game_id": np.arange(state.n_games), "selected": schedule.selected}))
    else:
        _print_json({"solver": outcome.solver.value, **outcome.summary, "game_ids": schedule.game_ids})


def _simulate(args: argparse.Namespace) -> None:
    config = _run_config(args)
    state = PipelineService.load_league(config)
    schedule = None if args.schedule is None else IngestService.load_schedule(args.schedule, state.n_games)
    sim_probs = None
    if args.sim_probs is not None:
        sim_probs = IngestService.load_probabilities(args.sim_probs, state.n_games).tolist()
    eval_config = EvalConfig(
        replications=config.replications,
        base_seed=config.seed,
        sim_probs=sim_probs,
        cutoffs=config.cutoffs,
        keep_replications=args.format == "csv",
    )
    report = SimulationService.simulate(state, schedule, eval_config)
    if args.format == "csv":
        _print_csv(report.per_replication)
    else:
        _print_json(report.to_dict())


def _backtest(args: argparse.Namespace) -> None:
    config = _run_config(args)
    state = PipelineService.load_league(config)
    schedule = None if args.schedule is None else IngestService.load_schedule(args.schedule, state.n_games)
    actual = IngestService.load_outcomes(args.outcomes, state.n_games)
    report = SimulationService.backtest(state, schedule, actual, config.cutoffs)
    if args.format == "csv":
        _print_csv(pd.DataFrame([{"concordance": report.mean_concordance, **report.agreement}]))
    else:
        _print_json(report.to_dict())


def _pipeline(args: argparse.Namespace) -> None:
    outcome = PipelineService.run(_run_config(args))
    if args.format == "csv":
        _print_csv(pd.DataFrame({"game_id": np.arange(len(outcome.schedule)), "selected": outcome.schedule.selected}))
    else:
        _print_json(outcome.report)


def _run_config(args: argparse.Namespace) -> RunConfig:
    """RunConfig a partir dos argumentos presentes no subcomando."""
    values: dict[str, Any] = {
        "teams_path": args.teams,
        "remaining_path": args.remaining,
        "short_season_length": args.m,
        "full_season_length": args.m_hat,
        "targets_path": args.targets,
        "probs_path": args.probs,
        "clamp_probabilities": args.clamp,
    }
    optional = {
        "solver": "solver",
        "sos_epsilon": "sos_epsilon",
        "saa_scenarios": "saa_scenarios",
        "search_budget": "search_budget",
        "search_restarts": "search_restarts",
        "candidate_probs_paths": "candidate_probs",
        "seed": "seed",
        "replications": "replications",
        "played_features_path": "played_features",
        "remaining_features_path": "remaining_features",
        "l2_grid": "l2_grid",
        "use_pca": "pca",
        "holdout_fraction": "holdout",
        "outcomes_path": "outcomes",
        "output_dir": "output",
    }
    for field, attr in optional.items():
        value = getattr(args, attr, None)
        if value is not None:
            values[field] = value
    if getattr(args, "no_calibrate", False):
        values["calibrate"] = False
    if getattr(args, "playoff_cutoff", None) is not None:
        values["cutoffs"] = AgreementCutoffs(
            playoff=args.playoff_cutoff, home_court=args.home_court_cutoff, lottery=args.lottery_cutoff
        )
    try:
        return RunConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"Configuração inválida: {e.errors()[0]['msg']}")


def _add_league_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--teams", type=Path, required=True, help="teams.csv")
    parser.add_argument("--remaining", type=Path, required=True, help="remaining.csv")
    parser.add_argument("--m", type=int, required=True, help="Jogos por time na temporada reduzida")
    parser.add_argument("--m-hat", type=int, default=None, help="Jogos por time na temporada completa")
    parser.add_argument("--targets", type=Path, default=None, help="Metas explícitas por time")
    parser.add_argument("--probs", type=Path, default=None, help="probs.csv")
    parser.add_argument("--clamp", action="store_true", help="Corta probabilidades fora de (0,1)")


def _add_solver_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--solver", choices=[s.value for s in Solver], default=Solver.PW_FW.value)
    parser.add_argument("--sos-epsilon", type=float, default=None)
    parser.add_argument("--saa-scenarios", type=int, default=None)
    parser.add_argument("--search-budget", type=int, default=None)
    parser.add_argument("--search-restarts", type=int, default=None)
    parser.add_argument("--candidate-probs", type=Path, action="append", default=None,
                        help="Probabilidades candidatas do PW-MMR (repetível)")


def _add_feature_args(parser: argparse.ArgumentParser, required: bool) -> None:
    parser.add_argument("--played-features", type=Path, required=required)
    parser.add_argument("--remaining-features", type=Path, required=required)
    parser.add_argument("--l2-grid", type=float, nargs="+", default=None)
    parser.add_argument("--pca", action="store_true", default=None)
    parser.add_argument("--no-calibrate", action="store_true")
    parser.add_argument("--holdout", type=float, default=None if not required else 0.2)


def _add_eval_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--replications", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    _add_cutoff_args(parser)


def _add_cutoff_args(parser: argparse.ArgumentParser) -> None:
    defaults = AgreementCutoffs()
    parser.add_argument("--playoff-cutoff", type=int, default=defaults.playoff)
    parser.add_argument("--home-court-cutoff", type=int, default=defaults.home_court)
    parser.add_argument("--lottery-cutoff", type=int, default=defaults.lottery)


def _add_format(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=["json", "csv"], default="json")


def _print_json(payload: Any) -> None:
    sys.stdout.write(json.dumps(payload, indent=2, default=_to_builtin) + "\n")


def _print_csv(frame: pd.DataFrame) -> None:
    frame.to_csv(sys.stdout, index=False)


def _to_builtin(value: Any) -> Any:
    if isinstance(value, (np.generic, np.ndarray)):
        return value.tolist()
    return str(value)


if __name__ == "__main__":
    sys.exit(main())
