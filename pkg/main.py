"""
============================================================================
Módulo: main.py
Projeto: SORS - Aprendizado Esparso Online de Similaridade Relativa
============================================================================

DESCRIÇÃO:
    Ponto de entrada principal e orquestrador dos experimentos. Cada
    subcomando executa uma etapa do protocolo: carregar o dataset, dividir
    70/30, sortear trios, treinar, avaliar e gravar os artefatos.

SUBCOMANDOS:
    train      Treina um algoritmo e grava curve.csv, model.txt e report.json
    eval       Avalia um model.txt no conjunto de teste (JSON no stdout)
    bench      Compara algoritmos na mesma sequência de trios (bench.csv)
    sweep      Curva esparsidade x MAP sobre uma grade de lambda (tradeoff.csv)
    querytime  Custo de consulta de um modelo (query_time.csv)
    synth      Gera um dataset sintético em formato LIBSVM

FLUXO DO TREINO:
    CARREGAR_DATASET → SPLIT_70_30 → AMOSTRADOR → TREINO (com checkpoints)
    → AVALIAÇÃO FINAL → ARTEFATOS

CÓDIGOS DE SAÍDA:
    0  sucesso
    1  erro de dados/IO (arquivo inexistente, parse, dimensão)
    2  erro de uso (hiperparâmetro inválido, flag desconhecida)

DEPENDÊNCIAS:
    - config.settings: ExperimentConfig e build_config()
    - etl.etl / etl.synthetic: dados, split e amostrador
    - learners.learners: aprendizes online
    - report.build_report / report.metrics: avaliação e regret
============================================================================
"""

# ============================================================================
# IMPORTAÇÕES
# ============================================================================
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import pandas as pd

from config.settings import ALGORITHMS, DEFAULT_SEED, ExperimentConfig, build_config, setup_logging
from core.exceptions import ConfigError, SorsError
from core.serialization import load_model, save_model
from etl.etl import LabeledDataset, SplitSpec, TripletSampler, load_libsvm, save_libsvm, split
from etl.synthetic import make_onehot_dataset, make_sparse_dataset
from learners.learners import LearnerConfig, LearnerState, StepRecord, run
from report.build_report import EvalReport, evaluate_retrieval, measure_query_time, write_report
from report.metrics import RegretTrace, reference_objective, regret_vs_reference

logger = setup_logging("main_orchestrator", "system.log")

CURVE_COLUMNS = ["iter", "map", "sparsity", "mean_loss", "seconds"]
BENCH_COLUMNS = ["algo", "map", "sparsity", "train_seconds", "nnz"]
TRADEOFF_COLUMNS = ["lambda", "map", "sparsity", "nnz"]


# ============================================================================
# EXECUÇÃO DE UM TREINO
# ============================================================================
@dataclass(frozen=True)
class TrainingRun:
    """Resultado de um treino: estado final, traço, tempo e hash da sequência."""
    state: LearnerState
    trace: list[StepRecord]
    train_seconds: float
    sequence_hash: str


def learner_config(config: ExperimentConfig, algorithm: str, dim: int, lam: float | None = None) -> LearnerConfig:
    """
    Converte o ExperimentConfig nos hiperparâmetros de um aprendiz.

    Args:
        config (ExperimentConfig): Configuração do experimento
        algorithm (str): Algoritmo a treinar
        dim (int): Dimensão global do dataset
        lam (float, optional): Substitui o lambda efetivo (usado pelo sweep)
    """
    params = config.params_for(algorithm)
    return LearnerConfig(
        algorithm=algorithm,
        dim=dim,
        lam=params["lam"] if lam is None else lam,
        eta=params["eta"],
        delta=params["delta"],
        aggressiveness_c=params["c"],
    )


def load_split(config: ExperimentConfig) -> tuple[LabeledDataset, LabeledDataset]:
    """Carrega o dataset configurado e aplica o split estratificado."""
    if not config.dataset_path:
        raise ConfigError("Nenhum dataset informado (use --dataset ou 'dataset_path' no config)")
    ds = load_libsvm(config.dataset_path, dim=config.dim, reject_zeros=config.reject_zeros)
    return split(ds, SplitSpec(train_fraction=config.train_fraction, seed=config.seed))


def train_once(learner: LearnerConfig, train: LabeledDataset, seed: int, iterations: int,
               eval_every: int | None = None,
               on_checkpoint: Callable[[LearnerState, float], None] | None = None) -> TrainingRun:
    """
    Treina um aprendiz sobre uma sequência nova de trios com a semente dada.

    O relógio de treino pausa durante os checkpoints, então o tempo
    informado cobre apenas as atualizações do modelo.

    Args:
        learner (LearnerConfig): Hiperparâmetros
        train (LabeledDataset): Conjunto de treino
        seed (int): Semente do amostrador
        iterations (int): Número de trios T
        eval_every (int, optional): Período dos checkpoints
        on_checkpoint (Callable, optional): Recebe (estado, segundos de treino)
            a cada eval_every passos e no último passo
    """
    sampler = TripletSampler(train, rng_seed=seed)
    relogio = {"acumulado": 0.0, "marco": time.monotonic()}

    def _ao_passar(state: LearnerState) -> None:
        if on_checkpoint is None:
            return
        if state.step_count % eval_every == 0 or state.step_count == iterations:
            relogio["acumulado"] += time.monotonic() - relogio["marco"]
            on_checkpoint(state, round(relogio["acumulado"], 3))
            relogio["marco"] = time.monotonic()

    state, trace = run(learner, sampler.stream(iterations), on_step=_ao_passar)
    relogio["acumulado"] += time.monotonic() - relogio["marco"]
    logger.info(f"[{learner.algorithm}] sequência de trios sha256={sampler.sequence_hash} ({sampler.count} trios)")
    return TrainingRun(state, trace, round(relogio["acumulado"], 3), sampler.sequence_hash)


# ============================================================================
# SUBCOMANDOS
# ============================================================================
def cmd_train(config: ExperimentConfig, reference_path: str | None = None) -> dict[str, Path]:
    """
    Treina config.algorithm e grava os artefatos em config.output_dir.

    Artefatos:
        - curve.csv: iter, map, sparsity, mean_loss, seconds (um por checkpoint)
        - model.txt: modelo final
        - report.json / report.csv: avaliação final no conjunto de teste
        - regret.json: apenas quando reference_path é informado

    Returns:
        dict: Nome do artefato -> caminho gravado
    """
    logger.info("=" * 60)
    logger.info(f"TREINO: {config.algorithm} em {config.dataset_path}")
    logger.info("=" * 60)

    train, test = load_split(config)
    learner = learner_config(config, config.algorithm, train.dim)
    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    linhas_curva = []

    def _checkpoint(state: LearnerState, segundos: float) -> None:
        report = evaluate_retrieval(state.model, test, config.ks)
        linhas_curva.append({
            "iter": state.step_count,
            "map": report.map,
            "sparsity": report.sparsity,
            "mean_loss": state.cumulative_loss / state.step_count,
            "seconds": segundos,
        })
        logger.info(f"Checkpoint {state.step_count}: MAP={report.map:.4f}, esparsidade={report.sparsity:.4f}")

    resultado = train_once(learner, train, config.seed, config.iterations,
                           eval_every=config.eval_every, on_checkpoint=_checkpoint)

    artefatos = {}
    artefatos["curve"] = output_dir / "curve.csv"
    pd.DataFrame(linhas_curva, columns=CURVE_COLUMNS).to_csv(artefatos["curve"], index=False)
    artefatos["model"] = save_model(resultado.state.model, output_dir / "model.txt")

    report = evaluate_retrieval(resultado.state.model, test, config.ks)
    artefatos["report"], _ = write_report(report, output_dir, algo=config.algorithm)

    if reference_path:
        artefatos["regret"] = _gravar_regret(config, learner, train, resultado, reference_path, output_dir)

    logger.info(f"Artefatos do treino: {', '.join(str(p) for p in artefatos.values())}")
    return artefatos


def _gravar_regret(config: ExperimentConfig, learner: LearnerConfig, train: LabeledDataset,
                   resultado: TrainingRun, reference_path: str, output_dir: Path) -> Path:
    """Compara o objetivo acumulado com um modelo de referência na mesma sequência."""
    referencia = load_model(reference_path)
    lam = learner.lam if learner.is_sparse else 0.0
    sampler = TripletSampler(train, rng_seed=config.seed)
    objetivo_ref = reference_objective(referencia, sampler.stream(config.iterations), lam=lam,
                                       off_diagonal=learner.off_diagonal)
    trace = RegretTrace.from_records(resultado.trace, reference_objective=objetivo_ref)
    dados = {
        "steps": len(trace),
        "cumulative_objective": trace.total,
        "reference_objective": objetivo_ref,
        "regret": regret_vs_reference(trace),
    }
    caminho = output_dir / "regret.json"
    caminho.write_text(json.dumps(dados, indent=2) + "\n", encoding="utf-8")
    logger.info(f"Regret contra '{reference_path}': {dados['regret']:.6f} -> {caminho}")
    return caminho


def cmd_eval(config: ExperimentConfig, model_path: str, timing: bool = True) -> EvalReport:
    """
    Avalia um modelo salvo no conjunto de teste do split configurado e
    imprime o EvalReport em JSON no stdout.

    Args:
        config (ExperimentConfig): Dataset, fração de treino, semente e ks
        model_path (str): Caminho do model.txt
        timing (bool): Com False, wall_time_seconds sai como 0.0 e a saída
            fica idêntica entre execuções. Com True o tempo medido muda a
            cada chamada, então stdout só se repete com --no-timing

    Raises:
        ParseError: Arquivo de modelo malformado (com offset em bytes)
        DimensionError: Dimensão do modelo diferente da do dataset
    """
    logger.info("=" * 60)
    logger.info(f"AVALIAÇÃO: {model_path} em {config.dataset_path}")
    logger.info("=" * 60)
    model = load_model(model_path)
    _, test = load_split(config)
    report = evaluate_retrieval(model, test, config.ks)
    if not timing:
        report = replace(report, wall_time_seconds=0.0)
    print(report.to_json())
    return report


def cmd_bench(config: ExperimentConfig) -> pd.DataFrame:
    """
    Treina cada algoritmo de config.algorithms sobre a mesma sequência de
    trios (um amostrador novo com a mesma semente por algoritmo) e grava
    bench.csv com uma linha por algoritmo.

    Returns:
        pd.DataFrame: Colunas algo, map, sparsity, train_seconds, nnz
    """
    logger.info("=" * 60)
    logger.info(f"BENCHMARK: {config.algorithms} em {config.dataset_path}")
    logger.info("=" * 60)

    train, test = load_split(config)
    linhas = []
    hashes = set()
    for algoritmo in config.algorithms:
        resultado = train_once(learner_config(config, algoritmo, train.dim), train, config.seed, config.iterations)
        hashes.add(resultado.sequence_hash)
        report = evaluate_retrieval(resultado.state.model, test, config.ks)
        linhas.append({
            "algo": algoritmo,
            "map": report.map,
            "sparsity": report.sparsity,
            "train_seconds": resultado.train_seconds,
            "nnz": resultado.state.model.nnz,
        })
    if len(hashes) > 1:
        logger.warning(f"Algoritmos consumiram sequências de trios diferentes: {sorted(hashes)}")

    tabela = pd.DataFrame(linhas, columns=BENCH_COLUMNS)
    caminho = Path(config.output_dir) / "bench.csv"
    caminho.parent.mkdir(parents=True, exist_ok=True)
    tabela.to_csv(caminho, index=False)
    logger.info(f"Tabela do benchmark salva em '{caminho}'.")
    return tabela


def cmd_sweep(config: ExperimentConfig, lambdas: list[float]) -> pd.DataFrame:
    """
    Treina config.algorithm para cada lambda da grade, sempre na mesma
    sequência de trios, e grava tradeoff.csv (lambda, map, sparsity, nnz).
    """
    logger.info("=" * 60)
    logger.info(f"SWEEP de lambda: {config.algorithm}, grade={lambdas}")
    logger.info("=" * 60)
    if not lambdas:
        raise ConfigError("A grade de lambdas está vazia")

    train, test = load_split(config)
    linhas = []
    for lam in lambdas:
        if lam < 0:
            raise ConfigError(f"lambda deve ser não negativo (recebido {lam})")
        learner = learner_config(config, config.algorithm, train.dim, lam=lam)
        resultado = train_once(learner, train, config.seed, config.iterations)
        report = evaluate_retrieval(resultado.state.model, test, config.ks)
        linhas.append({"lambda": lam, "map": report.map, "sparsity": report.sparsity,
                       "nnz": resultado.state.model.nnz})

    tabela = pd.DataFrame(linhas, columns=TRADEOFF_COLUMNS)
    caminho = Path(config.output_dir) / "tradeoff.csv"
    caminho.parent.mkdir(parents=True, exist_ok=True)
    tabela.to_csv(caminho, index=False)
    logger.info(f"Curva de trade-off salva em '{caminho}'.")
    return tabela


def cmd_querytime(config: ExperimentConfig, model_path: str, sizes: list[int]) -> pd.DataFrame:
    """Mede o tempo de consulta de um modelo salvo e grava query_time.csv."""
    logger.info("=" * 60)
    logger.info(f"TEMPO DE CONSULTA: {model_path}, tamanhos={sizes}")
    logger.info("=" * 60)
    model = load_model(model_path)
    _, test = load_split(config)
    tabela = measure_query_time(model, test, sizes)
    caminho = Path(config.output_dir) / "query_time.csv"
    caminho.parent.mkdir(parents=True, exist_ok=True)
    tabela.to_csv(caminho, index=False)
    logger.info(f"Tempos de consulta salvos em '{caminho}'.")
    return tabela


def cmd_synth(kind: str, out: str, n_classes: int = 3, per_class: int = 20, dim: int | None = None,
              n_items: int = 500, density: float = 0.01, seed: int = DEFAULT_SEED) -> Path:
    """
    Gera um dataset sintético e grava em LIBSVM.

    Args:
        kind (str): 'onehot' (classes ortogonais) ou 'sparse' (assinatura por classe)
        out (str): Caminho do arquivo de saída
    """
    if kind == "onehot":
        ds = make_onehot_dataset(n_classes, per_class, dim)
    elif kind == "sparse":
        if dim is None:
            raise ConfigError("O dataset 'sparse' exige --dim")
        ds = make_sparse_dataset(dim, n_classes, n_items, density, seed)
    else:
        raise ConfigError(f"Tipo de dataset sintético desconhecido: '{kind}'")
    return save_libsvm(ds, out)


# ============================================================================
# INTERFACE DE LINHA DE COMANDO
# ============================================================================
def _lista(conversor: Callable):
    """Tipo do argparse para listas separadas por vírgula (ex: '1,5,10')."""
    def _converter(texto: str) -> list:
        try:
            return [conversor(item) for item in texto.split(",") if item.strip()]
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"Lista inválida '{texto}': {e}") from e
    return _converter


def build_parser() -> argparse.ArgumentParser:
    """Monta o parser com os subcomandos e as flags compartilhadas."""
    comum = argparse.ArgumentParser(add_help=False)
    comum.add_argument("--config", dest="config_path", metavar="PATH", help="Arquivo JSON com chaves do ExperimentConfig")
    comum.add_argument("--preset", help="Hiperparâmetros de config/presets.json (protein, caltech50, gisette, bbc)")
    comum.add_argument("--dataset", dest="dataset_path", metavar="PATH", help="Arquivo LIBSVM (.gz aceito)")
    comum.add_argument("--algo", dest="algorithm", choices=ALGORITHMS)
    comum.add_argument("--lambda", dest="lam", type=float, metavar="F")
    comum.add_argument("--eta", type=float, metavar="F")
    comum.add_argument("--delta", type=float, metavar="F")
    comum.add_argument("--c", type=float, metavar="F")
    comum.add_argument("--iters", dest="iterations", type=int, metavar="N")
    comum.add_argument("--eval-every", dest="eval_every", type=int, metavar="N")
    comum.add_argument("--seed", type=int, metavar="N")
    comum.add_argument("--train-fraction", dest="train_fraction", type=float, metavar="F")
    comum.add_argument("--out", dest="output_dir", metavar="DIR")
    comum.add_argument("--k", dest="ks", type=_lista(int), metavar="LIST", help="Cortes do P@k, ex: 1,5,10")
    comum.add_argument("--reject-zeros", dest="reject_zeros", action="store_true", default=None,
                       help="Recusa pares índice:0 explícitos no LIBSVM")

    parser = argparse.ArgumentParser(
        prog="sors",
        description="Aprendizado esparso online de similaridade bilinear a partir de trios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", parents=[comum], help="Treina um algoritmo")
    p_train.add_argument("--reference", metavar="PATH", help="Modelo de referência para regret.json")

    p_eval = sub.add_parser("eval", parents=[comum], help="Avalia um modelo salvo")
    p_eval.add_argument("--model", required=True, metavar="PATH")
    p_eval.add_argument("--no-timing", action="store_true",
                        help="Zera wall_time_seconds; só com esta flag a saída fica idêntica entre execuções")

    p_bench = sub.add_parser("bench", parents=[comum], help="Compara algoritmos")
    p_bench.add_argument("--algos", dest="algorithms", type=_lista(str), metavar="LIST")

    p_sweep = sub.add_parser("sweep", parents=[comum], help="Grade de lambda")
    p_sweep.add_argument("--lambdas", type=_lista(float), required=True, metavar="LIST")

    p_query = sub.add_parser("querytime", parents=[comum], help="Tempo de consulta")
    p_query.add_argument("--model", required=True, metavar="PATH")
    p_query.add_argument("--sizes", type=_lista(int), required=True, metavar="LIST")

    p_synth = sub.add_parser("synth", help="Gera um dataset sintético LIBSVM")
    p_synth.add_argument("--kind", choices=("onehot", "sparse"), default="onehot")
    p_synth.add_argument("--classes", dest="n_classes", type=int, default=3)
    p_synth.add_argument("--per-class", dest="per_class", type=int, default=20)
    p_synth.add_argument("--items", dest="n_items", type=int, default=500)
    p_synth.add_argument("--dim", type=int)
    p_synth.add_argument("--density", type=float, default=0.01)
    p_synth.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_synth.add_argument("--out", required=True, metavar="PATH")

    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Aplica preset, arquivo de configuração e flags explícitas, nessa ordem."""
    chaves = ("dataset_path", "algorithm", "algorithms", "lam", "eta", "delta", "c", "iterations",
              "eval_every", "seed", "train_fraction", "output_dir", "ks", "reject_zeros")
    overrides = {chave: getattr(args, chave, None) for chave in chaves}
    return build_config(preset=args.preset, config_path=args.config_path, overrides=overrides)


def main(argv: list[str] | None = None) -> int:
    """
    Interpreta os argumentos, executa o subcomando e devolve o código de saída.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    inicio = time.monotonic()
    logger.info("=" * 60)
    logger.info(f"PIPELINE INICIADO: {args.command}")
    logger.info("=" * 60)

    try:
        if args.command == "synth":
            cmd_synth(args.kind, args.out, n_classes=args.n_classes, per_class=args.per_class, dim=args.dim,
                      n_items=args.n_items, density=args.density, seed=args.seed)
        else:
            config = config_from_args(args)
            if args.command == "train":
                cmd_train(config, reference_path=args.reference)
            elif args.command == "eval":
                cmd_eval(config, args.model, timing=not args.no_timing)
            elif args.command == "bench":
                cmd_bench(config)
            elif args.command == "sweep":
                cmd_sweep(config, args.lambdas)
            elif args.command == "querytime":
                cmd_querytime(config, args.model, args.sizes)

    # ====================================================================
    # TRATAMENTO DE EXCEÇÕES
    # ====================================================================
    except ConfigError as e:
        logger.error(f"Configuração inválida: {e}")
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: erro de configuração: {e}", file=sys.stderr)
        return 2
    except (SorsError, OSError) as e:
        logger.critical("=" * 60)
        logger.critical(f"Ocorreu um erro crítico que interrompeu o pipeline: {e}", exc_info=True)
        logger.critical("PIPELINE FINALIZADO COM ERRO.")
        print(f"{parser.prog}: erro: {e}", file=sys.stderr)
        return 1
    except MemoryError:
        logger.critical("Memória insuficiente para o experimento (verifique a dimensão do dataset).", exc_info=True)
        print(f"{parser.prog}: erro: memória insuficiente; reduza a dimensão ou ajuste SORS_MAX_DIM", file=sys.stderr)
        return 1

    logger.info("=" * 60)
    logger.info(f"PIPELINE FINALIZADO COM SUCESSO em {math.floor((time.monotonic() - inicio) * 1000)} ms")
    logger.info("=" * 60)
    return 0


# ============================================================================
# PONTO DE ENTRADA DO PROGRAMA
# ============================================================================
if __name__ == "__main__":
    sys.exit(main())
