"""
Main Orchestrator for NOMA Channel-Assignment Experiments

Coordinates all modules to:
1. Train a policy and write its metrics, validation log and checkpoint
2. Evaluate a checkpoint against random assignment and exhaustive search
3. Solve single instances exactly (oracle) or allocate power for given pairs (jra)
4. Sweep one experiment axis and aggregate the results
"""

import time
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from .config.run_config import RunConfig, SweepSpec
from .config.settings import get_settings
from .environment.episode import assignment_from_actions
from .environment.network import generate_instance, instance_to_frame
from .exceptions import BudgetExceeded, Infeasible, NomaDrlError
from .jra.evaluator import allocate_pairs, allocation_to_frame, evaluate_assignment, random_assignment_rate
from .jra.power_allocation import ChannelPair
from .oracle.exhaustive_search import search
from .policy.network import PolicyParameters, load_params, save_params
from .policy.rollout import GREEDY, rollout
from .trainer.trainer import train, write_metrics
from .utils.csv_io import read_csv, write_csv
from .utils.logger import get_logger
from .utils.seeding import EVALUATION, SWEEP, derive_seed, derive_seeds

logger = get_logger("noma_drl.main")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2
EXIT_BUDGET = 3

CHECKPOINT_NAME = "model.bin"
RANDOM_DRAWS = 100
DEFAULT_EVAL_SEEDS = 4


def _format_assignment(assignment: Sequence[int]) -> str:
    return ";".join(str(int(c)) for c in assignment)


class ExperimentHarness:
    """
    Experiment harness around one run configuration.

    Each cmd_* method mirrors one command-line subcommand.
    """

    def __init__(self, config: RunConfig):
        self.config = config
        logger.info("=" * 60)
        logger.info("INITIALIZING EXPERIMENT HARNESS")
        logger.info("=" * 60)
        logger.info(f"N={config.env.n_users}, P_T={config.env.p_t} W, F={config.env.n_features}, "
                    f"arch={config.arch.kind} {list(config.arch.hidden_sizes)}, seed={config.master_seed}")

    def output_dir(self, override: Optional[str] = None) -> Path:
        if override:
            return Path(override)
        if "output_dir" in self.config.values:
            return Path(self.config.output_dir)
        return Path(get_settings().output_dir)

    def cmd_train(self, out_dir: Optional[str] = None) -> int:
        """
        Train, then write metrics.csv, validation.csv and the checkpoint.

        Returns:
            EXIT_OK when converged, EXIT_NOT_CONVERGED otherwise
        """
        out = self.output_dir(out_dir)
        cfg = self.config
        result = train(cfg.env, cfg.train, cfg.master_seed, cfg.arch)

        metrics_path, validation_path = write_metrics(result.metrics, out)
        save_params(result.baseline, out / CHECKPOINT_NAME)
        logger.info(f"Metrics: {metrics_path}")
        logger.info(f"Validation: {validation_path}")

        if not result.converged:
            logger.warning(f"No convergence within {cfg.train.max_episodes} episodes")
            return EXIT_NOT_CONVERGED
        logger.info(f"✓ Converged after {result.episodes_run} episodes")
        return EXIT_OK

    def evaluate_policy(self, params: PolicyParameters, seeds: Sequence[int]) -> pd.DataFrame:
        """
        Per-seed sum rates of the greedy policy, random assignment and exhaustive search.

        ES columns and the error are left empty when the oracle budget
        refuses the instance size.

        Returns:
            DataFrame with columns seed,r_drl,r_random_mean,r_es_max,r_es_min,error
            (plus inference_s when wall-time recording is enabled)
        """
        env = self.config.env
        expected = (env.n_users, env.n_channels, env.n_features)
        if tuple(params.arch.input_dims) != expected:
            raise ValueError(f"model input dims {params.arch.input_dims} do not match configuration {expected}")

        rows = []
        budget_refused = False
        for seed in seeds:
            instance = generate_instance(env, seed)
            start = time.perf_counter()
            actions, _ = rollout(params, instance, GREEDY)
            inference_s = time.perf_counter() - start
            try:
                r_drl = evaluate_assignment(instance, assignment_from_actions(actions, env.n_users), env).sum_rate
            except Infeasible:
                logger.warning(f"Seed {seed}: greedy assignment infeasible")
                r_drl = 0.0

            row = {
                "seed": int(seed),
                "r_drl": r_drl,
                "r_random_mean": random_assignment_rate(instance, env, RANDOM_DRAWS, seed),
                "r_es_max": np.nan,
                "r_es_min": np.nan,
                "error": np.nan,
            }
            if not budget_refused:
                try:
                    result = search(instance, env, self.config.train.oracle_budget)
                    row.update(r_es_max=result.r_max, r_es_min=result.r_min, error=result.error_rate(r_drl))
                except BudgetExceeded as exc:
                    logger.warning(f"Exhaustive search skipped: {exc}")
                    budget_refused = True
            if self.config.train.record_wall_time:
                row["inference_s"] = inference_s
            rows.append(row)
            logger.debug(f"Seed {seed}: {row}")

        return pd.DataFrame(rows)

    def cmd_eval(self, model_path: str, seeds: Optional[Sequence[int]] = None,
                 out_path: Optional[str] = None) -> int:
        """Evaluate a checkpoint; CSV to out_path or standard output."""
        logger.info("=" * 60)
        logger.info("EVALUATION")
        logger.info("=" * 60)
        params = load_params(model_path)
        seeds = list(seeds) if seeds else derive_seeds(self.config.master_seed, EVALUATION, DEFAULT_EVAL_SEEDS)
        frame = self.evaluate_policy(params, seeds)
        write_csv(frame, out_path)
        return EXIT_OK

    def cmd_oracle(self, seed: Optional[int] = None, dump_instance: Optional[str] = None,
                   out_path: Optional[str] = None) -> int:
        """
        Exhaustive search on one instance; one CSV row.

        Raises:
            BudgetExceeded: The instance is above the oracle budget
        """
        env = self.config.env
        seed = self.config.master_seed if seed is None else int(seed)
        instance = generate_instance(env, seed)
        if dump_instance:
            write_csv(instance_to_frame(instance), dump_instance)
            logger.info(f"Instance written to {dump_instance}")

        result = search(instance, env, self.config.train.oracle_budget)
        frame = pd.DataFrame([{
            "seed": seed,
            "n": env.n_users,
            "k": env.n_channels,
            "p_t": env.p_t,
            "r_max": result.r_max,
            "r_min": result.r_min,
            "n_evaluated": result.n_evaluated,
            "n_infeasible": result.n_infeasible,
            "best_assignment": _format_assignment(result.best_assignment),
            "worst_assignment": _format_assignment(result.worst_assignment),
        }])
        write_csv(frame, out_path)
        return EXIT_OK

    def cmd_jra(self, pairs_path: str, p_t: Optional[float] = None, out_path: Optional[str] = None) -> int:
        """
        Power allocation for explicit channel pairs.

        The input CSV has one row per channel with columns gamma1,gamma2
        (CNR in 1/W, any order). The total bandwidth is split evenly over
        the listed channels.
        """
        env = self.config.env
        table = read_csv(pairs_path, required_columns=["gamma1", "gamma2"])
        if table.empty:
            raise ValueError(f"{pairs_path}: no channel pairs")
        a = env.rate_factor
        pairs = [
            ChannelPair.ordered(2 * i, 2 * i + 1, float(row.gamma1), float(row.gamma2), a)
            for i, row in enumerate(table.itertuples(index=False))
        ]
        total_power = env.p_t if p_t is None else float(p_t)
        allocation = allocate_pairs(pairs, total_power, env.b_tot / len(pairs))
        write_csv(allocation_to_frame(allocation), out_path)
        return EXIT_OK

    def cmd_sweep(self, spec: SweepSpec, out_dir: Optional[str] = None,
                  n_eval_seeds: int = DEFAULT_EVAL_SEEDS) -> pd.DataFrame:
        """
        Train and evaluate every (value, repeat) of one axis.

        Per-run metrics go to <out>/<axis>/<value>/repeat-<r>/; the aggregated
        table to <out>/sweep_<axis>.csv. A failing run is recorded in its
        row's status and the sweep continues.

        Returns:
            The aggregated table
        """
        out = self.output_dir(out_dir)
        spec.validate_against(self.config)

        logger.info("=" * 60)
        logger.info(f"SWEEP STARTED: {spec.axis} over {list(spec.values)}, {spec.repeats} repeat(s)")
        logger.info("=" * 60)

        rows: List[dict] = []
        for value in spec.values:
            for repeat in range(spec.repeats):
                run_seed = derive_seed(self.config.master_seed, SWEEP, repeat)
                run_dir = out / spec.axis / str(value) / f"repeat-{repeat}"
                row = {"axis": spec.axis, "value": value, "repeat": repeat, "seed": run_seed}
                logger.info(f"→ {spec.axis}={value}, repeat {repeat}")
                try:
                    row.update(self._sweep_run(spec.apply(self.config, value).with_seed(run_seed),
                                               run_dir, n_eval_seeds))
                except (NomaDrlError, ValueError) as exc:
                    logger.error(f"✗ Run {spec.axis}={value} repeat {repeat} failed: {exc}", exc_info=True)
                    row["status"] = f"failed: {exc}"
                rows.append(row)

        frame = pd.DataFrame(rows, columns=[
            "axis", "value", "repeat", "seed", "status", "converged", "episodes", "wall_s",
            "mean_sum_rate", "mean_random_rate", "mean_es_max", "mean_error", "max_error",
        ])
        path = out / f"sweep_{spec.axis}.csv"
        write_csv(frame, path)
        logger.info("=" * 60)
        logger.info(f"SWEEP COMPLETE: {len(rows)} runs, table at {path}")
        logger.info("=" * 60)
        return frame

    def _sweep_run(self, config: RunConfig, run_dir: Path, n_eval_seeds: int) -> dict:
        start = time.perf_counter()
        result = train(config.env, config.train, config.master_seed, config.arch)
        wall_s = time.perf_counter() - start if config.train.record_wall_time else 0.0
        write_metrics(result.metrics, run_dir)
        save_params(result.baseline, run_dir / CHECKPOINT_NAME)

        seeds = derive_seeds(config.master_seed, EVALUATION, n_eval_seeds)
        evaluation = ExperimentHarness(config).evaluate_policy(result.baseline, seeds)
        write_csv(evaluation, run_dir / "evaluation.csv")
        return {
            "status": "ok",
            "converged": result.converged,
            "episodes": result.episodes_run,
            "wall_s": wall_s,
            "mean_sum_rate": evaluation["r_drl"].mean(),
            "mean_random_rate": evaluation["r_random_mean"].mean(),
            "mean_es_max": evaluation["r_es_max"].mean(),
            "mean_error": evaluation["error"].mean(),
            "max_error": evaluation["error"].max(),
        }
