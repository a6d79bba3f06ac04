"""
Ensembles of independent trials
Deterministic per-trial seeds, an ordered worker pool and the EnsembleResult container with its JSON and CSV forms
"""

import os
import csv
import io
import json
import math
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from arithmetic.factor_table import FactorTable, build_factor_table
from experiments.statistics import mc_estimate
from settings import CODE_VERSION, worker_count

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "{:.17g}"
PROGRESS_EVERY = 100


def trial_seed(base_seed: int, index: int) -> int:
    """64-bit seed for trial `index`, derived from SeedSequence([base_seed, index])"""
    if base_seed < 0 or index < 0:
        raise ValueError(f"Seeds and indices must be non-negative, got {base_seed}, {index}")
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1, np.uint64)[0])


@lru_cache(maxsize=2)
def shared_table(limit: int) -> FactorTable:
    """Factor table reused by every trial run in this process"""
    return build_factor_table(int(limit))


def run_trials(worker: Callable, tasks: Sequence, workers: Optional[int] = None) -> List:
    """
    Apply worker to every task, results in task order

    With more than one worker the tasks go to a spawn-context pool; the worker
    must then be a module-level function.
    """
    workers = worker_count() if workers is None else max(1, int(workers))
    tasks = list(tasks)
    results = []
    if workers > 1 and len(tasks) > 1:
        from multiprocessing import get_context

        ctx = get_context("spawn")
        with ctx.Pool(processes=min(workers, len(tasks))) as pool:
            for i, result in enumerate(pool.imap(worker, tasks, chunksize=1), start=1):
                results.append(result)
                if i % PROGRESS_EVERY == 0:
                    logger.info(f"{i}/{len(tasks)} trials done")
    else:
        for i, task in enumerate(tasks, start=1):
            results.append(worker(task))
            if i % PROGRESS_EVERY == 0:
                logger.info(f"{i}/{len(tasks)} trials done")
    return results


def _flatten(record: Dict) -> Dict[str, object]:
    """Complex entries become <key>_re / <key>_im columns"""
    out = {}
    for key, value in record.items():
        if isinstance(value, complex):
            out[f"{key}_re"] = value.real
            out[f"{key}_im"] = value.imag
        else:
            out[key] = value
    return out


def _format(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT.format(float(value))
    return str(value)


def _jsonable(value):
    if isinstance(value, complex):
        return {'re': value.real, 'im': value.imag}
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


@dataclass
class EnsembleResult:
    """Per-trial records of one experiment plus aggregates recomputed from them"""

    name: str
    config: Dict
    records: List[Dict] = field(default_factory=list)
    aggregates: Dict = field(default_factory=dict)
    extra: Dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.aggregates:
            self.aggregates = self.aggregate(self.records)

    @staticmethod
    def aggregate(records: Sequence[Dict]) -> Dict[str, Dict[str, float]]:
        """Mean and standard error of every numeric column, in record order"""
        flat = [_flatten(r) for r in records]
        if not flat:
            return {}
        out = {}
        for key in flat[0]:
            if key == 'seed' or isinstance(flat[0][key], (bool, str)):
                continue
            values = [r[key] for r in flat]
            if all(isinstance(v, (int, float, np.integer, np.floating)) for v in values):
                mean, se = mc_estimate(np.asarray(values, dtype=float))
                out[key] = {'mean': mean, 'se': se}
        return out

    @property
    def trials(self) -> int:
        return len(self.records)

    def column(self, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.records])

    def columns(self) -> List[str]:
        return list(_flatten(self.records[0]).keys()) if self.records else []

    def to_json(self) -> str:
        document = {
            'name': self.name,
            'code_version': CODE_VERSION,
            'config': self.config,
            'trials': self.trials,
            'aggregates': self.aggregates,
            'results': self.extra,
        }
        return json.dumps(_jsonable(document), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        columns = self.columns()
        writer.writerow(columns)
        for record in self.records:
            flat = _flatten(record)
            writer.writerow([_format(flat[c]) for c in columns])
        return buffer.getvalue()

    def write(self, directory: str) -> Dict[str, str]:
        """Write <name>.summary.json and, when there are trials, <name>.trials.csv"""
        Path(directory).mkdir(parents=True, exist_ok=True)
        summary = os.path.join(directory, f"{self.name}.summary.json")
        with open(summary, "w") as f:
            f.write(self.to_json())
        paths = {'summary': summary}
        if self.records:
            trials = os.path.join(directory, f"{self.name}.trials.csv")
            with open(trials, "w", newline="") as f:
                f.write(self.to_csv())
            paths['trials'] = trials
        logger.info(f"Wrote {', '.join(paths.values())}")
        return paths
