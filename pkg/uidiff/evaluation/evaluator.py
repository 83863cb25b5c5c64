# ------------------------------------------------------------------------------
# Reference: https://github.com/facebookresearch/detectron2/blob/main/detectron2/evaluation/evaluator.py
# Reworked to run change detectors over manifest pairs, optionally in a process pool
# ------------------------------------------------------------------------------
import datetime
import logging
import multiprocessing as mp
import time
from collections import OrderedDict, abc
from typing import List, Optional, Sequence, Union

import numpy as np
import tqdm

from uidiff.data.detection import DetectorNoise, load_detections
from uidiff.data.manifest import PairRecord
from uidiff.modeling.report import ChangeReport
from uidiff.utils.logger import log_every_n_seconds

__all__ = ["DatasetEvaluator", "DatasetEvaluators", "run_pair", "inference_on_dataset"]


class DatasetEvaluator:
    """
    Base class for a dataset evaluator.

    The function :func:`inference_on_dataset` runs a change detector over all pairs
    of a manifest, and has a DatasetEvaluator process every (pair, report).

    This class will accumulate information of the inputs/outputs (by :meth:`process`),
    and produce evaluation results in the end (by :meth:`evaluate`).
    """

    def reset(self):
        """
        Preparation for a new round of evaluation.
        Should be called before starting a round of evaluation.
        """
        pass

    def process(self, record: PairRecord, report: ChangeReport):
        """
        Process one pair and the report the detector produced for it.
        """
        pass

    def evaluate(self):
        """
        Evaluate/summarize the performance, after processing all pairs.

        Returns:
            dict: arbitrary format, as long as the caller can process it.
        """
        pass


class DatasetEvaluators(DatasetEvaluator):
    """
    Wrapper class to combine multiple :class:`DatasetEvaluator` instances.
    """

    def __init__(self, evaluators):
        super().__init__()
        self._evaluators = evaluators

    def reset(self):
        for evaluator in self._evaluators:
            evaluator.reset()

    def process(self, record, report):
        for evaluator in self._evaluators:
            evaluator.process(record, report)

    def evaluate(self):
        results = OrderedDict()
        for evaluator in self._evaluators:
            result = evaluator.evaluate()
            if result is not None:
                for k, v in result.items():
                    assert k not in results, "Different evaluators produce results with the same key {}".format(k)
                    results[k] = v
        return results


def run_pair(task) -> ChangeReport:
    """
    Load one pair and run ``detector`` on it. Detections come from the pair's stored
    annotations, degraded by ``noise`` with a generator seeded per pair and side.
    """
    detector, record, noise, seed = task
    img_a, img_b = record.load_images()
    if getattr(detector, "needs_detections", True):
        dets = []
        for side_index, side in enumerate(("original", "changed")):
            rng = np.random.default_rng([int(seed), int(record.seed), side_index])
            dets.append(load_detections(record.detector_source(side), noise, rng))
        dets_a, dets_b = dets
    else:
        dets_a = dets_b = None
    return detector(img_a, dets_a, img_b, dets_b)


def inference_on_dataset(
    detector,
    records: Sequence[PairRecord],
    evaluator: Union[DatasetEvaluator, List[DatasetEvaluator], None],
    noise: Optional[DetectorNoise] = None,
    seed: int = 0,
    jobs: int = 1,
):
    """
    Run ``detector`` on every pair and evaluate the reports with ``evaluator``.

    Reports are produced in ``records`` order whatever ``jobs`` is, so the results
    do not depend on the degree of parallelism.

    Returns:
        The return value of `evaluator.evaluate()`
    """
    logger = logging.getLogger(__name__)
    total = len(records)
    logger.info("Start inference on {} pairs with {}".format(total, type(detector).__name__))

    if evaluator is None:
        # create a no-op evaluator
        evaluator = DatasetEvaluators([])
    if isinstance(evaluator, abc.MutableSequence):
        evaluator = DatasetEvaluators(evaluator)
    evaluator.reset()

    tasks = [(detector, record, noise, seed) for record in records]
    start_time = time.perf_counter()
    pool = mp.Pool(jobs) if jobs > 1 and total > 1 else None
    try:
        reports = pool.imap(run_pair, tasks) if pool is not None else map(run_pair, tasks)
        for idx, (record, report) in enumerate(tqdm.tqdm(zip(records, reports), total=total, desc="eval")):
            evaluator.process(record, report)
            seconds_per_pair = (time.perf_counter() - start_time) / (idx + 1)
            eta = datetime.timedelta(seconds=int(seconds_per_pair * (total - idx - 1)))
            log_every_n_seconds(
                logging.INFO,
                f"Inference done {idx + 1}/{total}. {seconds_per_pair:.4f} s/pair. ETA={eta}",
                n=5,
            )
    finally:
        if pool is not None:
            pool.close()
            pool.join()

    total_time = time.perf_counter() - start_time
    logger.info(
        "Total inference time: {} ({:.6f} s / pair, {} jobs)".format(
            str(datetime.timedelta(seconds=total_time)), total_time / max(total, 1), jobs
        )
    )

    results = evaluator.evaluate()
    if results is None:
        results = {}
    return results
