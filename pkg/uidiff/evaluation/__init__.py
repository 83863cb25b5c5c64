from .change_evaluation import (
    CSV_COLUMNS,
    ChangeEvaluator,
    EvaluationResult,
    ScoreTriple,
    evaluate_dataset,
    match_count,
    score_pair,
    select_split,
)
from .evaluator import DatasetEvaluator, DatasetEvaluators, inference_on_dataset
from .sweep import SweepTable, parse_fixed, parse_values, sweep
