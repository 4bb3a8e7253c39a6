from evaluation.metrics import ConfusionCounts, MetricReport, confusion, metrics, percent, round_half_up
from evaluation.mcnemar import McNemarMethod, McNemarResult, bh_adjust, compare_family, mcnemar, mcnemar_exact, mcnemar_midp
from evaluation.harness import (
    Comparison, EvaluationReport, GroupKind, GroupReport, PairedOutcomes, PredictionSet,
    SystemReport, evaluate_run, load_predictions, paired_outcomes,
)
from evaluation.tables import format_p, render_report
