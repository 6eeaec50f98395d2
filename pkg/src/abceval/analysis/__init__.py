from .extract import (
    LabelObservations,
    all_label_keys,
    extract_observations,
    interactor_quality_comparative,
    interactor_quality_dialogue,
    quality_labels,
)
from .pipelines import (
    ALPHA_LEVELS,
    AgreementEntry,
    AgreementReport,
    AnalysisError,
    CostReport,
    CostRow,
    ImportanceEntry,
    ImportanceReport,
    SensitivityCell,
    SensitivityTable,
    agreement_analysis,
    cost_analysis,
    cost_row,
    importance_analysis,
    power_report,
    sensitivity_analysis,
    stepwise_analysis,
    stepwise_methods,
    training_pass_rates,
)
from .bundle import write_report_bundle

__all__ = [
    "ALPHA_LEVELS",
    "AgreementEntry",
    "AgreementReport",
    "AnalysisError",
    "CostReport",
    "CostRow",
    "ImportanceEntry",
    "ImportanceReport",
    "LabelObservations",
    "SensitivityCell",
    "SensitivityTable",
    "agreement_analysis",
    "all_label_keys",
    "cost_analysis",
    "cost_row",
    "extract_observations",
    "importance_analysis",
    "interactor_quality_comparative",
    "interactor_quality_dialogue",
    "power_report",
    "quality_labels",
    "sensitivity_analysis",
    "stepwise_analysis",
    "stepwise_methods",
    "training_pass_rates",
    "write_report_bundle",
]
