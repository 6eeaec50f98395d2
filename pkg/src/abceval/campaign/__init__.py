from .campaign import (
    Annotator,
    AnnotationRecord,
    Assignment,
    Campaign,
    CampaignConfig,
    CampaignError,
    CapReachedError,
    GoldRound,
    NothingEligibleError,
    ScreeningFailedError,
    TrainingFeedback,
    TrainingRequiredError,
    TrainingState,
)
from .store import EventLog, atomic_write_json

__all__ = [
    "Annotator",
    "AnnotationRecord",
    "Assignment",
    "Campaign",
    "CampaignConfig",
    "CampaignError",
    "CapReachedError",
    "EventLog",
    "GoldRound",
    "NothingEligibleError",
    "ScreeningFailedError",
    "TrainingFeedback",
    "TrainingRequiredError",
    "TrainingState",
    "atomic_write_json",
]
