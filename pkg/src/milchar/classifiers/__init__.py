from .catalog import (
    FAMILIES,
    ClassifierSpec,
    TrainedModel,
    TrainingError,
    catalog,
    catalog_index,
    find_classifiers,
    manifest,
    score_bags,
    train,
)

__all__ = [
    "FAMILIES",
    "ClassifierSpec",
    "TrainedModel",
    "TrainingError",
    "catalog",
    "catalog_index",
    "find_classifiers",
    "manifest",
    "score_bags",
    "train",
]
