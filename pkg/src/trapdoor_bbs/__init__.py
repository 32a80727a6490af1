"""Backward Blum-Blum-Shub classification task.

Uniform bit strings versus ``seed + G_N(seed)`` for the backward BBS
generator: easy to separate with the factorization of N, and (under the
quadratic residuosity assumption) at chance level without it.
"""

from .bbs import TrapdoorKey, generate, sample_record
from .bits import BitString
from .classify import (ClassifierConfig, distance_to_support_oracle, margin_bound,
                       robust_classify, trapdoor_classify, trivial_dummy_classify)
from .kernels import BACKEND
from .task import Dataset, TaskParams, keygen, make_dataset

__all__ = [
    "BACKEND", "BitString", "ClassifierConfig", "Dataset", "TaskParams", "TrapdoorKey",
    "distance_to_support_oracle", "generate", "keygen", "make_dataset", "margin_bound",
    "robust_classify", "sample_record", "trapdoor_classify", "trivial_dummy_classify",
]

__version__ = "0.1.0"
