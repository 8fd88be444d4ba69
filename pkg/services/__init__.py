from .data_service import data_service
from .optimizer_service import optimizer_service
from .baseline_service import baseline_service
from .evaluation_service import evaluation_service

__all__ = [
    'data_service',
    'optimizer_service',
    'baseline_service',
    'evaluation_service'
]
