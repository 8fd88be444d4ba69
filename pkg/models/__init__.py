from .dataset import ColumnKind, Dataset, DiscretizedDataset, SplitSpec
from .selection import (BernoulliModel, CEConfig, ExtractPolicy, Mask,
                        RankedSelection, SelectionResult)
from .catalog import CATALOG, CatalogEntry, catalog_entry
from .evaluation import (BenchmarkReport, ClassifierKind, ClassifierSpec,
                         MetricRecord, RunManifest, SweepPoint)

__all__ = ['ColumnKind',
           'Dataset',
           'DiscretizedDataset',
           'SplitSpec',
           'BernoulliModel',
           'CEConfig',
           'ExtractPolicy',
           'Mask',
           'RankedSelection',
           'SelectionResult',
           'BenchmarkReport',
           'ClassifierKind',
           'ClassifierSpec',
           'MetricRecord',
           'RunManifest',
           'SweepPoint',
           'CATALOG',
           'CatalogEntry',
           'catalog_entry']
