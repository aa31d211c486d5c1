import math
from typing import Dict, List, Optional, Tuple

from dementia_detection.train_eval.metrics import AggregateReport, MetricsReport


class RunResultStorage:
    """MetricsReports of the runs of one model kind, keyed by (run index, split name)."""
    list_run_reports: List[Tuple[int, str, MetricsReport]]
    map_reports: Dict[Tuple[int, str], MetricsReport]

    def __init__(self, list_run_reports: Optional[List[Tuple[int, str, MetricsReport]]] = None):
        self.list_run_reports = []
        self.map_reports = {}
        for run_index, split_name, report in list_run_reports or []:
            self.add_report(run_index, split_name, report)

    def add_report(self, run_index: int, split_name: str, report: MetricsReport):
        if (run_index, split_name) in self.map_reports:
            raise ValueError("run {} already has a {} report".format(run_index, split_name))
        self.list_run_reports.append((run_index, split_name, report))
        self.map_reports[(run_index, split_name)] = report

    def run_indices(self) -> List[int]:
        return sorted({r for r, _, _ in self.list_run_reports})

    def get_reports(self, split_name: str) -> List[MetricsReport]:
        return [self.map_reports[(r, split_name)] for r in self.run_indices() if (r, split_name) in self.map_reports]

    def aggregate(self, split_name: str) -> AggregateReport:
        return AggregateReport(self.get_reports(split_name))

    def get_best_run(self, split_name: str, metric: str = "auroc") -> Optional[Tuple[int, MetricsReport]]:
        candidates = [(r, self.map_reports[(r, split_name)]) for r in self.run_indices()
                      if (r, split_name) in self.map_reports]
        candidates = [c for c in candidates if not math.isnan(c[1].value(metric))]
        if len(candidates) == 0:
            return None
        return max(candidates, key=lambda x: x[1].value(metric))


def merge_run_storages(storage_1: RunResultStorage, storage_2: RunResultStorage) -> RunResultStorage:
    return RunResultStorage(storage_1.list_run_reports + storage_2.list_run_reports)
