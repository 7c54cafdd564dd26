from dataclasses import dataclass
from typing import Any, Dict, List, Optional


@dataclass
class BatchMetrics:
    batch_id: str
    start_time: float
    end_time: Optional[float] = None
    simulations: int = 0
    success: bool = False
    error_type: Optional[str] = None


class MetricsCollector:
    def __init__(self):
        self.metrics: List[BatchMetrics] = []

    def add_metric(self, metric: BatchMetrics):
        self.metrics.append(metric)

    def get_summary(self, wall_time_s: Optional[float] = None) -> Dict[str, Any]:
        if not self.metrics:
            return {"message": "No metrics available"}

        total = len(self.metrics)
        successful = sum(1 for m in self.metrics if m.success)
        failed = total - successful
        simulations = sum(m.simulations for m in self.metrics if m.success)
        busy = sum(m.end_time - m.start_time for m in self.metrics if m.end_time)

        summary = {
            "total_batches": total,
            "successful": successful,
            "failed": failed,
            "simulations": simulations,
            "success_rate": f"{(successful/total)*100:.1f}%",
            "avg_sim_seconds": f"{busy / simulations:.4f}" if simulations else "0",
        }
        if wall_time_s:
            summary["sims_per_second"] = f"{simulations / wall_time_s:.1f}"
        return summary

    def clear(self):
        self.metrics.clear()
