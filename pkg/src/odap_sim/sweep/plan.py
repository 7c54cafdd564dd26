from dataclasses import dataclass
import logging
from typing import Any, Dict, Iterator, List, Optional, Tuple

from ..errors import ConfigurationError, PatternSpaceError
from ..scenario.patterns import DistributionPattern
from ..seeding import derive_seed


logger = logging.getLogger(__name__)

DEFAULT_THROUGHPUTS = (100_000_000.0, 54_000_000.0, 11_000_000.0, 1_000_000.0)
DEFAULT_REPLICATES = 10
DEFAULT_PATTERN_CAP = 20


def enumerate_patterns(k: int, cap: int = DEFAULT_PATTERN_CAP) -> List[DistributionPattern]:
    """All 2^k patterns in binary-counting order, F1 the least significant bit."""
    if k < 0:
        raise PatternSpaceError(f"fragment count must be non-negative, got {k}")
    if k > cap:
        raise PatternSpaceError(
            f"refusing to enumerate 2^{k} patterns (cap is k={cap}); pass an explicit "
            "pattern list or raise ODAP_SIM_PATTERN_CAP"
        )
    return [DistributionPattern.from_id(pattern_id, k) for pattern_id in range(1 << k)]


@dataclass(frozen=True)
class SweepCell:
    pattern: DistributionPattern
    throughput_bps: float
    replicate: int
    seed: int


@dataclass(frozen=True)
class SweepPlan:
    throughputs: Tuple[float, ...] = DEFAULT_THROUGHPUTS
    replicates: int = DEFAULT_REPLICATES
    base_seed: int = 0
    pattern_ids: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigurationError(f"replicates must be at least 1, got {self.replicates}")
        if not self.throughputs:
            raise ConfigurationError("at least one throughput is required")
        for throughput in self.throughputs:
            if throughput <= 0:
                raise ConfigurationError(f"throughput must be positive, got {throughput:g}")
        if self.pattern_ids is not None and len(set(self.pattern_ids)) != len(
            self.pattern_ids
        ):
            raise ConfigurationError("pattern list contains duplicates")

    def patterns(self, k: int, cap: int = DEFAULT_PATTERN_CAP) -> List[DistributionPattern]:
        if self.pattern_ids is None:
            return enumerate_patterns(k, cap)
        return [DistributionPattern.from_id(pid, k) for pid in sorted(self.pattern_ids)]

    def cells(self, k: int, cap: int = DEFAULT_PATTERN_CAP) -> Iterator[SweepCell]:
        for pattern in self.patterns(k, cap):
            for throughput in self.throughputs:
                for replicate in range(self.replicates):
                    seed = derive_seed(
                        self.base_seed, pattern.pattern_id, throughput, replicate
                    )
                    yield SweepCell(pattern, throughput, replicate, seed)

    def size(self, k: int, cap: int = DEFAULT_PATTERN_CAP) -> int:
        return len(self.patterns(k, cap)) * len(self.throughputs) * self.replicates

    def to_dict(self) -> Dict[str, Any]:
        return {
            "throughputs": list(self.throughputs),
            "replicates": self.replicates,
            "base_seed": self.base_seed,
            "pattern_ids": None if self.pattern_ids is None else list(self.pattern_ids),
        }
