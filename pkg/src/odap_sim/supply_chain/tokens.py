"""Product tokens and per-database fragment versions."""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from ..errors import EngineInvariantError, WorkflowError
from ..scenario.models import FragmentCatalog, QueryProfile


@dataclass
class ProductToken:
    token_class: str
    instance_id: str
    versions: Dict[str, int] = field(default_factory=dict)

    @classmethod
    def fresh(
        cls, token_class: str, instance_id: str, carried: Iterable[str]
    ) -> "ProductToken":
        return cls(token_class, instance_id, dict.fromkeys(carried, 0))

    def derive(self, token_class: str, instance_id: str) -> "ProductToken":
        """A new token carrying a copy of this token's fragment versions."""
        return ProductToken(token_class, instance_id, dict(self.versions))

    def bump(self, fragment_id: str) -> int:
        if fragment_id not in self.versions:
            raise WorkflowError(
                f"token {self.instance_id} does not carry fragment {fragment_id}"
            )
        self.versions[fragment_id] += 1
        return self.versions[fragment_id]


class DbState:
    """Version counter per (db, fragment) plus the committed version per fragment."""

    def __init__(self, catalog: FragmentCatalog):
        self.catalog = catalog
        self.versions: Dict[Tuple[str, str], int] = {
            (db_id, fragment.id): 0
            for fragment in catalog.fragments
            for db_id in fragment.hosts
        }
        self.committed: Dict[str, int] = {f.id: 0 for f in catalog.fragments}
        self.in_flight: Dict[str, int] = {}

    def version(self, db_id: str, fragment_id: str) -> int:
        return self.versions[(db_id, fragment_id)]

    def commit(self, fragment_id: str, dbs: Sequence[str]) -> int:
        """Advance the committed version and install it on ``dbs`` atomically."""
        version = self.committed[fragment_id] + 1
        self.committed[fragment_id] = version
        for db_id in dbs:
            self.apply(db_id, fragment_id, version)
        return version

    def apply(self, db_id: str, fragment_id: str, version: int) -> None:
        key = (db_id, fragment_id)
        if key not in self.versions:
            raise EngineInvariantError(f"{db_id} does not host {fragment_id}")
        self.versions[key] = max(self.versions[key], version)

    def start_propagation(self, fragment_id: str) -> None:
        self.in_flight[fragment_id] = self.in_flight.get(fragment_id, 0) + 1

    def finish_propagation(self, fragment_id: str) -> None:
        self.in_flight[fragment_id] -= 1
        if not self.in_flight[fragment_id]:
            del self.in_flight[fragment_id]

    def quiescent(self, fragment_id: Optional[str] = None) -> bool:
        if fragment_id is None:
            return not self.in_flight
        return fragment_id not in self.in_flight

    def inconsistent_fragments(self) -> List[str]:
        """Fragments whose hosting DBs disagree and have nothing in flight."""
        bad = []
        for fragment in self.catalog.fragments:
            if not self.quiescent(fragment.id):
                continue
            seen = {self.versions[(db_id, fragment.id)] for db_id in fragment.hosts}
            if len(seen) > 1:
                bad.append(fragment.id)
        return bad


def commit_write(
    target: Union[ProductToken, DbState],
    fragment_id: str,
    writer: QueryProfile,
    dbs: Sequence[str] = (),
) -> int:
    """Record a completed write of ``fragment_id`` by ``writer``; returns the new version.

    On a token only that token's copy advances. On the database state the
    fragment's committed version is installed on every db in ``dbs``.
    """
    if fragment_id not in writer.updates:
        raise WorkflowError(
            f"machine {writer.machine_id} does not update fragment {fragment_id}"
        )
    if isinstance(target, ProductToken):
        return target.bump(fragment_id)
    return target.commit(fragment_id, dbs)
