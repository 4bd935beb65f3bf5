"""Abstract algdep record types."""

from abc import ABC, abstractmethod

import pydantic
from pydantic import ConfigDict


class Record(pydantic.BaseModel, ABC):
    """Immutable value rendered to the report formats."""

    @abstractmethod
    def to_text(self) -> str:
        """Human readable report."""

    def to_row(self) -> dict:
        """Flat columns for the tsv report."""
        return {
            name: value
            for name, value in self.model_dump().items()
            if not isinstance(value, (dict, list, tuple))
        }

    def to_tsv(self) -> str:
        row = self.to_row()
        header = "\t".join(row)
        values = "\t".join(str(v) for v in row.values())
        return f"{header}\n{values}"

    def render(self, fmt: str = "text") -> str:
        if fmt == "tsv":
            return self.to_tsv()
        return self.to_text()

    def __str__(self):
        return self.to_text()

    model_config = ConfigDict(
        extra="forbid", frozen=True, arbitrary_types_allowed=True
    )
