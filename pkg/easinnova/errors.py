"""Exceptions raised by EasInnova operations.

Validators report content problems as diagnostics; exceptions are reserved
for unreadable input and violated operation preconditions.
"""


class EasinnovaError(Exception):
    """Base class for all EasInnova errors."""


class ArtifactError(EasinnovaError):
    """An artifact could not be read, parsed or matched to its schema."""

    def __init__(self, message: str, source: str | None = None):
        self.source = source
        super().__init__(f"{source}: {message}" if source else message)


class BpmnError(ArtifactError):
    """Malformed BPMN XML or a document outside the BPMN 2.0 namespace."""


class PreconditionError(EasinnovaError):
    """An operation was called on input violating its precondition."""


class ProjectExistsError(PreconditionError):
    """Target directory already holds a project manifest."""
