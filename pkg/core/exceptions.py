"""
Exception hierarchy for the toolkit.

Every error carries a human readable ``detail`` and the process ``exit_code``
the command line front end reports for it.
"""
from typing import List, Optional, Sequence, Tuple

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_COMPUTATION_ERROR = 2


class PocketError(Exception):
    """
    Base error of the toolkit.

    Args:
        detail (str): Description of the problem.
        exit_code (int): Exit code reported by the CLI.
    """
    exit_code: int = EXIT_COMPUTATION_ERROR

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return self.detail


class InputError(PocketError):
    """Bad input files or arguments."""
    exit_code = EXIT_INPUT_ERROR


class ParameterError(InputError):
    """Invalid numeric parameter (non-positive sigma or lambda, bad grid...)."""


class StructureParseError(InputError):
    """Malformed structure file."""

    def __init__(self, detail: str, line_number: Optional[int] = None):
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(prefix + detail)
        self.line_number = line_number


class ExtractionError(InputError):
    """Pocket or ligand extraction failed (empty pocket...)."""


class LigandResolutionError(ExtractionError):
    """The requested het group is unknown or ambiguous."""

    def __init__(self, detail: str, candidates: Sequence[str] = ()):
        if candidates:
            detail = f"{detail}; candidates: {', '.join(candidates)}"
        super().__init__(detail)
        self.candidates: List[str] = list(candidates)


class ChargeAssignmentError(ExtractionError):
    """Atoms without a charge under the ``error`` policy."""

    def __init__(self, missing: Sequence[Tuple[str, str]]):
        pairs = ", ".join(f"{res}/{atom}" for res, atom in missing)
        super().__init__(f"No partial charge for (residue/atom): {pairs}")
        self.missing = list(missing)


class ComputationError(PocketError):
    """A numerical stage failed."""
    exit_code = EXIT_COMPUTATION_ERROR
