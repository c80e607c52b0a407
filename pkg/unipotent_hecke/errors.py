#!/usr/bin/env python3
"""Error hierarchy shared by every module.

Each error carries a short machine-readable ``code`` and an optional
``witness`` (anything JSON-serialisable) so the CLI can report *why* a
check failed, not just that it did.
"""

from __future__ import annotations

import logging
from typing import Any

log = logging.getLogger(__name__)


class HeckeToolError(Exception):
    code = "error"

    def __init__(self, message: str, *, code: str | None = None, witness: Any = None) -> None:
        super().__init__(message)
        if code is not None:
            self.code = code
        self.witness = witness
        log.debug("%s [%s]: %s", type(self).__name__, self.code, message)

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": type(self).__name__,
            "code": self.code,
            "message": str(self),
            "witness": self.witness,
        }


class AxiomViolation(HeckeToolError, ValueError):
    code = "axiom"


class EnumerationCapExceeded(HeckeToolError, RuntimeError):
    code = "cap exceeded"


class OrderBoundExceeded(HeckeToolError, ValueError):
    code = "order bound"


class GaloisActionError(HeckeToolError, ValueError):
    code = "galois action"


class ConsistencyError(HeckeToolError, RuntimeError):
    code = "consistency"


class AffineModelError(HeckeToolError, ValueError):
    code = "affine model"


class FacetConstructionError(HeckeToolError, RuntimeError):
    code = "facet construction"


class ReconstructionError(HeckeToolError, RuntimeError):
    code = "reconstruction"


class InexactDivisionError(HeckeToolError, ArithmeticError):
    code = "inexact division"


class ParameterError(HeckeToolError, ValueError):
    code = "parameter"


class SpecFormatError(HeckeToolError, ValueError):
    code = "format"
